mod common;

use std::collections::BTreeSet;

use plref_core::analysis::dead_predicates;
use plref_core::model::Program;
use proptest::prelude::*;

fn analysed(seed: u64) -> (BTreeSet<String>, BTreeSet<String>) {
    let (text, roots, expected) = common::random_call_graph(seed);
    let rs: Vec<&str> = roots.iter().map(String::as_str).collect();
    let p = Program::single("g.pl", &text, &rs).unwrap();
    let got = dead_predicates(&p).unwrap().iter().map(ToString::to_string).collect();
    (got, expected)
}

#[test]
fn thirty_seeds_match_naive_reachability() {
    for seed in 0..30 {
        common::dead_code_seed(seed).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn any_seed_matches_naive_reachability(seed in any::<u64>()) {
        let (got, expected) = analysed(seed);
        prop_assert_eq!(got, expected);
    }
}
