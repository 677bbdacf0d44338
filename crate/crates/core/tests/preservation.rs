mod common;

use std::time::Instant;

#[test]
fn preserving_transforms_keep_outcomes_on_the_corpus() {
    let t = Instant::now();
    let corpus = common::corpus();
    assert!(corpus.len() >= 20);
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut kinds = std::collections::BTreeMap::new();
    for fx in &corpus {
        assert!(fx.queries.len() >= 10, "{} has too few queries", fx.name);
        let r = common::preservation(fx);
        assert!(r.preserving > 0, "{}: no preserving transform applied", fx.name);
        checked += r.preserving;
        for (k, n) in &r.by_transform {
            *kinds.entry(*k).or_insert(0) += n;
        }
        failures.extend(r.failures);
    }
    eprintln!("{kinds:?}");
    assert!(failures.is_empty(), "{} of {checked} failed:\n{}", failures.len(), failures.join("\n"));
    assert!(t.elapsed().as_secs() < 60);
}
