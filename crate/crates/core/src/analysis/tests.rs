use super::*;
use crate::model::Program;

const READER: &str = include_str!("../../tests/fixtures/okeefe_reader.pl");

fn load(files: &[(&str, &str)], extra: &str) -> Program {
    let mut manifest = String::from("[files]\n");
    for (f, _) in files {
        manifest.push_str(f);
        manifest.push('\n');
    }
    manifest.push_str(extra);
    let sources: Vec<(String, String)> = files.iter().map(|(f, t)| (f.to_string(), t.to_string())).collect();
    Program::from_sources(&manifest, &sources).unwrap()
}

fn pid(s: &str) -> PredId {
    let (m, rest) = s.split_once(':').unwrap();
    let (n, a) = rest.rsplit_once('/').unwrap();
    PredId::new(m, n, a.parse().unwrap())
}

fn kinds(s: &[Suggestion]) -> Vec<(SuggestionKind, String)> {
    s.iter().map(|s| (s.kind, s.target.clone())).collect()
}

#[test]
fn dead_code_four_nodes() {
    let p = Program::single("a.pl", "main :- p.\np.\nq(1).\nr :- q(_).\n", &["main/0"]).unwrap();
    let dead = dead_predicates(&p).unwrap();
    assert_eq!(dead, [pid("user:q/1"), pid("user:r/0")].into_iter().collect());
}

#[test]
fn dead_code_needs_roots() {
    let p = Program::single("a.pl", "p.\n", &[]).unwrap();
    assert_eq!(dead_predicates(&p), Err(AnalysisError::NoRootsConfigured));
    let p = Program::single("a.pl", "p.\nq.\n", &["p/0", "q/0"]).unwrap();
    assert!(dead_predicates(&p).unwrap().is_empty());
}

#[test]
fn dead_code_is_transitive() {
    let p = Program::single("a.pl", "main.\nx :- y.\ny :- z.\nz.\n", &["main/0"]).unwrap();
    assert_eq!(dead_predicates(&p).unwrap().len(), 3);
}

#[test]
fn unused_import_entries() {
    let p = load(
        &[
            ("m1.pl", ":- module(m1, [p/1, q/1]).\np(1).\nq(1).\n"),
            ("m2.pl", ":- module(m2, [go/0]).\n:- use_module(m1, [p/1, q/1]).\ngo :- p(_).\n"),
        ],
        "",
    );
    let u = unused_imports(&p);
    assert_eq!(u.len(), 1);
    assert_eq!((u[0].module.as_str(), u[0].indicator.as_deref()), ("m2", Some("q/1")));
    let none = Program::single("a.pl", "p.\n", &[]).unwrap();
    assert!(unused_imports(&none).is_empty());
}

#[test]
fn import_used_in_dead_code_is_used() {
    let p = load(
        &[
            ("m1.pl", ":- module(m1, [p/1]).\np(1).\n"),
            ("m2.pl", ":- module(m2, [go/0]).\n:- use_module(m1, [p/1]).\ngo.\nunused :- p(_).\n"),
        ],
        "[roots]\nm2:go/0\n",
    );
    assert!(unused_imports(&p).is_empty());
    assert!(dead_predicates(&p).unwrap().contains(&pid("m2:unused/0")));
}

fn export_fixture() -> Program {
    load(
        &[
            ("m1.pl", ":- module(m1, [p/1, q/1, r/1]).\np(1).\nq(1).\nr(1).\n"),
            ("m2.pl", ":- module(m2, [go/0]).\n:- use_module(m1, [p/1]).\ngo :- p(_).\n"),
            ("m3.pl", ":- module(m3, [run/0]).\nrun :- m1:q(_).\n"),
        ],
        "[roots]\nm2:go/0\nm3:run/0\n",
    )
}

#[test]
fn hideable_exports_exclude_imported_qualified_and_roots() {
    let p = export_fixture();
    let h: Vec<String> = hideable_exports(&p).iter().map(|h| h.pred.to_string()).collect();
    assert_eq!(h, vec!["m1:r/1"]);
}

#[test]
fn whole_module_import_counts_when_used() {
    let p = load(
        &[
            ("m1.pl", ":- module(m1, [p/1, q/1]).\np(1).\nq(1).\n"),
            ("m2.pl", ":- module(m2, [go/0]).\n:- use_module(m1).\ngo :- p(_).\n"),
        ],
        "[roots]\nm2:go/0\n",
    );
    let h: Vec<String> = hideable_exports(&p).iter().map(|h| h.pred.to_string()).collect();
    assert_eq!(h, vec!["m1:q/1"]);
}

#[test]
fn duplicates_simple_and_near_miss() {
    let p = load(
        &[
            ("m1.pl", ":- module(m1, [p/1, s/1]).\np(X) :- atom(X), X \\== a.\ns(b).\n"),
            ("m2.pl", ":- module(m2, [p/1, s/1]).\np(Y) :- atom(Y), Y \\== a.\ns(c).\n"),
        ],
        "",
    );
    assert_eq!(duplicate_groups(&p), vec![vec![pid("m1:p/1"), pid("m2:p/1")]]);
}

#[test]
fn duplicates_clause_count_differs() {
    let p = load(
        &[
            ("m1.pl", ":- module(m1, [p/1]).\np(a).\np(b).\n"),
            ("m2.pl", ":- module(m2, [p/1]).\np(a).\n"),
        ],
        "",
    );
    assert!(duplicate_groups(&p).is_empty());
}

#[test]
fn duplicates_mutually_recursive_and_lower_strata() {
    let body = "even(0).\neven(N) :- N > 0, M is N-1, odd(M).\nodd(N) :- N > 0, M is N-1, even(M).\nuse(X) :- even(X).\n";
    let p = load(
        &[
            ("m1.pl", &format!(":- module(m1, [use/1]).\n{body}")),
            ("m2.pl", &format!(":- module(m2, [use/1]).\n{body}")),
        ],
        "",
    );
    let g = duplicate_groups(&p);
    assert_eq!(
        g,
        vec![
            vec![pid("m1:even/1"), pid("m2:even/1")],
            vec![pid("m1:odd/1"), pid("m2:odd/1")],
            vec![pid("m1:use/1"), pid("m2:use/1")],
        ]
    );
}

#[test]
fn calls_to_unmatched_lower_predicates_break_duplication() {
    let p = load(
        &[
            ("m1.pl", ":- module(m1, [top/1]).\ntop(X) :- h(X).\nh(a).\n"),
            ("m2.pl", ":- module(m2, [top/1]).\ntop(X) :- h(X).\nh(b).\n"),
        ],
        "",
    );
    assert!(duplicate_groups(&p).is_empty());
}

#[test]
fn reader_common_sequence() {
    let p = Program::single("reader.pl", READER, &[]).unwrap();
    let c = common_sequences(&p, 2, 2);
    assert_eq!(c.len(), 1, "{c:?}");
    assert_eq!(c[0].text, "read(Stream,Term), reader_code(Term,Stream,State)");
    assert_eq!(c[0].params, vec!["Stream", "State"]);
    assert_eq!(c[0].occurrences.len(), 2);
    assert_eq!(c[0].occurrences[1].args, vec!["Stream", "State"]);
}

#[test]
fn sequences_match_constants_exactly() {
    let p = Program::single(
        "a.pl",
        "p(X) :- f(a), g(X).\nq(Y) :- f(b), g(Y).\nr :- h, i.\n",
        &[],
    )
    .unwrap();
    assert!(common_sequences(&p, 2, 2).is_empty());
}

#[test]
fn sequences_are_maximal_and_stop_at_cuts() {
    let p = Program::single(
        "a.pl",
        "p(X) :- a(X), b(X), c(X).\nq(Y) :- a(Y), b(Y), c(Y).\nr(Z) :- a(Z), !, b(Z), c(Z).\n",
        &[],
    )
    .unwrap();
    let c = common_sequences(&p, 2, 2);
    let texts: Vec<&str> = c.iter().map(|c| c.text.as_str()).collect();
    assert!(texts.contains(&"a(X), b(X), c(X)"), "{texts:?}");
    // b,c also occurs in r, so it has a larger occurrence set and survives
    assert!(texts.contains(&"b(X), c(X)"), "{texts:?}");
    assert!(!texts.contains(&"a(X), b(X)"), "{texts:?}");
}

#[test]
fn far_examples() {
    let p = Program::single("a.pl", "main :- p(1, 2).\np(X, Y) :- q(Y).\nq(_).\n", &["main/0"]).unwrap();
    let e = far(&p);
    for (m, i) in [("user:p/2", 1), ("user:p/2", 2), ("user:q/1", 1)] {
        assert!(e.contains(&ArgPos { pred: pid(m), index: i }), "{m} {i}");
    }
    let p = Program::single("a.pl", "main :- p(a).\np(a) :- true.\n", &["main/0"]).unwrap();
    assert!(far(&p).is_empty());
    let p = Program::single("a.pl", "main :- p(a).\np(X) :- write(X).\n", &["main/0"]).unwrap();
    assert!(far(&p).is_empty());
}

#[test]
fn far_excludes_roots_repeated_and_meta() {
    let p = Program::single(
        "a.pl",
        "main(X) :- p(X, X), findall(Y, q(Y), _).\np(Z, Z).\nq(_).\n",
        &["main/1"],
    )
    .unwrap();
    assert!(far(&p).is_empty(), "{:?}", far(&p));
}

#[test]
fn reader_smells() {
    let p = Program::single("reader.pl", READER, &["make_reader/3", "reader_done/1", "reader_next/3"]).unwrap();
    let s = clause_smells(&p);
    let k = kinds(&s);
    assert!(k.contains(&(SuggestionKind::CutReplaceable, "user:reader_code/3".into())), "{k:?}");
    let obc = s.iter().find(|s| s.kind == SuggestionKind::OutputBeforeCommit).unwrap();
    assert_eq!(obc.payload["positions"], serde_json::json!([3]));
}

#[test]
fn fac_output_before_commit() {
    let p = Program::single(
        "fac.pl",
        "fac(0,1) :- !.\nfac(N,F) :- N1 is N-1, fac(N1,F1), F is N*F1.\n",
        &["fac/2"],
    )
    .unwrap();
    let s: Vec<_> = clause_smells(&p)
        .into_iter()
        .filter(|s| s.kind == SuggestionKind::OutputBeforeCommit)
        .collect();
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].payload["positions"], serde_json::json!([2]));
}

#[test]
fn pure_facts_have_no_smells() {
    let p = Program::single("a.pl", "p(a).\np(b).\nq(1, 2).\n", &[]).unwrap();
    assert!(clause_smells(&p).is_empty());
}

#[test]
fn unification_tests_and_invertible_ite() {
    let p = Program::single(
        "a.pl",
        "p(X, Y) :- ( X = a -> Y = 1 ; Y = 2 ).\nq(X) :- ( \\+ X == a -> true ; fail ).\nr(X) :- ( X == 1 -> a, b ; c ).\n",
        &[],
    )
    .unwrap();
    let k = kinds(&clause_smells(&p));
    assert!(k.contains(&(SuggestionKind::UnificationAsTest, "user:p/2: X = a".into())), "{k:?}");
    let inv: Vec<_> = k.iter().filter(|(k, _)| *k == SuggestionKind::InvertibleIte).collect();
    assert_eq!(inv.len(), 2, "{k:?}");
}

#[test]
fn reader_all_suggestions_and_stable_ids() {
    let roots = ["make_reader/3", "reader_done/1", "reader_next/3"];
    let p = Program::single("reader.pl", READER, &roots).unwrap();
    let s = all_suggestions(&p);
    let k = kinds(&s);
    assert!(k.contains(&(SuggestionKind::CutReplaceable, "user:reader_code/3".into())));
    assert!(k.iter().any(|(k, t)| *k == SuggestionKind::CommonSequence && t.contains("reader_code")));
    let again = all_suggestions(&Program::single("reader.pl", READER, &roots).unwrap());
    let ids: Vec<&str> = s.iter().map(|s| s.id.as_str()).collect();
    let ids2: Vec<&str> = again.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids, ids2);
    // ordered by kind
    assert!(s.windows(2).all(|w| w[0].kind <= w[1].kind));
    for sg in &s {
        if let Some(l) = &sg.span {
            assert!(l.end <= READER.len());
        }
    }
}

#[test]
fn empty_program_has_no_suggestions() {
    let p = Program::from_sources("", &[]).unwrap();
    assert!(all_suggestions(&p).is_empty());
}

#[test]
fn suggestion_json_schema() {
    let p = Program::single("reader.pl", READER, &[]).unwrap();
    let s = all_suggestions(&p);
    let v = serde_json::to_value(&s[0]).unwrap();
    for f in ["id", "kind", "module", "target", "span", "explanation", "payload"] {
        assert!(v.get(f).is_some(), "{f}");
    }
}
