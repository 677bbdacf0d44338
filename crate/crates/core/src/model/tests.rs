use super::*;

const OKEEFE: &str = include_str!("../../tests/fixtures/okeefe_reader.pl");

fn reader() -> Program {
    Program::single(
        "reader.pl",
        OKEEFE,
        &["make_reader/3", "reader_done/1", "reader_next/3"],
    )
    .unwrap()
}

fn two_modules() -> Program {
    Program::from_sources(
        "[files]\nm1.pl\nm2.pl\n",
        &[
            ("m1.pl".into(), ":- module(m1, [p/1, q/1]).\np(a).\nq(b).\n".into()),
            (
                "m2.pl".into(),
                ":- module(m2, [r/1]).\n:- use_module(m1, [p/1]).\nr(X) :- p(X), m1:q(X).\n".into(),
            ),
        ],
    )
    .unwrap()
}

fn u(name: &str, arity: usize) -> PredId {
    PredId::new("user", name, arity)
}

#[test]
fn reader_listing_has_four_predicates() {
    let p = reader();
    assert_eq!(p.preds.len(), 4);
    assert_eq!(p.roots.len(), 3);
    assert_eq!(p.pred(&u("reader_code", 3)).unwrap().clauses.len(), 2);
    assert!(p.warnings.is_empty(), "{:?}", p.warnings);
}

#[test]
fn empty_manifest() {
    let p = Program::from_sources("[files]\n", &[]).unwrap();
    assert!(p.preds.is_empty());
    assert!(p.condensation().sccs.is_empty());
}

#[test]
fn imports_resolve_to_defining_module() {
    let p = two_modules();
    let r = p.resolve("m2", &crate::syntax::parse_term("p(X)", &Default::default()).unwrap());
    assert_eq!(r, Resolution::Pred(PredId::new("m1", "p", 1)));
    let q = p.resolve("m2", &crate::syntax::parse_term("m1:q(X)", &Default::default()).unwrap());
    assert_eq!(q, Resolution::Pred(PredId::new("m1", "q", 1)));
    let r2 = PredId::new("m2", "r", 1);
    let callees: Vec<&PredId> = p.pdg.callees(&r2).collect();
    assert_eq!(callees, [&PredId::new("m1", "p", 1), &PredId::new("m1", "q", 1)]);
}

#[test]
fn builtins_and_control() {
    let p = reader();
    let t = |s: &str| crate::syntax::parse_term(s, &Default::default()).unwrap();
    assert_eq!(p.resolve("user", &t("read(S,T)")), Resolution::Builtin);
    assert_eq!(p.resolve("user", &t("true")), Resolution::Builtin);
    assert_eq!(p.resolve("user", &t("(a,b)")), Resolution::Control);
    assert_eq!(p.resolve("user", &t("!")), Resolution::Control);
    assert_eq!(p.resolve("user", &t("nope(1)")), Resolution::Unresolved);
}

#[test]
fn reader_pdg_edges() {
    let p = reader();
    let edges: Vec<(String, String)> = p
        .pdg
        .edges
        .iter()
        .map(|&(a, b)| (p.pdg.nodes[a].name.clone(), p.pdg.nodes[b].name.clone()))
        .collect();
    assert_eq!(
        edges,
        [
            ("make_reader".to_string(), "reader_code".to_string()),
            ("reader_next".to_string(), "reader_code".to_string())
        ]
    );
    let c = p.condensation();
    assert_eq!(c.sccs.len(), 4);
    assert!(c.sccs.iter().all(|s| s.members.len() == 1));
}

#[test]
fn single_fact() {
    let p = Program::single("f.pl", "p(a).\n", &[]).unwrap();
    assert_eq!(p.pdg.nodes, [u("p", 1)]);
    assert!(p.pdg.edges.is_empty());
}

#[test]
fn mutual_recursion_scc() {
    let p = Program::single("f.pl", "p(X) :- q(X).\nq(X) :- p(X).\nq(_) :- r.\nr.\n", &[]).unwrap();
    let c = p.condensation();
    assert_eq!(c.sccs.len(), 2);
    assert_eq!(c.sccs[1].members, [u("p", 1), u("q", 1)]);
    assert_eq!(c.sccs[1].stratum, 1);
    assert_eq!(c.sccs[0].stratum, 0);
}

#[test]
fn meta_arguments_contribute_edges() {
    let src = "main :- findall(X, (gen(X), X > 1), _), maplist(show, [1]), call(G).\ngen(1).\nshow(_).\n";
    let p = Program::from_sources(
        "[files]\na.pl\n[meta]\nmaplist/2 1+1\n",
        &[("a.pl".into(), src.into())],
    )
    .unwrap();
    let callees: Vec<&str> = p.pdg.callees(&u("main", 0)).map(|c| c.name.as_str()).collect();
    assert_eq!(callees, ["gen", "show"]);
    assert!(p
        .warnings
        .iter()
        .any(|w| matches!(w, Warning::UnresolvedMeta { .. })));
}

#[test]
fn undefined_calls_warn() {
    let p = Program::single("a.pl", "p :- q.\n", &[]).unwrap();
    assert_eq!(p.warnings.len(), 1);
    assert!(p.warnings[0].to_string().contains("undefined q/0"));
}

#[test]
fn duplicate_module_names_rejected() {
    let r = Program::from_sources(
        "[files]\na.pl\nb.pl\n",
        &[
            ("a.pl".into(), ":- module(m, []).\n".into()),
            ("b.pl".into(), ":- module(m, []).\n".into()),
        ],
    );
    assert_eq!(r.unwrap_err(), ModelError::DuplicateModuleName("m".into()));
}

#[test]
fn parse_errors_carry_location() {
    let r = Program::single("a.pl", "p.\nq(:- .\n", &[]);
    match r.unwrap_err() {
        ModelError::Parse { file, line, .. } => {
            assert_eq!(file, "a.pl");
            assert_eq!(line, 2);
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn undefined_root_is_a_manifest_error() {
    let r = Program::single("a.pl", "p.\n", &["q/0"]);
    assert!(matches!(r, Err(ModelError::Manifest(_))));
}

#[test]
fn default_roots_are_exports() {
    let p = two_modules();
    let roots: Vec<String> = p.roots.iter().map(ToString::to_string).collect();
    assert_eq!(roots, ["m1:p/1", "m1:q/1", "m2:r/1"]);
}

#[test]
fn ambiguous_and_unknown_imports_warn() {
    let p = Program::from_sources(
        "[files]\na.pl\nb.pl\nc.pl\n",
        &[
            ("a.pl".into(), ":- module(a, [p/0]).\np.\n".into()),
            ("b.pl".into(), ":- module(b, [p/0]).\np.\n".into()),
            (
                "c.pl".into(),
                ":- module(c, []).\n:- use_module(a).\n:- use_module(b).\n:- use_module(nowhere).\nt :- p.\n".into(),
            ),
        ],
    )
    .unwrap();
    assert_eq!(
        p.resolve("c", &Term::atom("p")),
        Resolution::Pred(PredId::new("a", "p", 0))
    );
    assert!(p.warnings.iter().any(|w| matches!(w, Warning::AmbiguousImport { .. })));
    assert!(p.warnings.iter().any(|w| matches!(w, Warning::UnknownImport { .. })));
}

#[test]
fn file_path_imports() {
    let p = Program::from_sources(
        "[files]\nsrc/util.pl\nsrc/main.pl\n",
        &[
            ("src/util.pl".into(), ":- module(util, [h/0]).\nh.\n".into()),
            ("src/main.pl".into(), ":- use_module('util.pl').\nmain :- h.\n".into()),
        ],
    )
    .unwrap();
    assert_eq!(
        p.resolve("user", &Term::atom("h")),
        Resolution::Pred(PredId::new("util", "h", 0))
    );
}

#[test]
fn initialization_goals_are_entry_points() {
    let p = Program::single("a.pl", ":- initialization(main).\nmain.\n", &[]).unwrap();
    assert!(p.is_root(&u("main", 0)));
}

#[test]
fn versions_increase() {
    let a = reader();
    let b = a.reload().unwrap();
    assert!(b.version > a.version);
}
