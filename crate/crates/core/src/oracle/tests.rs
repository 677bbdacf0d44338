use super::*;
use crate::model::Program;

fn prog(src: &str) -> Program {
    Program::single("t.pl", src, &[]).unwrap()
}

fn run(src: &str, q: &str) -> Outcome {
    solve(&prog(src), &Query::parse(q).unwrap(), Limits::default(), &Stubs::new())
}

fn answers(o: &Outcome) -> Vec<String> {
    let ops = crate::syntax::OperatorTable::default();
    o.answers
        .iter()
        .map(|a| {
            a.iter()
                .map(|(v, t)| format!("{v}={}", crate::syntax::render_term(t, &ops)))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

const FAC: &str = "fac(0,1) :- !.\nfac(N,F) :- N1 is N-1, fac(N1,F1), F is N*F1.\n";
const FAC_FIXED: &str = "fac(0,F) :- !, F = 1.\nfac(N,F) :- N1 is N-1, fac(N1,F1), F is N*F1.\n";

#[test]
fn facts_in_order() {
    let o = run("p(a). p(b).", "?- p(X).");
    assert_eq!(answers(&o), ["X=a", "X=b"]);
    assert_eq!(o.terminal, Terminal::Exhausted);
}

#[test]
fn factorial_mode_bug() {
    let o = run(FAC, "fac(5,F)");
    assert_eq!(answers(&o), ["F=120"]);
    let o = run(FAC, "fac(0,0)");
    assert_eq!(o.terminal, Terminal::DepthLimited);
    let o = run(FAC_FIXED, "fac(0,0)");
    assert!(o.answers.is_empty());
    assert_eq!(o.terminal, Terminal::Exhausted);
}

#[test]
fn if_then_else_commits_to_first_condition_solution() {
    let src = "m(a). m(b).\nt(X, R) :- ( m(X) -> R = yes ; R = no ).\n";
    assert_eq!(answers(&run(src, "t(X, R)")), ["X=a,R=yes"]);
    assert_eq!(answers(&run(src, "t(c, R)")), ["R=no"]);
    // a bare if-then fails when the condition does
    assert!(run("t :- ( fail -> true ).", "t").answers.is_empty());
}

#[test]
fn cut_is_local_to_its_predicate() {
    let src = "c(X) :- d(X).\nc(z).\nd(X) :- e(X), !.\ne(a). e(b).\n";
    assert_eq!(answers(&run(src, "c(X)")), ["X=a", "X=z"]);
    // cut inside call/1 and inside a condition is local as well
    let src = "f(X) :- call((g(X), !)).\nf(z).\ng(a). g(b).\n";
    assert_eq!(answers(&run(src, "f(X)")), ["X=a", "X=z"]);
    let src = "h(X) :- ( (g(X), !) -> true ; true ).\nh(z).\ng(a). g(b).\n";
    assert_eq!(answers(&run(src, "h(X)")), ["X=a", "X=z"]);
}

#[test]
fn cut_prunes_clause_alternatives_and_disjunction() {
    let src = "p(X) :- ( X = 1 ; X = 2 ), !.\np(3).\n";
    assert_eq!(answers(&run(src, "p(X)")), ["X=1"]);
}

#[test]
fn negation_as_failure() {
    let src = "p(a). p(b).\nn(X) :- \\+ p(X).\n";
    assert_eq!(answers(&run(src, "n(c)")), [""]);
    assert!(run(src, "n(a)").answers.is_empty());
    assert_eq!(run(src, "n(X)").answers.len(), 0);
}

#[test]
fn errors_are_terminal_and_keep_answers() {
    let o = run("p(1). p(x). q(Y) :- p(X), Y is X + 1.", "q(Y)");
    assert_eq!(answers(&o), ["Y=2"]);
    assert_eq!(o.terminal, Terminal::Error("type_error(evaluable, x/0)".into()));
    let o = run("p(X, Y) :- X is Y.", "p(X, Y)");
    assert_eq!(o.terminal, Terminal::Error("instantiation_error".into()));
    let o = run("p :- q.", "p");
    assert!(matches!(o.terminal, Terminal::Error(ref e) if e.starts_with("existence_error")));
    let o = run("p(X) :- atom_length(X, 3).", "p(abc)");
    assert!(matches!(o.terminal, Terminal::Error(ref e) if e.starts_with("unsupported_builtin")));
}

#[test]
fn cyclic_unification_is_an_error() {
    let o = run("p(X) :- X = f(X).", "p(Y)");
    assert_eq!(o.terminal, Terminal::Error("cyclic_term".into()));
}

#[test]
fn call_n_findall_and_library() {
    let src = "p(a). p(b).\nadd(X, Y, Z) :- Z is X + Y.\n";
    assert_eq!(answers(&run(src, "call(p, X)")), ["X=a", "X=b"]);
    assert!(answers(&run(src, "findall(X, p(X), L)"))[0].ends_with("L=[a,b]"));
    assert_eq!(answers(&run(src, "call(add(1), 2, Z)")), ["Z=3"]);
    assert_eq!(answers(&run(src, "append(X, [c], [a,c])")), ["X=[a]"]);
    assert_eq!(answers(&run(src, "length([a,b], N)")), ["N=2"]);
    assert_eq!(answers(&run(src, "member(X, [1,2]), X > 1")), ["X=2"]);
    assert_eq!(answers(&run(src, "forall(p(_Y), atom(_Y))")), [""]);
}

#[test]
fn arithmetic() {
    let o = run("t.", "X is 7 // 2, Y is -7 mod 3, Z is 2 * (3 + 4) - 1");
    assert_eq!(answers(&o), ["X=3,Y=2,Z=13"]);
    let o = run("t.", "1 < 2, 2 =< 2, 3 =:= 3, 1 =\\= 2");
    assert_eq!(o.answers.len(), 1);
}

#[test]
fn step_limit_and_answer_limit() {
    let o = run("nat(0).\nnat(s(X)) :- nat(X).\n", "nat(X)");
    assert_eq!(o.answers.len(), 32);
    assert_eq!(o.terminal, Terminal::DepthLimited);
    let o = run("loop :- loop.", "loop");
    assert_eq!(o.terminal, Terminal::DepthLimited);
}

#[test]
fn stubs_stand_in_for_builtins() {
    let p = prog("next(S, T) :- read(S, T).\n");
    let stubs = Stubs::parse("read(s0, hello). read(s1, end_of_file).").unwrap();
    let o = solve(&p, &Query::parse("next(S, T)").unwrap(), Limits::default(), &stubs);
    assert_eq!(answers(&o), ["S=s0,T=hello", "S=s1,T=end_of_file"]);
    assert!(Stubs::parse("a :- b.").is_err());
}

#[test]
fn equivalence_verdicts() {
    let a = prog("p(a). p(b).\n");
    let qs = parse_battery("?- p(X).\n% comment\n?- p(c).\n").unwrap();
    let v = equivalent(&a, &a, &qs, Limits::default(), &Stubs::new());
    assert_eq!(v, [Verdict::Equal, Verdict::Equal]);

    let b = prog("p(b). p(a).\n");
    let v = equivalent(&a, &b, &qs, Limits::default(), &Stubs::new());
    assert!(!v[0].is_equal());
    assert!(v[1].is_equal());

    let f1 = prog(FAC);
    let f2 = prog(FAC_FIXED);
    let q = [Query::parse("fac(0,0)").unwrap(), Query::parse("fac(3,F)").unwrap()];
    let v = equivalent(&f1, &f2, &q, Limits::default(), &Stubs::new());
    assert!(!v[0].is_equal());
    assert_eq!(v[1], Verdict::Equal);
}

#[test]
fn answers_compare_modulo_variable_names() {
    let a = prog("p(X, f(X, Y)).\n");
    let b = prog("p(A, f(A, _)).\n");
    let q = [Query::parse("p(U, V)").unwrap()];
    assert_eq!(equivalent(&a, &b, &q, Limits::default(), &Stubs::new()), [Verdict::Equal]);
    let c = prog("p(A, f(_, A)).\n");
    assert!(!equivalent(&a, &c, &q, Limits::default(), &Stubs::new())[0].is_equal());
}

#[test]
fn unification_versus_identity_test() {
    let a = prog("r(T, S) :- ( T = eof -> S = done ; S = more ).\n");
    let b = prog("r(T, S) :- ( T == eof -> S = done ; S = more ).\n");
    let q = [Query::parse("r(eof, S)").unwrap(), Query::parse("r(X, S)").unwrap()];
    let v = equivalent(&a, &b, &q, Limits::default(), &Stubs::new());
    assert_eq!(v[0], Verdict::Equal);
    assert!(!v[1].is_equal());
}

#[test]
fn modules_and_qualified_calls() {
    let p = Program::from_sources(
        "[files]\nm1.pl\nm2.pl\n",
        &[
            ("m1.pl".into(), ":- module(m1, [p/1]).\np(X) :- q(X).\nq(one).\n".into()),
            ("m2.pl".into(), ":- module(m2, []).\n:- use_module(m1).\nq(two).\nr(X) :- p(X).\ns(X) :- m1:q(X).\n".into()),
        ],
    )
    .unwrap();
    let o = solve(&p, &Query::parse("m2:r(X)").unwrap(), Limits::default(), &Stubs::new());
    assert_eq!(answers(&o), ["X=one"]);
    let o = solve(&p, &Query::parse("m2:s(X)").unwrap(), Limits::default(), &Stubs::new());
    assert_eq!(answers(&o), ["X=one"]);
}

#[test]
fn deterministic() {
    let p = prog(FAC);
    let q = Query::parse("fac(6, F)").unwrap();
    assert_eq!(
        solve(&p, &q, Limits::default(), &Stubs::new()),
        solve(&p, &q, Limits::default(), &Stubs::new())
    );
}
