use super::term::{Span, Term, TermKind};

#[derive(Debug, Clone)]
pub enum GoalKind {
    Conj(Box<Goal>, Box<Goal>),
    Disj(Box<Goal>, Box<Goal>),
    /// `(C -> T ; E)`. A bare `(C -> T)` has `else_ = fail` and `implicit_else`.
    IfThenElse {
        cond: Box<Goal>,
        then: Box<Goal>,
        else_: Box<Goal>,
        implicit_else: bool,
    },
    Naf(Box<Goal>),
    Cut,
    Call(Term),
}

/// Control-level view of a clause body.
#[derive(Debug, Clone)]
pub struct Goal {
    pub kind: GoalKind,
    pub span: Option<Span>,
}

impl PartialEq for Goal {
    fn eq(&self, other: &Self) -> bool {
        use GoalKind::*;
        match (&self.kind, &other.kind) {
            (Conj(a, b), Conj(c, d)) | (Disj(a, b), Disj(c, d)) => a == c && b == d,
            (
                IfThenElse {
                    cond: c1,
                    then: t1,
                    else_: e1,
                    implicit_else: i1,
                },
                IfThenElse {
                    cond: c2,
                    then: t2,
                    else_: e2,
                    implicit_else: i2,
                },
            ) => c1 == c2 && t1 == t2 && e1 == e2 && i1 == i2,
            (Naf(a), Naf(b)) => a == b,
            (Cut, Cut) => true,
            (Call(a), Call(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Goal {}

impl Goal {
    pub fn new(kind: GoalKind) -> Self {
        Goal { kind, span: None }
    }

    pub fn call(t: Term) -> Self {
        let span = t.span;
        Goal {
            kind: GoalKind::Call(t),
            span,
        }
    }

    pub fn truth() -> Self {
        Goal::call(Term::atom("true"))
    }

    pub fn is_true(&self) -> bool {
        matches!(&self.kind, GoalKind::Call(t) if t.is_atom("true"))
    }

    /// Converts a body term into a goal tree.
    pub fn from_term(t: &Term) -> Goal {
        let span = t.span;
        let kind = match &t.kind {
            TermKind::Atom(a) if a == "!" => GoalKind::Cut,
            TermKind::Compound(f, args) if args.len() == 2 && f == "," => GoalKind::Conj(
                Box::new(Goal::from_term(&args[0])),
                Box::new(Goal::from_term(&args[1])),
            ),
            TermKind::Compound(f, args) if args.len() == 2 && f == ";" => {
                if args[0].is_functor("->", 2) {
                    let c = &args[0].args();
                    GoalKind::IfThenElse {
                        cond: Box::new(Goal::from_term(&c[0])),
                        then: Box::new(Goal::from_term(&c[1])),
                        else_: Box::new(Goal::from_term(&args[1])),
                        implicit_else: false,
                    }
                } else {
                    GoalKind::Disj(
                        Box::new(Goal::from_term(&args[0])),
                        Box::new(Goal::from_term(&args[1])),
                    )
                }
            }
            TermKind::Compound(f, args) if args.len() == 2 && f == "->" => GoalKind::IfThenElse {
                cond: Box::new(Goal::from_term(&args[0])),
                then: Box::new(Goal::from_term(&args[1])),
                else_: Box::new(Goal::call(Term::atom("fail"))),
                implicit_else: true,
            },
            TermKind::Compound(f, args) if args.len() == 1 && f == "\\+" => {
                GoalKind::Naf(Box::new(Goal::from_term(&args[0])))
            }
            _ => GoalKind::Call(t.clone()),
        };
        Goal { kind, span }
    }

    /// Converts back to a term (spans dropped).
    pub fn to_term(&self) -> Term {
        match &self.kind {
            GoalKind::Conj(a, b) => Term::compound(",", vec![a.to_term(), b.to_term()]),
            GoalKind::Disj(a, b) => Term::compound(";", vec![a.to_term(), b.to_term()]),
            GoalKind::IfThenElse {
                cond,
                then,
                else_,
                implicit_else,
            } => {
                let ite = Term::compound("->", vec![cond.to_term(), then.to_term()]);
                if *implicit_else {
                    ite
                } else {
                    Term::compound(";", vec![ite, else_.to_term()])
                }
            }
            GoalKind::Naf(g) => Term::compound("\\+", vec![g.to_term()]),
            GoalKind::Cut => Term::atom("!"),
            GoalKind::Call(t) => t.strip_spans(),
        }
    }

    /// Flattens a right- or left-nested conjunction into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Goal> {
        let mut out = Vec::new();
        fn go<'a>(g: &'a Goal, out: &mut Vec<&'a Goal>) {
            match &g.kind {
                GoalKind::Conj(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => out.push(g),
            }
        }
        go(self, &mut out);
        out
    }

    /// Builds a right-nested conjunction; empty input yields `true`.
    pub fn conj(goals: Vec<Goal>) -> Goal {
        let mut it = goals.into_iter().rev();
        let Some(last) = it.next() else {
            return Goal::truth();
        };
        it.fold(last, |acc, g| {
            Goal::new(GoalKind::Conj(Box::new(g), Box::new(acc)))
        })
    }

    /// Number of atomic goals (calls and cuts) in the tree.
    pub fn size(&self) -> usize {
        match &self.kind {
            GoalKind::Conj(a, b) | GoalKind::Disj(a, b) => a.size() + b.size(),
            GoalKind::IfThenElse {
                cond, then, else_, ..
            } => cond.size() + then.size() + else_.size(),
            GoalKind::Naf(g) => g.size(),
            GoalKind::Cut | GoalKind::Call(_) => 1,
        }
    }

    /// Visits every goal node, pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Goal)) {
        f(self);
        match &self.kind {
            GoalKind::Conj(a, b) | GoalKind::Disj(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            GoalKind::IfThenElse {
                cond, then, else_, ..
            } => {
                cond.walk(f);
                then.walk(f);
                else_.walk(f);
            }
            GoalKind::Naf(g) => g.walk(f),
            GoalKind::Cut | GoalKind::Call(_) => {}
        }
    }

    /// Cuts that prune the enclosing clause (cuts under `\+` are local).
    pub fn clause_cuts(&self) -> Vec<&Goal> {
        let mut out = Vec::new();
        fn go<'a>(g: &'a Goal, out: &mut Vec<&'a Goal>) {
            match &g.kind {
                GoalKind::Conj(a, b) | GoalKind::Disj(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                GoalKind::IfThenElse { then, else_, .. } => {
                    // a cut in the condition is local to it
                    go(then, out);
                    go(else_, out);
                }
                GoalKind::Naf(_) | GoalKind::Call(_) => {}
                GoalKind::Cut => out.push(g),
            }
        }
        go(self, &mut out);
        out
    }

    /// Calls `f` on every term occurring in the goal tree.
    pub fn for_each_term<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        self.walk(&mut |g| {
            if let GoalKind::Call(t) = &g.kind {
                f(t)
            }
        });
    }

    pub fn count_var(&self, name: &str) -> usize {
        let mut n = 0;
        self.for_each_term(&mut |t| n += t.count_var(name));
        n
    }
}

/// A parsed clause: `Head :- Body.` or the fact `Head.` (body `true`).
#[derive(Debug, Clone)]
pub struct Clause {
    pub head: Term,
    pub body: Goal,
    pub span: Span,
    pub head_span: Option<Span>,
    /// Absent for facts.
    pub body_span: Option<Span>,
}

impl PartialEq for Clause {
    fn eq(&self, other: &Self) -> bool {
        self.head == other.head && self.body == other.body
    }
}

impl Clause {
    /// Builds a clause from a clause term (`:-`/2 or a fact).
    pub fn from_term(t: &Term, span: Span) -> Clause {
        if t.is_functor(":-", 2) {
            let head = t.args()[0].clone();
            let body = Goal::from_term(&t.args()[1]);
            Clause {
                head_span: head.span,
                body_span: t.args()[1].span,
                head,
                body,
                span,
            }
        } else {
            Clause {
                head: t.clone(),
                head_span: t.span,
                body: Goal::truth(),
                body_span: None,
                span,
            }
        }
    }

    /// Synthesized clause without source positions.
    pub fn synthetic(head: Term, body: Goal) -> Clause {
        Clause {
            head,
            body,
            span: Span::new(0, 0),
            head_span: None,
            body_span: None,
        }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_true() && self.body_span.is_none()
    }

    pub fn to_term(&self) -> Term {
        if self.body.is_true() {
            self.head.strip_spans()
        } else {
            Term::compound(":-", vec![self.head.strip_spans(), self.body.to_term()])
        }
    }

    /// Named variables of the clause in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        self.to_term().variables()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, OperatorTable};

    fn goal(s: &str) -> Goal {
        Goal::from_term(&parse_term(s, &OperatorTable::default()).unwrap())
    }

    #[test]
    fn ite_is_not_disjunction() {
        let g = goal("(c -> t ; e)");
        assert!(matches!(g.kind, GoalKind::IfThenElse { implicit_else: false, .. }));
        assert_eq!(g, goal("((c -> t) ; e)"));
    }

    #[test]
    fn bare_if_then_has_implicit_fail() {
        let g = goal("(c -> t)");
        match g.kind {
            GoalKind::IfThenElse {
                else_,
                implicit_else,
                ..
            } => {
                assert!(implicit_else);
                assert_eq!(*else_, Goal::call(Term::atom("fail")));
            }
            _ => panic!("expected if-then-else"),
        }
    }

    #[test]
    fn disjunction_right_nested() {
        let g = goal("(a ; b ; c)");
        match g.kind {
            GoalKind::Disj(a, rest) => {
                assert_eq!(*a, goal("a"));
                assert!(matches!(rest.kind, GoalKind::Disj(..)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn term_roundtrip() {
        for s in ["(a, b -> c ; d)", "\\+ a, !, b", "(a -> b)", "(a ; b), c"] {
            let t = parse_term(s, &OperatorTable::default()).unwrap();
            assert_eq!(Goal::from_term(&t).to_term(), t);
        }
    }

    #[test]
    fn clause_cuts_skip_local_scopes() {
        assert_eq!(goal("a, !, (b -> ! ; c)").clause_cuts().len(), 2);
        assert_eq!(goal("\\+ (a, !), (! -> b ; c)").clause_cuts().len(), 0);
    }
}
