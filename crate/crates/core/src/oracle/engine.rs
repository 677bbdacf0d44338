use std::collections::HashMap;
use std::rc::Rc;

use crate::model::{Program, Resolution};
use crate::syntax::{parse_program, OperatorTable};

use super::store::{compile, Store, Sym, UnifyError, T};
use super::{Answer, Limits, Outcome, Query, Stubs, Terminal};

/// Library predicates defined in Prolog; they run in the caller's module.
const PRELUDE: &str = r"
append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).
member(X, [X|_]).
member(X, [_|T]) :- member(X, T).
memberchk(X, L) :- member(X, L), !.
length(L, N) :- '$length'(L, 0, N).
'$length'([], N, N).
'$length'([_|T], N0, N) :- N1 is N0 + 1, '$length'(T, N1, N).
reverse(L, R) :- '$reverse'(L, [], R).
'$reverse'([], R, R).
'$reverse'([H|T], A, R) :- '$reverse'(T, [H|A], R).
nth0(I, L, E) :- '$nth'(L, 0, I, E).
nth1(I, L, E) :- '$nth'(L, 1, I, E).
'$nth'([H|_], B, B, H).
'$nth'([_|T], B, I, E) :- B1 is B + 1, '$nth'(T, B1, I, E).
last([X], X).
last([_|T], X) :- last(T, X).
select(X, [X|T], T).
select(X, [H|T], [H|R]) :- select(X, T, R).
between(L, H, L) :- L =< H.
between(L, H, X) :- L < H, L1 is L + 1, between(L1, H, X).
maplist(_, []).
maplist(G, [A|As]) :- call(G, A), maplist(G, As).
maplist(_, [], []).
maplist(G, [A|As], [B|Bs]) :- call(G, A, B), maplist(G, As, Bs).
maplist(_, [], [], []).
maplist(G, [A|As], [B|Bs], [C|Cs]) :- call(G, A, B, C), maplist(G, As, Bs, Cs).
sum_list(L, S) :- '$sum'(L, 0, S).
'$sum'([], S, S).
'$sum'([X|Xs], A, S) :- A1 is A + X, '$sum'(Xs, A1, S).
";

#[derive(Debug)]
struct CClause {
    head: T,
    body: T,
    nvars: usize,
}

type Clauses = Rc<Vec<CClause>>;

fn compile_clause(head: &crate::syntax::Term, body: &crate::syntax::Term) -> CClause {
    let mut vars = HashMap::new();
    let mut next = 0;
    let head = compile(head, &mut vars, &mut next);
    let body = compile(body, &mut vars, &mut next);
    CClause { head, body, nvars: next }
}

#[derive(Clone)]
enum Target {
    /// Clauses plus the module their bodies run in (`None`: caller's).
    Clauses(Clauses, Option<Sym>),
    Native,
    Error(String),
}

struct Db<'p> {
    program: &'p Program,
    preds: HashMap<crate::model::PredId, Clauses>,
    prelude: HashMap<(String, usize), Clauses>,
    stubs: HashMap<(String, usize), Clauses>,
    cache: HashMap<(Sym, Sym, usize), Target>,
}

impl<'p> Db<'p> {
    fn new(program: &'p Program, stubs: &Stubs) -> Db<'p> {
        let mut preds = HashMap::new();
        for (id, _) in &program.preds {
            let clauses: Vec<CClause> = program
                .clauses_of(id)
                .map(|(_, c)| compile_clause(&c.head, &c.body.to_term()))
                .collect();
            preds.insert(id.clone(), Rc::new(clauses));
        }
        let mut prelude: HashMap<(String, usize), Vec<CClause>> = HashMap::new();
        let parsed = parse_program("prelude", PRELUDE, &mut OperatorTable::default())
            .expect("prelude parses");
        for c in parsed.clauses() {
            let (n, a) = c.head.functor().expect("prelude head");
            prelude
                .entry((n.to_string(), a))
                .or_default()
                .push(compile_clause(&c.head, &c.body.to_term()));
        }
        let stubs = stubs
            .facts
            .iter()
            .map(|(k, facts)| {
                let cl = facts
                    .iter()
                    .map(|f| compile_clause(f, &crate::syntax::Term::atom("true")))
                    .collect();
                (k.clone(), Rc::new(cl))
            })
            .collect();
        Db {
            program,
            preds,
            prelude: prelude.into_iter().map(|(k, v)| (k, Rc::new(v))).collect(),
            stubs,
            cache: HashMap::new(),
        }
    }

    fn target(&mut self, module: &Sym, name: &Sym, arity: usize) -> Target {
        let key = (module.clone(), name.clone(), arity);
        if let Some(t) = self.cache.get(&key) {
            return t.clone();
        }
        let goal = if arity == 0 {
            crate::syntax::Term::atom(&**name)
        } else {
            crate::syntax::Term::compound(
                &**name,
                (0..arity).map(|i| crate::syntax::Term::var(format!("A{i}"))).collect(),
            )
        };
        let t = match self.program.resolve(module, &goal) {
            Resolution::Pred(id) => Target::Clauses(
                self.preds.get(&id).cloned().unwrap_or_default(),
                Some(Rc::from(id.module.as_str())),
            ),
            _ if name.starts_with('$') && self.prelude.contains_key(&(name.to_string(), arity)) => {
                Target::Clauses(self.prelude[&(name.to_string(), arity)].clone(), None)
            }
            r => {
                let k = (name.to_string(), arity);
                if let Some(s) = self.stubs.get(&k) {
                    Target::Clauses(s.clone(), None)
                } else if is_native(name, arity) {
                    Target::Native
                } else if let Some(p) = self.prelude.get(&k) {
                    Target::Clauses(p.clone(), None)
                } else if r == Resolution::Unresolved {
                    Target::Error(format!("existence_error(procedure, {name}/{arity})"))
                } else {
                    Target::Error(format!("unsupported_builtin({name}/{arity})"))
                }
            }
        };
        self.cache.insert(key, t.clone());
        t
    }
}

fn is_native(name: &str, arity: usize) -> bool {
    matches!(
        (name, arity),
        ("true", 0)
            | ("otherwise", 0)
            | ("fail", 0)
            | ("false", 0)
            | ("=", 2)
            | ("\\=", 2)
            | ("==", 2)
            | ("\\==", 2)
            | ("@<", 2)
            | ("@>", 2)
            | ("@=<", 2)
            | ("@>=", 2)
            | ("compare", 3)
            | ("is", 2)
            | ("=:=", 2)
            | ("=\\=", 2)
            | ("<", 2)
            | (">", 2)
            | ("=<", 2)
            | (">=", 2)
            | ("var", 1)
            | ("nonvar", 1)
            | ("atom", 1)
            | ("number", 1)
            | ("integer", 1)
            | ("float", 1)
            | ("atomic", 1)
            | ("compound", 1)
            | ("callable", 1)
            | ("is_list", 1)
            | ("functor", 3)
            | ("arg", 3)
            | ("=..", 2)
            | ("copy_term", 2)
            | ("findall", 3)
            | ("halt", 0)
    ) || (name == "call" && (1..=8).contains(&arity))
}

enum Goal {
    Call(T, Sym, usize),
    CutTo(usize),
}

struct Cont {
    goal: Goal,
    next: K,
}

type K = Option<Rc<Cont>>;

impl Drop for Cont {
    // long continuations would otherwise be dropped recursively
    fn drop(&mut self) {
        let mut next = self.next.take();
        while let Some(rc) = next {
            match Rc::try_unwrap(rc) {
                Ok(mut c) => next = c.next.take(),
                Err(_) => break,
            }
        }
    }
}

fn push(goal: Goal, next: K) -> K {
    Some(Rc::new(Cont { goal, next }))
}

enum Alt {
    Goals(K),
    Clauses {
        goal: T,
        module: Sym,
        clauses: Clauses,
        body_module: Option<Sym>,
        idx: usize,
        next: K,
    },
}

struct ChoicePoint {
    alt: Alt,
    trail_len: usize,
    bind_len: usize,
}

enum Stop {
    Limit,
    Error(String),
}

impl From<UnifyError> for Stop {
    fn from(_: UnifyError) -> Self {
        Stop::Error("cyclic_term".into())
    }
}

struct Engine<'d, 'p> {
    db: &'d mut Db<'p>,
    store: Store,
    cps: Vec<ChoicePoint>,
    steps: u64,
    max_steps: u64,
}

enum Step {
    Continue(K),
    Fail,
}

impl<'d, 'p> Engine<'d, 'p> {
    fn new(db: &'d mut Db<'p>, max_steps: u64) -> Self {
        Engine {
            db,
            store: Store::default(),
            cps: Vec::new(),
            steps: 0,
            max_steps,
        }
    }

    fn push_cp(&mut self, alt: Alt) {
        self.cps.push(ChoicePoint {
            alt,
            trail_len: self.store.trail.len(),
            bind_len: self.store.bindings.len(),
        });
    }

    /// Runs until the next solution (`true`) or exhaustion (`false`).
    /// `start` of `None` resumes by backtracking.
    fn run(&mut self, start: Option<K>) -> Result<bool, Stop> {
        let mut k = match start {
            Some(k) => k,
            None => match self.backtrack()? {
                Some(k) => k,
                None => return Ok(false),
            },
        };
        loop {
            let Some(c) = k else { return Ok(true) };
            let next = c.next.clone();
            let step = match &c.goal {
                Goal::CutTo(h) => {
                    self.cps.truncate(*h);
                    Step::Continue(next)
                }
                Goal::Call(t, m, cutb) => self.call(t, m, *cutb, next)?,
            };
            k = match step {
                Step::Continue(k) => k,
                Step::Fail => match self.backtrack()? {
                    Some(k) => k,
                    None => return Ok(false),
                },
            };
        }
    }

    fn backtrack(&mut self) -> Result<Option<K>, Stop> {
        loop {
            let Some(cp) = self.cps.pop() else { return Ok(None) };
            self.store.undo(cp.trail_len, cp.bind_len);
            match cp.alt {
                Alt::Goals(k) => return Ok(Some(k)),
                Alt::Clauses {
                    goal,
                    module,
                    clauses,
                    body_module,
                    idx,
                    next,
                } => {
                    if let Step::Continue(k) =
                        self.try_clauses(goal, module, clauses, body_module, idx, next)?
                    {
                        return Ok(Some(k));
                    }
                }
            }
        }
    }

    fn try_clauses(
        &mut self,
        goal: T,
        module: Sym,
        clauses: Clauses,
        body_module: Option<Sym>,
        idx: usize,
        next: K,
    ) -> Result<Step, Stop> {
        let barrier = self.cps.len();
        let mut i = idx;
        while i < clauses.len() {
            let c = &clauses[i];
            if i + 1 < clauses.len() {
                self.push_cp(Alt::Clauses {
                    goal: goal.clone(),
                    module: module.clone(),
                    clauses: clauses.clone(),
                    body_module: body_module.clone(),
                    idx: i + 1,
                    next: next.clone(),
                });
            }
            let base = self.store.fresh(c.nvars);
            let head = c.head.offset(base);
            if self.store.unify(&goal, &head)? {
                if c.body.is("true", 0) {
                    return Ok(Step::Continue(next));
                }
                let m = body_module.clone().unwrap_or_else(|| module.clone());
                return Ok(Step::Continue(push(Goal::Call(c.body.offset(base), m, barrier), next)));
            }
            // head mismatch: drop the alternative we just pushed and retry inline
            if i + 1 < clauses.len() {
                let cp = self.cps.pop().expect("clause choicepoint");
                self.store.undo(cp.trail_len, cp.bind_len);
            } else {
                return Ok(Step::Fail);
            }
            i += 1;
        }
        Ok(Step::Fail)
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.steps += 1;
        if self.steps > self.max_steps {
            Err(Stop::Limit)
        } else {
            Ok(())
        }
    }

    fn call(&mut self, t: &T, m: &Sym, cutb: usize, next: K) -> Result<Step, Stop> {
        let t = self.store.deref(t);
        let (name, arity) = match &t {
            T::Var(_) => return Err(Stop::Error("instantiation_error".into())),
            T::Atom(a) => (a.clone(), 0),
            T::Cmp(f, args) => (f.clone(), args.len()),
            _ => return Err(Stop::Error(format!("type_error(callable, {})", self.show(&t)))),
        };
        let a = t.args();
        match (&*name, arity) {
            (",", 2) => {
                let k = push(Goal::Call(a[1].clone(), m.clone(), cutb), next);
                return Ok(Step::Continue(push(Goal::Call(a[0].clone(), m.clone(), cutb), k)));
            }
            (";", 2) => {
                let lhs = self.store.deref(&a[0]);
                if lhs.is("->", 2) {
                    let h = self.cps.len();
                    self.push_cp(Alt::Goals(push(Goal::Call(a[1].clone(), m.clone(), cutb), next.clone())));
                    let c = lhs.args();
                    let k = push(Goal::Call(c[1].clone(), m.clone(), cutb), next);
                    let k = push(Goal::CutTo(h), k);
                    return Ok(Step::Continue(push(Goal::Call(c[0].clone(), m.clone(), h + 1), k)));
                }
                if lhs.is("*->", 2) {
                    return Err(Stop::Error("unsupported_builtin(*->/2)".into()));
                }
                self.push_cp(Alt::Goals(push(Goal::Call(a[1].clone(), m.clone(), cutb), next.clone())));
                return Ok(Step::Continue(push(Goal::Call(lhs, m.clone(), cutb), next)));
            }
            ("->", 2) => {
                let h = self.cps.len();
                let k = push(Goal::Call(a[1].clone(), m.clone(), cutb), next);
                let k = push(Goal::CutTo(h), k);
                return Ok(Step::Continue(push(Goal::Call(a[0].clone(), m.clone(), h), k)));
            }
            ("\\+", 1) | ("not", 1) => {
                let h = self.cps.len();
                self.push_cp(Alt::Goals(next));
                let k = push(Goal::Call(T::atom("fail"), m.clone(), h), None);
                let k = push(Goal::CutTo(h), k);
                return Ok(Step::Continue(push(Goal::Call(a[0].clone(), m.clone(), h + 1), k)));
            }
            ("!", 0) => {
                self.cps.truncate(cutb);
                return Ok(Step::Continue(next));
            }
            (":", 2) => {
                let module = match self.store.deref(&a[0]) {
                    T::Atom(x) => x,
                    T::Var(_) => return Err(Stop::Error("instantiation_error".into())),
                    other => return Err(Stop::Error(format!("type_error(module, {})", self.show(&other)))),
                };
                return Ok(Step::Continue(push(Goal::Call(a[1].clone(), module, cutb), next)));
            }
            ("once", 1) => {
                let h = self.cps.len();
                let k = push(Goal::CutTo(h), next);
                return Ok(Step::Continue(push(Goal::Call(a[0].clone(), m.clone(), h), k)));
            }
            ("ignore", 1) => {
                let g = T::Cmp(
                    Rc::from(";"),
                    vec![T::Cmp(Rc::from("->"), vec![a[0].clone(), T::atom("true")].into()), T::atom("true")].into(),
                );
                return Ok(Step::Continue(push(Goal::Call(g, m.clone(), cutb), next)));
            }
            ("forall", 2) => {
                let inner = T::Cmp(
                    Rc::from(","),
                    vec![a[0].clone(), T::Cmp(Rc::from("\\+"), vec![a[1].clone()].into())].into(),
                );
                let g = T::Cmp(Rc::from("\\+"), vec![inner].into());
                return Ok(Step::Continue(push(Goal::Call(g, m.clone(), cutb), next)));
            }
            _ => {}
        }
        self.tick()?;
        match self.db.target(m, &name, arity) {
            Target::Clauses(clauses, body_module) => {
                self.try_clauses(t.clone(), m.clone(), clauses, body_module, 0, next)
            }
            Target::Error(e) => Err(Stop::Error(e)),
            Target::Native => {
                if name.as_ref() == "call" {
                    let goal = self.add_args(&a[0], &a[1..])?;
                    let h = self.cps.len();
                    return Ok(Step::Continue(push(Goal::Call(goal, m.clone(), h), next)));
                }
                if self.native(&name, a, m)? {
                    Ok(Step::Continue(next))
                } else {
                    Ok(Step::Fail)
                }
            }
        }
    }

    fn add_args(&self, g: &T, extra: &[T]) -> Result<T, Stop> {
        match self.store.deref(g) {
            T::Var(_) => Err(Stop::Error("instantiation_error".into())),
            T::Atom(a) if extra.is_empty() => Ok(T::Atom(a)),
            T::Atom(a) => Ok(T::Cmp(a, extra.to_vec().into())),
            T::Cmp(f, args) if f.as_ref() == ":" && args.len() == 2 => {
                let inner = self.add_args(&args[1], extra)?;
                Ok(T::Cmp(f, vec![args[0].clone(), inner].into()))
            }
            T::Cmp(f, args) => {
                let mut v = args.to_vec();
                v.extend_from_slice(extra);
                Ok(T::Cmp(f, v.into()))
            }
            other => Err(Stop::Error(format!("type_error(callable, {})", self.show(&other)))),
        }
    }

    fn show(&self, t: &T) -> String {
        crate::syntax::render_term(&self.store.export(t), &OperatorTable::default())
    }

    fn native(&mut self, name: &str, a: &[T], m: &Sym) -> Result<bool, Stop> {
        use std::cmp::Ordering::*;
        let s = &mut self.store;
        Ok(match (name, a.len()) {
            ("true", 0) | ("otherwise", 0) => true,
            ("fail", 0) | ("false", 0) => false,
            ("halt", 0) => return Err(Stop::Error("halt".into())),
            ("=", 2) => s.unify(&a[0], &a[1])?,
            ("\\=", 2) => {
                let (tl, bl) = (s.trail.len(), s.bindings.len());
                let r = s.unify(&a[0], &a[1]);
                s.undo(tl, bl);
                !r?
            }
            ("==", 2) => s.compare(&a[0], &a[1]) == Equal,
            ("\\==", 2) => s.compare(&a[0], &a[1]) != Equal,
            ("@<", 2) => s.compare(&a[0], &a[1]) == Less,
            ("@>", 2) => s.compare(&a[0], &a[1]) == Greater,
            ("@=<", 2) => s.compare(&a[0], &a[1]) != Greater,
            ("@>=", 2) => s.compare(&a[0], &a[1]) != Less,
            ("compare", 3) => {
                let o = match s.compare(&a[1], &a[2]) {
                    Less => "<",
                    Equal => "=",
                    Greater => ">",
                };
                s.unify(&a[0], &T::atom(o))?
            }
            ("is", 2) => {
                let v = eval(s, &a[1])?;
                s.unify(&a[0], &v.to_term())?
            }
            ("=:=", 2) | ("=\\=", 2) | ("<", 2) | (">", 2) | ("=<", 2) | (">=", 2) => {
                let x = eval(s, &a[0])?;
                let y = eval(s, &a[1])?;
                let o = x.cmp(&y);
                match name {
                    "=:=" => o == Equal,
                    "=\\=" => o != Equal,
                    "<" => o == Less,
                    ">" => o == Greater,
                    "=<" => o != Greater,
                    _ => o != Less,
                }
            }
            ("var", 1) => matches!(s.deref(&a[0]), T::Var(_)),
            ("nonvar", 1) => !matches!(s.deref(&a[0]), T::Var(_)),
            ("atom", 1) => matches!(s.deref(&a[0]), T::Atom(_)),
            ("number", 1) => matches!(s.deref(&a[0]), T::Int(_) | T::Float(_)),
            ("integer", 1) => matches!(s.deref(&a[0]), T::Int(_)),
            ("float", 1) => matches!(s.deref(&a[0]), T::Float(_)),
            ("atomic", 1) => !matches!(s.deref(&a[0]), T::Var(_) | T::Cmp(..)),
            ("compound", 1) => matches!(s.deref(&a[0]), T::Cmp(..)),
            ("callable", 1) => matches!(s.deref(&a[0]), T::Atom(_) | T::Cmp(..)),
            ("is_list", 1) => {
                let mut t = s.deref(&a[0]);
                loop {
                    match t {
                        T::Atom(ref x) if x.as_ref() == "[]" => break true,
                        T::Cmp(ref f, ref args) if f.as_ref() == "." && args.len() == 2 => {
                            t = s.deref(&args[1])
                        }
                        _ => break false,
                    }
                }
            }
            ("functor", 3) => match s.deref(&a[0]) {
                T::Var(_) => {
                    let n = match s.deref(&a[2]) {
                        T::Int(n) if n >= 0 => n as usize,
                        T::Var(_) => return Err(Stop::Error("instantiation_error".into())),
                        _ => return Err(Stop::Error("type_error(integer)".into())),
                    };
                    let f = s.deref(&a[1]);
                    let t = if n == 0 {
                        f
                    } else {
                        let T::Atom(name) = f else {
                            return Err(Stop::Error("type_error(atomic)".into()));
                        };
                        let base = s.fresh(n);
                        T::Cmp(name, (0..n).map(|i| T::Var(base + i)).collect())
                    };
                    s.unify(&a[0], &t)?
                }
                T::Cmp(f, args) => {
                    s.unify(&a[1], &T::Atom(f))? && s.unify(&a[2], &T::Int(args.len() as i64))?
                }
                t => s.unify(&a[1], &t)? && s.unify(&a[2], &T::Int(0))?,
            },
            ("arg", 3) => {
                let n = match s.deref(&a[0]) {
                    T::Int(n) => n,
                    _ => return Err(Stop::Error("instantiation_error".into())),
                };
                match s.deref(&a[1]) {
                    T::Cmp(_, args) if n >= 1 && (n as usize) <= args.len() => {
                        s.unify(&a[2], &args[n as usize - 1])?
                    }
                    T::Cmp(..) => false,
                    _ => return Err(Stop::Error("type_error(compound)".into())),
                }
            }
            ("=..", 2) => match s.deref(&a[0]) {
                T::Cmp(f, args) => {
                    let mut items = vec![T::Atom(f)];
                    items.extend(args.iter().cloned());
                    s.unify(&a[1], &make_list(items))?
                }
                T::Var(_) => {
                    let items = list_items(s, &a[1]).ok_or(Stop::Error("instantiation_error".into()))?;
                    let Some((head, rest)) = items.split_first() else {
                        return Err(Stop::Error("domain_error(non_empty_list)".into()));
                    };
                    let t = match (s.deref(head), rest.is_empty()) {
                        (h, true) => h,
                        (T::Atom(f), false) => T::Cmp(f, rest.to_vec().into()),
                        _ => return Err(Stop::Error("type_error(atom)".into())),
                    };
                    s.unify(&a[0], &t)?
                }
                t => s.unify(&a[1], &make_list(vec![t]))?,
            },
            ("copy_term", 2) => {
                let src = s.resolve(&a[0]);
                let mut map = HashMap::new();
                let copy = copy_fresh(s, &src, &mut map);
                s.unify(&a[1], &copy)?
            }
            ("findall", 3) => {
                let results = self.findall(&a[0], &a[1], m)?;
                let s = &mut self.store;
                s.unify(&a[2], &make_list(results))?
            }
            _ => return Err(Stop::Error(format!("unsupported_builtin({name}/{})", a.len()))),
        })
    }

    fn findall(&mut self, template: &T, goal: &T, m: &Sym) -> Result<Vec<T>, Stop> {
        let pair = T::Cmp(Rc::from("-"), vec![template.clone(), goal.clone()].into());
        let remaining = self.max_steps.saturating_sub(self.steps);
        let mut sub = Engine::new(&mut *self.db, remaining);
        let mut map = HashMap::new();
        let copied = sub.store.import(&self.store, &pair, &mut map);
        let (tmpl, g) = (copied.args()[0].clone(), copied.args()[1].clone());
        let mut results_raw = Vec::new();
        let mut start = Some(push(Goal::Call(g, m.clone(), 0), None));
        let outcome = loop {
            match sub.run(start.take()) {
                Ok(true) => results_raw.push(sub.store.resolve(&tmpl)),
                Ok(false) => break Ok(()),
                Err(e) => break Err(e),
            }
        };
        let sub_steps = sub.steps;
        let sub_store = std::mem::take(&mut sub.store);
        drop(sub);
        self.steps += sub_steps;
        outcome?;
        let mut results = Vec::new();
        for r in &results_raw {
            let mut map = HashMap::new();
            results.push(self.store.import(&sub_store, r, &mut map));
        }
        Ok(results)
    }
}

fn copy_fresh(s: &mut Store, t: &T, map: &mut HashMap<usize, usize>) -> T {
    match t {
        T::Var(i) => {
            let v = *map.entry(*i).or_insert_with(|| s.fresh(1));
            T::Var(v)
        }
        T::Cmp(f, args) => {
            let args: Vec<T> = args.iter().map(|x| copy_fresh(s, x, map)).collect();
            T::Cmp(f.clone(), args.into())
        }
        t => t.clone(),
    }
}

fn make_list(items: Vec<T>) -> T {
    items.into_iter().rev().fold(T::atom("[]"), |acc, x| {
        T::Cmp(Rc::from("."), vec![x, acc].into())
    })
}

fn list_items(s: &Store, t: &T) -> Option<Vec<T>> {
    let mut out = Vec::new();
    let mut t = s.deref(t);
    loop {
        match t {
            T::Atom(ref x) if x.as_ref() == "[]" => return Some(out),
            T::Cmp(ref f, ref args) if f.as_ref() == "." && args.len() == 2 => {
                out.push(args[0].clone());
                t = s.deref(&args[1]);
            }
            _ => return None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Num {
    I(i64),
    F(f64),
}

impl Num {
    fn to_term(self) -> T {
        match self {
            Num::I(i) => T::Int(i),
            Num::F(f) => T::Float(f),
        }
    }

    fn as_f64(self) -> f64 {
        match self {
            Num::I(i) => i as f64,
            Num::F(f) => f,
        }
    }

    fn cmp(&self, other: &Num) -> std::cmp::Ordering {
        match (self, other) {
            (Num::I(a), Num::I(b)) => a.cmp(b),
            _ => self.as_f64().total_cmp(&other.as_f64()),
        }
    }
}

fn eval(s: &Store, t: &T) -> Result<Num, Stop> {
    let overflow = || Stop::Error("evaluation_error(int_overflow)".into());
    let t = s.deref(t);
    match &t {
        T::Int(i) => Ok(Num::I(*i)),
        T::Float(f) => Ok(Num::F(*f)),
        T::Var(_) => Err(Stop::Error("instantiation_error".into())),
        T::Atom(a) => Err(Stop::Error(format!("type_error(evaluable, {a}/0)"))),
        T::Str(_) => Err(Stop::Error("type_error(evaluable, string)".into())),
        T::Cmp(f, args) => {
            let vals: Vec<Num> = args.iter().map(|x| eval(s, x)).collect::<Result<_, _>>()?;
            let int_only = |v: Num| match v {
                Num::I(i) => Ok(i),
                Num::F(_) => Err(Stop::Error("type_error(integer, float)".into())),
            };
            match (f.as_ref(), vals.as_slice()) {
                ("-", [x]) => match x {
                    Num::I(i) => i.checked_neg().map(Num::I).ok_or_else(overflow),
                    Num::F(v) => Ok(Num::F(-v)),
                },
                ("+", [x]) => Ok(*x),
                ("abs", [x]) => match x {
                    Num::I(i) => i.checked_abs().map(Num::I).ok_or_else(overflow),
                    Num::F(v) => Ok(Num::F(v.abs())),
                },
                ("+", [x, y]) | ("-", [x, y]) | ("*", [x, y]) => match (x, y) {
                    (Num::I(a), Num::I(b)) => {
                        let r = match f.as_ref() {
                            "+" => a.checked_add(*b),
                            "-" => a.checked_sub(*b),
                            _ => a.checked_mul(*b),
                        };
                        r.map(Num::I).ok_or_else(overflow)
                    }
                    _ => {
                        let (a, b) = (x.as_f64(), y.as_f64());
                        Ok(Num::F(match f.as_ref() {
                            "+" => a + b,
                            "-" => a - b,
                            _ => a * b,
                        }))
                    }
                },
                ("/", [x, y]) => {
                    if y.as_f64() == 0.0 {
                        return Err(Stop::Error("evaluation_error(zero_divisor)".into()));
                    }
                    match (x, y) {
                        (Num::I(a), Num::I(b)) if a % b == 0 => Ok(Num::I(a / b)),
                        _ => Ok(Num::F(x.as_f64() / y.as_f64())),
                    }
                }
                ("//", [x, y]) | ("mod", [x, y]) | ("rem", [x, y]) => {
                    let (a, b) = (int_only(*x)?, int_only(*y)?);
                    if b == 0 {
                        return Err(Stop::Error("evaluation_error(zero_divisor)".into()));
                    }
                    let r = match f.as_ref() {
                        "//" => a.checked_div(b),
                        "rem" => a.checked_rem(b),
                        _ => a.checked_rem(b).map(|r| if r != 0 && (r < 0) != (b < 0) { r + b } else { r }),
                    };
                    r.map(Num::I).ok_or_else(overflow)
                }
                ("min", [x, y]) => Ok(if y.cmp(x) == std::cmp::Ordering::Less { *y } else { *x }),
                ("max", [x, y]) => Ok(if y.cmp(x) == std::cmp::Ordering::Greater { *y } else { *x }),
                _ => Err(Stop::Error(format!("type_error(evaluable, {f}/{})", args.len()))),
            }
        }
    }
}

/// Runs a query and collects its answers.
pub fn solve(program: &Program, query: &Query, limits: Limits, stubs: &Stubs) -> Outcome {
    let mut db = Db::new(program, stubs);
    let mut engine = Engine::new(&mut db, limits.max_steps);
    let mut vars = HashMap::new();
    let mut next = 0;
    let goal = compile(&query.goal, &mut vars, &mut next);
    engine.store.fresh(next);
    let module: Sym = Rc::from(query.module.as_str());
    let mut answers: Vec<Answer> = Vec::new();
    let mut start = Some(push(Goal::Call(goal, module, 0), None));
    let terminal = loop {
        match engine.run(start.take()) {
            Ok(true) => {
                let ans = query
                    .vars
                    .iter()
                    .map(|v| (v.clone(), engine.store.export(&T::Var(vars[v]))))
                    .collect();
                answers.push(ans);
                if answers.len() >= limits.max_answers {
                    break Terminal::DepthLimited;
                }
            }
            Ok(false) => break Terminal::Exhausted,
            Err(Stop::Limit) => break Terminal::DepthLimited,
            Err(Stop::Error(e)) => break Terminal::Error(e),
        }
    };
    Outcome {
        answers,
        terminal,
        steps: engine.steps,
    }
}
