//! Runtime terms, binding store and unification.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::rc::Rc;

use crate::syntax::{Term, TermKind};

pub(crate) type Sym = Rc<str>;

#[derive(Clone, Debug)]
pub(crate) enum T {
    Var(usize),
    Atom(Sym),
    Int(i64),
    Float(f64),
    Str(Sym),
    Cmp(Sym, Rc<[T]>),
}

impl T {
    pub fn atom(s: &str) -> T {
        T::Atom(Rc::from(s))
    }

    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            T::Atom(a) => Some((a, 0)),
            T::Cmp(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[T] {
        match self {
            T::Cmp(_, a) => a,
            _ => &[],
        }
    }

    pub fn is(&self, name: &str, arity: usize) -> bool {
        self.functor() == Some((name, arity))
    }

    /// Renumbers clause-local variables by adding `base`.
    pub fn offset(&self, base: usize) -> T {
        match self {
            T::Var(i) => T::Var(i + base),
            T::Cmp(f, args) => T::Cmp(f.clone(), args.iter().map(|a| a.offset(base)).collect()),
            t => t.clone(),
        }
    }
}

/// Converts a source term, numbering its variables in `vars`; each `_` is fresh.
pub(crate) fn compile(t: &Term, vars: &mut HashMap<String, usize>, next: &mut usize) -> T {
    match &t.kind {
        TermKind::Var(v) => {
            if v == "_" {
                *next += 1;
                return T::Var(*next - 1);
            }
            let n = *vars.entry(v.clone()).or_insert_with(|| {
                *next += 1;
                *next - 1
            });
            T::Var(n)
        }
        TermKind::Atom(a) => T::Atom(Rc::from(a.as_str())),
        TermKind::Int(i) => T::Int(*i),
        TermKind::Float(f) => T::Float(*f),
        TermKind::Str(s) => T::Str(Rc::from(s.as_str())),
        TermKind::Compound(f, args) => T::Cmp(
            Rc::from(f.as_str()),
            args.iter().map(|a| compile(a, vars, next)).collect(),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum UnifyError {
    Cyclic,
}

#[derive(Default)]
pub(crate) struct Store {
    pub bindings: Vec<Option<T>>,
    pub trail: Vec<usize>,
}

impl Store {
    pub fn fresh(&mut self, n: usize) -> usize {
        let base = self.bindings.len();
        self.bindings.resize(base + n, None);
        base
    }

    pub fn deref(&self, t: &T) -> T {
        let mut cur = t.clone();
        while let T::Var(i) = cur {
            match &self.bindings[i] {
                Some(b) => cur = b.clone(),
                None => return cur,
            }
        }
        cur
    }

    pub fn undo(&mut self, trail_len: usize, bind_len: usize) {
        while self.trail.len() > trail_len {
            let v = self.trail.pop().expect("trail entry");
            if v < self.bindings.len() {
                self.bindings[v] = None;
            }
        }
        self.bindings.truncate(bind_len);
    }

    fn occurs(&self, v: usize, t: &T) -> bool {
        let mut stack = vec![t.clone()];
        while let Some(t) = stack.pop() {
            match self.deref(&t) {
                T::Var(i) if i == v => return true,
                T::Cmp(_, args) => stack.extend(args.iter().cloned()),
                _ => {}
            }
        }
        false
    }

    fn bind(&mut self, v: usize, t: T) -> Result<(), UnifyError> {
        if matches!(t, T::Cmp(..)) && self.occurs(v, &t) {
            return Err(UnifyError::Cyclic);
        }
        self.bindings[v] = Some(t);
        self.trail.push(v);
        Ok(())
    }

    /// Unifies without occurs check; binding a variable to a term that
    /// contains it is reported as an error rather than building a cycle.
    pub fn unify(&mut self, a: &T, b: &T) -> Result<bool, UnifyError> {
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((a, b)) = stack.pop() {
            let a = self.deref(&a);
            let b = self.deref(&b);
            match (&a, &b) {
                (T::Var(i), T::Var(j)) => {
                    if i != j {
                        // bind the younger variable to the older one
                        let (young, old) = if i > j { (*i, b.clone()) } else { (*j, a.clone()) };
                        self.bind(young, old)?;
                    }
                }
                (T::Var(i), _) => self.bind(*i, b.clone())?,
                (_, T::Var(j)) => self.bind(*j, a.clone())?,
                (T::Atom(x), T::Atom(y)) => {
                    if x != y {
                        return Ok(false);
                    }
                }
                (T::Int(x), T::Int(y)) => {
                    if x != y {
                        return Ok(false);
                    }
                }
                (T::Float(x), T::Float(y)) => {
                    if x.to_bits() != y.to_bits() {
                        return Ok(false);
                    }
                }
                (T::Str(x), T::Str(y)) => {
                    if x != y {
                        return Ok(false);
                    }
                }
                (T::Cmp(f, xs), T::Cmp(g, ys)) => {
                    if f != g || xs.len() != ys.len() {
                        return Ok(false);
                    }
                    for (x, y) in xs.iter().zip(ys.iter()) {
                        stack.push((x.clone(), y.clone()));
                    }
                }
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    /// Standard order of terms: Var < Number < Atom < String < Compound.
    pub fn compare(&self, a: &T, b: &T) -> Ordering {
        let a = self.deref(a);
        let b = self.deref(b);
        fn rank(t: &T) -> u8 {
            match t {
                T::Var(_) => 0,
                T::Int(_) | T::Float(_) => 1,
                T::Atom(_) => 3,
                T::Str(_) => 4,
                T::Cmp(..) => 5,
            }
        }
        match (&a, &b) {
            (T::Var(i), T::Var(j)) => i.cmp(j),
            (T::Int(x), T::Int(y)) => x.cmp(y),
            (T::Float(x), T::Float(y)) => x.total_cmp(y),
            (T::Int(x), T::Float(y)) => (*x as f64).total_cmp(y).then(Ordering::Greater),
            (T::Float(x), T::Int(y)) => x.total_cmp(&(*y as f64)).then(Ordering::Less),
            (T::Atom(x), T::Atom(y)) | (T::Str(x), T::Str(y)) => x.cmp(y),
            (T::Cmp(f, xs), T::Cmp(g, ys)) => xs
                .len()
                .cmp(&ys.len())
                .then_with(|| f.cmp(g))
                .then_with(|| {
                    for (x, y) in xs.iter().zip(ys.iter()) {
                        let o = self.compare(x, y);
                        if o != Ordering::Equal {
                            return o;
                        }
                    }
                    Ordering::Equal
                }),
            _ => rank(&a).cmp(&rank(&b)),
        }
    }

    /// Fully dereferenced copy.
    pub fn resolve(&self, t: &T) -> T {
        match self.deref(t) {
            T::Cmp(f, args) => T::Cmp(f, args.iter().map(|a| self.resolve(a)).collect()),
            t => t,
        }
    }

    /// Converts back to a source term; unbound variables become `_G<n>`.
    pub fn export(&self, t: &T) -> Term {
        match self.deref(t) {
            T::Var(i) => Term::var(format!("_G{i}")),
            T::Atom(a) => Term::atom(&*a),
            T::Int(i) => Term::int(i),
            T::Float(f) => Term::new(TermKind::Float(f)),
            T::Str(s) => Term::string(&*s),
            T::Cmp(f, args) => Term::compound(&*f, args.iter().map(|a| self.export(a)).collect()),
        }
    }

    /// Copies a term from another store, mapping its unbound variables to
    /// fresh variables here.
    pub fn import(&mut self, from: &Store, t: &T, map: &mut HashMap<usize, usize>) -> T {
        match from.deref(t) {
            T::Var(i) => {
                let v = match map.get(&i) {
                    Some(&v) => v,
                    None => {
                        let v = self.fresh(1);
                        map.insert(i, v);
                        v
                    }
                };
                T::Var(v)
            }
            T::Cmp(f, args) => {
                let args: Vec<T> = args.iter().map(|a| self.import(from, a, map)).collect();
                T::Cmp(f, args.into())
            }
            t => t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unify_and_undo() {
        let mut s = Store::default();
        let base = s.fresh(2);
        let f = T::Cmp(Rc::from("f"), vec![T::Var(base), T::atom("b")].into());
        let g = T::Cmp(Rc::from("f"), vec![T::atom("a"), T::Var(base + 1)].into());
        assert_eq!(s.unify(&f, &g), Ok(true));
        assert!(matches!(s.deref(&T::Var(base)), T::Atom(a) if &*a == "a"));
        s.undo(0, 2);
        assert!(matches!(s.deref(&T::Var(base)), T::Var(_)));
    }

    #[test]
    fn cyclic_binding_is_an_error() {
        let mut s = Store::default();
        let x = s.fresh(1);
        let fx = T::Cmp(Rc::from("f"), vec![T::Var(x)].into());
        assert_eq!(s.unify(&T::Var(x), &fx), Err(UnifyError::Cyclic));
    }
}
