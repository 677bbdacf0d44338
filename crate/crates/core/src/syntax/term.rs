use std::fmt;

use serde::{Deserialize, Serialize};

/// Half-open byte range `[start, end)` into a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, offset: usize) -> bool {
        self.start <= offset && offset < self.end
    }

    pub fn covers(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone)]
pub enum TermKind {
    Var(String),
    Atom(String),
    Int(i64),
    Float(f64),
    Str(String),
    Compound(String, Vec<Term>),
}

/// A Prolog term. Equality is structural: spans and raw source text are ignored.
#[derive(Debug, Clone)]
pub struct Term {
    pub kind: TermKind,
    /// Source span; `None` for synthesized terms.
    pub span: Option<Span>,
    /// Span of the functor/atom name token when written in prefix notation.
    pub name_span: Option<Span>,
    /// Verbatim source slice for quoted atoms, strings and numbers.
    pub raw: Option<String>,
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (TermKind::Var(a), TermKind::Var(b)) => a == b,
            (TermKind::Atom(a), TermKind::Atom(b)) => a == b,
            (TermKind::Int(a), TermKind::Int(b)) => a == b,
            (TermKind::Float(a), TermKind::Float(b)) => a.to_bits() == b.to_bits(),
            (TermKind::Str(a), TermKind::Str(b)) => a == b,
            (TermKind::Compound(f, xs), TermKind::Compound(g, ys)) => f == g && xs == ys,
            _ => false,
        }
    }
}

impl Eq for Term {}

impl Term {
    pub fn new(kind: TermKind) -> Self {
        Term {
            kind,
            span: None,
            name_span: None,
            raw: None,
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::new(TermKind::Var(name.into()))
    }

    pub fn atom(name: impl Into<String>) -> Self {
        Term::new(TermKind::Atom(name.into()))
    }

    pub fn int(value: i64) -> Self {
        Term::new(TermKind::Int(value))
    }

    pub fn string(value: impl Into<String>) -> Self {
        Term::new(TermKind::Str(value.into()))
    }

    /// Builds a compound, collapsing to an atom when `args` is empty.
    pub fn compound(name: impl Into<String>, args: Vec<Term>) -> Self {
        let name = name.into();
        if args.is_empty() {
            Term::atom(name)
        } else {
            Term::new(TermKind::Compound(name, args))
        }
    }

    pub fn with_span(mut self, span: Span) -> Self {
        self.span = Some(span);
        self
    }

    pub fn is_var(&self) -> bool {
        matches!(self.kind, TermKind::Var(_))
    }

    pub fn is_anonymous(&self) -> bool {
        matches!(&self.kind, TermKind::Var(v) if v == "_")
    }

    pub fn var_name(&self) -> Option<&str> {
        match &self.kind {
            TermKind::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn atom_name(&self) -> Option<&str> {
        match &self.kind {
            TermKind::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_atom(&self, name: &str) -> bool {
        matches!(&self.kind, TermKind::Atom(a) if a == name)
    }

    pub fn is_callable(&self) -> bool {
        matches!(self.kind, TermKind::Atom(_) | TermKind::Compound(..))
    }

    /// Name and arity for atoms and compounds.
    pub fn functor(&self) -> Option<(&str, usize)> {
        match &self.kind {
            TermKind::Atom(a) => Some((a, 0)),
            TermKind::Compound(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match &self.kind {
            TermKind::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn args_mut(&mut self) -> &mut [Term] {
        match &mut self.kind {
            TermKind::Compound(_, args) => args,
            _ => &mut [],
        }
    }

    pub fn is_functor(&self, name: &str, arity: usize) -> bool {
        self.functor() == Some((name, arity))
    }

    /// Named variables in order of first occurrence (anonymous `_` excluded).
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match &self.kind {
            TermKind::Var(v) if v != "_" => {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
            TermKind::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    /// Calls `f` on every variable occurrence, including anonymous ones.
    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        match &self.kind {
            TermKind::Var(_) => f(self),
            TermKind::Compound(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
            _ => {}
        }
    }

    /// Number of occurrences of the named variable.
    pub fn count_var(&self, name: &str) -> usize {
        let mut n = 0;
        self.for_each_var(&mut |t| {
            if t.var_name() == Some(name) {
                n += 1
            }
        });
        n
    }

    /// Returns a copy with variables renamed by `f`; spans are dropped.
    pub fn rename_vars(&self, f: &mut impl FnMut(&str) -> String) -> Term {
        match &self.kind {
            TermKind::Var(v) if v == "_" => Term::var("_"),
            TermKind::Var(v) => Term::var(f(v)),
            TermKind::Compound(name, args) => Term::new(TermKind::Compound(
                name.clone(),
                args.iter().map(|a| a.rename_vars(f)).collect(),
            )),
            _ => self.strip_spans(),
        }
    }

    /// Copy without position information (raw text of leaves is kept).
    pub fn strip_spans(&self) -> Term {
        Term {
            kind: match &self.kind {
                TermKind::Compound(f, args) => {
                    TermKind::Compound(f.clone(), args.iter().map(Term::strip_spans).collect())
                }
                k => k.clone(),
            },
            span: None,
            name_span: None,
            raw: self.raw.clone(),
        }
    }

    /// Visits the term and all subterms, pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        if let TermKind::Compound(_, args) = &self.kind {
            for a in args {
                a.walk(f);
            }
        }
    }

    /// Elements of a proper or partial list; `None` if not a list cell or `[]`.
    pub fn list_elements(&self) -> Option<(Vec<&Term>, Option<&Term>)> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            match &cur.kind {
                TermKind::Atom(a) if a == "[]" => return Some((items, None)),
                TermKind::Compound(f, args) if f == "." && args.len() == 2 => {
                    items.push(&args[0]);
                    cur = &args[1];
                }
                _ if items.is_empty() => return None,
                _ => return Some((items, Some(cur))),
            }
        }
    }

    pub fn list(items: Vec<Term>, tail: Option<Term>) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail.unwrap_or_else(|| Term::atom("[]")), |acc, t| {
                Term::compound(".", vec![t, acc])
            })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops = super::OperatorTable::default();
        f.write_str(&super::render_term(self, &ops))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_ignores_spans() {
        let a = Term::compound("f", vec![Term::var("X")]).with_span(Span::new(0, 4));
        let b = Term::compound("f", vec![Term::var("X")]);
        assert_eq!(a, b);
    }

    #[test]
    fn list_roundtrip() {
        let l = Term::list(vec![Term::atom("a"), Term::atom("b")], Some(Term::var("T")));
        let (items, tail) = l.list_elements().unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(tail.unwrap().var_name(), Some("T"));
        assert_eq!(Term::atom("[]").list_elements().unwrap().0.len(), 0);
    }

    #[test]
    fn variables_in_first_occurrence_order() {
        let t = Term::compound(
            "f",
            vec![Term::var("B"), Term::var("_"), Term::var("A"), Term::var("B")],
        );
        assert_eq!(t.variables(), vec!["B".to_string(), "A".to_string()]);
        assert_eq!(t.count_var("B"), 2);
    }
}
