//! Term and clause printing with minimal parentheses.
//!
//! Every rendering re-reads to a structurally identical term under the same
//! operator table.

use super::goal::{Clause, Goal, GoalKind};
use super::lexer::{is_alnum, is_symbol_char};
use super::ops::OperatorTable;
use super::term::{Term, TermKind};

/// Layout options for clause bodies.
#[derive(Debug, Clone)]
pub struct RenderStyle {
    /// Indentation of body goals and branch contents.
    pub indent: usize,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle { indent: 8 }
    }
}

pub fn render_term(t: &Term, ops: &OperatorTable) -> String {
    render_term_at(t, ops, 1200)
}

/// Renders `t` so that it reads back correctly in a context of priority `max`.
pub fn render_term_at(t: &Term, ops: &OperatorTable, max: u16) -> String {
    Printer { ops }.term(t, max)
}

struct Printer<'a> {
    ops: &'a OperatorTable,
}

impl Printer<'_> {
    fn term(&self, t: &Term, max: u16) -> String {
        match &t.kind {
            TermKind::Var(v) => v.clone(),
            TermKind::Int(i) => match &t.raw {
                Some(r) => r.clone(),
                None => i.to_string(),
            },
            TermKind::Float(f) => match &t.raw {
                Some(r) => r.clone(),
                None => format_float(*f),
            },
            TermKind::Str(s) => match &t.raw {
                Some(r) => r.clone(),
                None => quote(s, '"'),
            },
            TermKind::Atom(a) => {
                let text = match &t.raw {
                    Some(r) if r.starts_with('\'') => r.clone(),
                    _ => atom_text(a),
                };
                if max < 1200 && self.ops.is_op(a) && t.raw.is_none() && !is_solo(a) {
                    format!("({text})")
                } else {
                    text
                }
            }
            TermKind::Compound(f, args) => self.compound(f, args, max),
        }
    }

    /// Operator atoms written as canonical arguments or list elements need
    /// no brackets.
    fn arg(&self, t: &Term) -> String {
        match &t.kind {
            TermKind::Atom(a) if self.ops.is_op(a) => match &t.raw {
                Some(r) if r.starts_with('\'') => r.clone(),
                _ => atom_text(a),
            },
            _ => self.term(t, 999),
        }
    }

    fn compound(&self, f: &str, args: &[Term], max: u16) -> String {
        if f == "." && args.len() == 2 {
            return self.list(args);
        }
        if f == "{}" && args.len() == 1 {
            return format!("{{{}}}", self.term(&args[0], 1200));
        }
        if args.len() == 2 {
            if let Some(def) = self.ops.infix(f) {
                let (lp, rp) = def.infix_arg_priorities();
                let left = self.term(&args[0], lp);
                let right = self.term(&args[1], rp);
                let op = if f == "," { ",".to_string() } else { atom_text(f) };
                let spaced = f != ","
                    && (def.priority >= 700 || op.chars().next().is_some_and(is_alnum))
                    && f != ":";
                let s = if spaced {
                    format!("{left} {op} {right}")
                } else {
                    glue(&glue(&left, &op), &right)
                };
                return wrap(s, def.priority > max);
            }
        }
        if args.len() == 1 {
            if let Some(def) = self.ops.prefix(f) {
                {
                    let arg = self.term(&args[0], def.prefix_arg_priority());
                    let op = atom_text(f);
                    let needs_space = arg.starts_with('(')
                        || op.chars().last().is_some_and(is_alnum)
                        || f == "\\+"
                        || ((f == "-" || f == "+") && is_number(&args[0]));
                    let s = if needs_space {
                        format!("{op} {arg}")
                    } else {
                        glue(&op, &arg)
                    };
                    return wrap(s, def.priority > max);
                }
            }
            if let Some(def) = self.ops.postfix(f) {
                let arg = self.term(&args[0], def.postfix_arg_priority());
                return wrap(glue(&arg, &atom_text(f)), def.priority > max);
            }
        }
        let args: Vec<String> = args.iter().map(|a| self.arg(a)).collect();
        format!("{}({})", atom_text(f), args.join(","))
    }

    fn list(&self, args: &[Term]) -> String {
        let mut items = vec![self.arg(&args[0])];
        let mut tail = &args[1];
        loop {
            match &tail.kind {
                TermKind::Compound(f, a) if f == "." && a.len() == 2 => {
                    items.push(self.arg(&a[0]));
                    tail = &a[1];
                }
                TermKind::Atom(a) if a == "[]" => return format!("[{}]", items.join(",")),
                _ => return format!("[{}|{}]", items.join(","), self.arg(tail)),
            }
        }
    }
}

fn is_number(t: &Term) -> bool {
    matches!(t.kind, TermKind::Int(_) | TermKind::Float(_))
}

fn wrap(s: String, paren: bool) -> String {
    if paren {
        format!("({s})")
    } else {
        s
    }
}

/// Concatenates two token strings, inserting a space where they would
/// otherwise lex as one token.
fn glue(a: &str, b: &str) -> String {
    let (Some(x), Some(y)) = (a.chars().last(), b.chars().next()) else {
        return format!("{a}{b}");
    };
    let clash = (is_symbol_char(x) && is_symbol_char(y))
        || (is_alnum(x) && is_alnum(y))
        || (is_alnum(x) && y == '(')
        || (x == '0' && y == '\'');
    if clash {
        format!("{a} {b}")
    } else {
        format!("{a}{b}")
    }
}

fn is_solo(a: &str) -> bool {
    matches!(a, "[]" | "{}" | "!" | ";")
}

fn format_float(f: f64) -> String {
    let s = format!("{f:?}");
    if s.contains('.') || s.contains("inf") || s.contains("NaN") {
        s
    } else if let Some(i) = s.find('e') {
        format!("{}.0{}", &s[..i], &s[i..])
    } else {
        format!("{s}.0")
    }
}

/// Atom text, quoted when necessary.
pub fn atom_text(a: &str) -> String {
    if needs_quotes(a) {
        quote(a, '\'')
    } else {
        a.to_string()
    }
}

fn needs_quotes(a: &str) -> bool {
    if is_solo(a) {
        return false;
    }
    let mut chars = a.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_lowercase() => !a.chars().all(is_alnum),
        Some(c) if is_symbol_char(c) => {
            !a.chars().all(is_symbol_char) || a == "." || a.starts_with("/*")
        }
        _ => true,
    }
}

fn quote(s: &str, q: char) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push(q);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if c == q => {
                out.push('\\');
                out.push(c)
            }
            c => out.push(c),
        }
    }
    out.push(q);
    out
}

/// Renders a clause: facts as `head.`, rules with one goal per line.
pub fn render_clause(c: &Clause, ops: &OperatorTable, style: &RenderStyle) -> String {
    let head = render_term_at(&c.head, ops, 1199);
    if c.body.is_true() {
        return format!("{head}.");
    }
    format!("{head} :-\n{}.", render_goal(&c.body, ops, style, style.indent))
}

/// Renders a goal tree as body text; every line is indented by `indent`.
pub fn render_goal(g: &Goal, ops: &OperatorTable, style: &RenderStyle, indent: usize) -> String {
    GoalPrinter { ops, style }.lines(g, indent).join("\n")
}

struct GoalPrinter<'a> {
    ops: &'a OperatorTable,
    style: &'a RenderStyle,
}

impl GoalPrinter<'_> {
    fn lines(&self, g: &Goal, ind: usize) -> Vec<String> {
        // right spine of the conjunction only, to keep the tree shape
        let mut parts = Vec::new();
        let mut cur = g;
        while let GoalKind::Conj(a, b) = &cur.kind {
            parts.push(a.as_ref());
            cur = b;
        }
        parts.push(cur);
        let mut out = Vec::new();
        let n = parts.len();
        for (i, p) in parts.into_iter().enumerate() {
            let mut block = self.single(p, ind);
            if i + 1 < n {
                if let Some(last) = block.last_mut() {
                    last.push(',');
                }
            }
            out.extend(block);
        }
        out
    }

    fn single(&self, g: &Goal, ind: usize) -> Vec<String> {
        let pad = " ".repeat(ind);
        let step = self.style.indent;
        match &g.kind {
            GoalKind::IfThenElse {
                cond,
                then,
                else_,
                implicit_else,
            } => {
                let mut out = Vec::new();
                let cond_lines = self.lines(cond, ind + 2);
                for (i, l) in cond_lines.iter().enumerate() {
                    let body = &l[ind + 2..];
                    let line = if i == 0 {
                        format!("{pad}( {body}")
                    } else {
                        l.clone()
                    };
                    out.push(line);
                }
                if let Some(last) = out.last_mut() {
                    last.push_str(" ->");
                }
                out.extend(self.lines(then, ind + step));
                if !implicit_else {
                    out.push(format!("{pad};"));
                    out.extend(self.branch(else_, ind));
                }
                out.push(format!("{pad})"));
                out
            }
            GoalKind::Disj(a, b) => {
                let mut out = vec![format!("{pad}(")];
                out.extend(self.lines(a, ind + step));
                out.push(format!("{pad};"));
                out.extend(self.branch(b, ind));
                out.push(format!("{pad})"));
                out
            }
            GoalKind::Conj(..) => {
                vec![format!("{pad}({})", render_term_at(&g.to_term(), self.ops, 1200))]
            }
            GoalKind::Cut => vec![format!("{pad}!")],
            GoalKind::Naf(_) | GoalKind::Call(_) => {
                let t = match &g.kind {
                    GoalKind::Call(t) => t.clone(),
                    _ => g.to_term(),
                };
                vec![format!("{pad}{}", render_term_at(&t, self.ops, 999))]
            }
        }
    }

    /// Else-branch lines; a trailing plain disjunction is flattened.
    fn branch(&self, g: &Goal, ind: usize) -> Vec<String> {
        let step = self.style.indent;
        if let GoalKind::Disj(a, b) = &g.kind {
            let pad = " ".repeat(ind);
            let mut out = self.lines(a, ind + step);
            out.push(format!("{pad};"));
            out.extend(self.branch(b, ind));
            return out;
        }
        self.lines(g, ind + step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_term};

    fn ops() -> OperatorTable {
        OperatorTable::default()
    }

    fn rt(src: &str) {
        let o = ops();
        let t = parse_term(src, &o).unwrap();
        let out = render_term(&t, &o);
        let back = parse_term(&out, &o).unwrap_or_else(|e| panic!("{src} -> {out}: {e}"));
        assert_eq!(back, t, "{src} -> {out}");
    }

    #[test]
    fn arithmetic_minimal_parens() {
        let t = Term::compound(
            "+",
            vec![Term::int(1), Term::compound("*", vec![Term::int(2), Term::int(3)])],
        );
        assert_eq!(render_term(&t, &ops()), "1+2*3");
        let t = parse_term("(1+2)*3", &ops()).unwrap();
        assert_eq!(render_term(&t, &ops()), "(1+2)*3");
        assert_eq!(render_term(&parse_term("a-(b-c)", &ops()).unwrap(), &ops()), "a-(b-c)");
        assert_eq!(render_term(&parse_term("a-b-c", &ops()).unwrap(), &ops()), "a-b-c");
    }

    #[test]
    fn atoms() {
        assert_eq!(render_term(&Term::atom("[]"), &ops()), "[]");
        assert_eq!(render_term(&Term::atom("hello world"), &ops()), "'hello world'");
        assert_eq!(render_term(&Term::atom("it's"), &ops()), "'it\\'s'");
        assert_eq!(render_term(&Term::atom(","), &ops()), "','");
    }

    #[test]
    fn roundtrips() {
        for s in [
            "f(a,B,\"str\",1.5,-3)",
            "- 1",
            "-(-(1))",
            "- (-1)",
            "1 - -1",
            "a- (-1)",
            "- a",
            "-(a+b)",
            "\\+ \\+ a",
            "X = \\+ a",
            "[a,b|T]",
            "[-,+]",
            "f(-)",
            "X = (-)",
            "- - a",
            "f((a:-b))",
            "f((a,b))",
            "{a,b}",
            "(a :- b, c ; d -> e)",
            "X is Y mod 2",
            "m:p(X)",
            "'hello world'(x)",
            "a=b",
            "p :- \\+ (a, b)",
            "f(;, '|', '[]')",
            "2 ** -1",
            "- (1)",
            "1.0e10",
            "0'a",
            "dynamic foo/1",
            "f(a;b)",
            "[(a:-b)]",
        ] {
            rt(s);
        }
    }

    #[test]
    fn fact_and_rule_layout() {
        let o = ops();
        let f = parse_program(
            "t.pl",
            "reader_done(end_of_file).\np(X) :- true.\nq(X) :- a(X), b(X).",
            &mut o.clone(),
        )
        .unwrap();
        let style = RenderStyle::default();
        let r: Vec<String> = f.clauses().map(|c| render_clause(c, &o, &style)).collect();
        assert_eq!(r[0], "reader_done(end_of_file).");
        assert_eq!(r[1], "p(X).");
        assert_eq!(r[2], "q(X) :-\n        a(X),\n        b(X).");
    }

    #[test]
    fn ite_layout_matches_listing_style() {
        let o = ops();
        let src = "reader_code(Term,Stream,State) :- ( Term = end_of_file, State = end_of_file -> true ; State = read(Term,Stream,Position), stream_position(Stream,Position) ).";
        let f = parse_program("t.pl", src, &mut o.clone()).unwrap();
        let c = f.clauses().next().unwrap();
        let out = render_clause(c, &o, &RenderStyle::default());
        let expected = "\
reader_code(Term,Stream,State) :-
        ( Term = end_of_file,
          State = end_of_file ->
                true
        ;
                State = read(Term,Stream,Position),
                stream_position(Stream,Position)
        ).";
        assert_eq!(out, expected);
        let back = parse_program("t.pl", &out, &mut o.clone()).unwrap();
        assert_eq!(back.clauses().next().unwrap(), c);
    }

    #[test]
    fn nested_control_roundtrip() {
        let o = ops();
        for src in [
            "p :- (a ; b ; c).",
            "p :- (a -> b ; c -> d ; e).",
            "p :- (a, b), c.",
            "p :- (a -> b).",
            "p :- ((a ; b) -> c ; d), e.",
            "p :- \\+ (a, b), !, (x ; y -> z ; w).",
            "p :- ( (a -> b) ; c ).",
        ] {
            let f = parse_program("t.pl", src, &mut o.clone()).unwrap();
            let c = f.clauses().next().unwrap();
            let out = render_clause(c, &o, &RenderStyle::default());
            let back = parse_program("t.pl", &out, &mut o.clone()).unwrap();
            assert_eq!(back.clauses().next().unwrap(), c, "{src}\n{out}");
        }
    }
}
