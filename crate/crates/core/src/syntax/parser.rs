//! Operator-precedence term reader.

use super::lexer::{integer_value, unquote, Token, TokenKind};
use super::ops::OperatorTable;
use super::term::{Span, Term, TermKind};
use super::SyntaxError;

pub(crate) struct TermParser<'t> {
    tokens: &'t [Token],
    pos: usize,
    ops: &'t OperatorTable,
    /// Inside an argument list: `,` and `|` terminate the term.
    in_args: bool,
}

impl<'t> TermParser<'t> {
    pub(crate) fn new(tokens: &'t [Token], ops: &'t OperatorTable) -> Self {
        TermParser {
            tokens,
            pos: 0,
            ops,
            in_args: false,
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn eof_offset(&self) -> usize {
        self.tokens.last().map_or(0, |t| t.span.end)
    }

    fn error(&self, expected: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => SyntaxError::Syntax {
                span: t.span,
                expected: format!("{expected}, found `{}`", t.text),
            },
            None => SyntaxError::Syntax {
                span: Span::new(self.eof_offset(), self.eof_offset()),
                expected: format!("{expected}, found end of input"),
            },
        }
    }

    fn expect_close(&mut self, c: &str) -> Result<&'t Token, SyntaxError> {
        match self.peek() {
            Some(t) if t.is_close(c) => {
                self.pos += 1;
                Ok(t)
            }
            _ => Err(self.error(&format!("expected `{c}`"))),
        }
    }

    /// Parses a full term terminated by an end token (which is consumed).
    pub(crate) fn read_clause_term(&mut self) -> Result<(Term, Span), SyntaxError> {
        let term = self.parse(1200)?;
        match self.next() {
            Some(t) if t.kind == TokenKind::End => {
                let start = term.span.map_or(t.span.start, |s| s.start);
                Ok((term, Span::new(start, t.span.end)))
            }
            _ => {
                self.pos -= 1;
                Err(self.error("operator or `.`"))
            }
        }
    }

    pub(crate) fn parse(&mut self, max: u16) -> Result<Term, SyntaxError> {
        let (mut left, mut left_prec) = self.parse_primary(max)?;
        loop {
            let Some(tok) = self.peek() else { break };
            if self.in_args && matches!(tok.kind, TokenKind::Comma | TokenKind::Bar) {
                break;
            }
            let name = match tok.kind {
                TokenKind::Atom => tok.text_name(),
                TokenKind::Comma => ",".to_string(),
                TokenKind::Bar => ";".to_string(),
                _ => break,
            };
            if let Some(def) = if tok.kind == TokenKind::Bar {
                Some(super::ops::OpDef {
                    priority: 1100,
                    kind: super::ops::OpType::Xfy,
                })
            } else {
                self.ops.infix(&name)
            } {
                let (lp, rp) = def.infix_arg_priorities();
                if def.priority <= max && left_prec <= lp {
                    self.pos += 1;
                    let right = self.parse(rp)?;
                    let span = join_spans(&left, &right);
                    left = Term::compound(name, vec![left, right]);
                    left.span = span;
                    left_prec = def.priority;
                    continue;
                } else if def.priority > max && self.ops.postfix(&name).is_none() {
                    break;
                }
            }
            if let Some(def) = self.ops.postfix(&name) {
                if def.priority <= max && left_prec <= def.postfix_arg_priority() {
                    self.pos += 1;
                    let span = left.span.map(|s| s.join(tok.span));
                    left = Term::compound(name, vec![left]);
                    left.span = span;
                    left_prec = def.priority;
                    continue;
                }
            }
            break;
        }
        Ok(left)
    }

    /// Parses an argument or list element. Operators above 999 are accepted
    /// unbracketed (as many systems do); `,` and `|` end the argument.
    fn parse_arg(&mut self) -> Result<Term, SyntaxError> {
        let saved = std::mem::replace(&mut self.in_args, true);
        let r = self.parse(1200);
        self.in_args = saved;
        r
    }

    fn parse_nested(&mut self) -> Result<Term, SyntaxError> {
        let saved = std::mem::replace(&mut self.in_args, false);
        let r = self.parse(1200);
        self.in_args = saved;
        r
    }

    fn is_term_start(&self, tok: Option<&Token>) -> bool {
        match tok {
            None => false,
            Some(t) => match t.kind {
                TokenKind::Close | TokenKind::Comma | TokenKind::Bar | TokenKind::End => false,
                TokenKind::Atom => {
                    if t.text.starts_with('\'') {
                        return true;
                    }
                    // an infix-only operator cannot start an operand
                    let name = t.text_name();
                    let functional = self
                        .tokens
                        .get(self.index_of(t) + 1)
                        .is_some_and(|n| n.is_open("(") && !n.layout_before);
                    functional
                        || self.ops.infix(&name).is_none()
                        || self.ops.prefix(&name).is_some()
                }
                _ => true,
            },
        }
    }

    fn index_of(&self, t: &Token) -> usize {
        self.tokens
            .iter()
            .position(|x| std::ptr::eq(x, t))
            .unwrap_or(self.pos)
    }

    fn parse_primary(&mut self, max: u16) -> Result<(Term, u16), SyntaxError> {
        let Some(tok) = self.next() else {
            return Err(self.error("term"));
        };
        let span = tok.span;
        match tok.kind {
            TokenKind::Integer => {
                let v = integer_value(&tok.text).ok_or_else(|| SyntaxError::Syntax {
                    span,
                    expected: "integer in range".into(),
                })?;
                Ok((number_leaf(TermKind::Int(v), tok, span), 0))
            }
            TokenKind::Float => {
                let v: f64 = tok.text.replace('_', "").parse().map_err(|_| SyntaxError::Syntax {
                    span,
                    expected: "float literal".into(),
                })?;
                Ok((number_leaf(TermKind::Float(v), tok, span), 0))
            }
            TokenKind::Variable => Ok((Term::var(tok.text.clone()).with_span(span), 0)),
            TokenKind::String => {
                let v = unquote(&tok.text).map_err(|e| SyntaxError::Syntax {
                    span,
                    expected: format!("valid escape ({e})"),
                })?;
                let mut t = Term::string(v).with_span(span);
                t.raw = Some(tok.text.clone());
                Ok((t, 0))
            }
            TokenKind::Open if tok.text == "(" => {
                let inner = self.parse_nested()?;
                let close = self.expect_close(")")?;
                let mut inner = inner;
                inner.span = Some(Span::new(span.start, close.span.end));
                Ok((inner, 0))
            }
            TokenKind::Open if tok.text == "[" => {
                if let Some(close) = self.peek().filter(|t| t.is_close("]")) {
                    self.pos += 1;
                    let sp = Span::new(span.start, close.span.end);
                    return self.after_name("[]", sp, None, max);
                }
                let mut items = vec![self.parse_arg()?];
                while self.peek().is_some_and(|t| t.kind == TokenKind::Comma) {
                    self.pos += 1;
                    items.push(self.parse_arg()?);
                }
                let tail = if self.peek().is_some_and(|t| t.kind == TokenKind::Bar) {
                    self.pos += 1;
                    Some(self.parse_arg()?)
                } else {
                    None
                };
                let close = self.expect_close("]")?;
                let mut list = build_list(items, tail, close.span.end);
                list.span = Some(Span::new(span.start, close.span.end));
                Ok((list, 0))
            }
            TokenKind::Open => {
                // `{`
                if let Some(close) = self.peek().filter(|t| t.is_close("}")) {
                    self.pos += 1;
                    let sp = Span::new(span.start, close.span.end);
                    return self.after_name("{}", sp, None, max);
                }
                let inner = self.parse_nested()?;
                let close = self.expect_close("}")?;
                let mut t = Term::compound("{}", vec![inner]);
                t.span = Some(Span::new(span.start, close.span.end));
                Ok((t, 0))
            }
            TokenKind::Atom => {
                let name = tok.text_name();
                let raw = tok.text.starts_with('\'').then(|| tok.text.clone());
                if tok.text.starts_with('\'') {
                    unquote(&tok.text).map_err(|e| SyntaxError::Syntax {
                        span,
                        expected: format!("valid escape ({e})"),
                    })?;
                }
                self.after_name(&name, span, raw, max)
            }
            TokenKind::Comma if self.peek().is_some_and(|t| t.is_open("(") && !t.layout_before) => {
                self.after_name(",", span, None, max)
            }
            _ => {
                self.pos -= 1;
                Err(self.error("term"))
            }
        }
    }

    fn after_name(
        &mut self,
        name: &str,
        span: Span,
        raw: Option<String>,
        max: u16,
    ) -> Result<(Term, u16), SyntaxError> {
        let quoted = raw.is_some();
        // functional notation
        if let Some(open) = self.peek() {
            if open.is_open("(") && !open.layout_before {
                self.pos += 1;
                let mut args = vec![self.parse_arg()?];
                while self.peek().is_some_and(|t| t.kind == TokenKind::Comma) {
                    self.pos += 1;
                    args.push(self.parse_arg()?);
                }
                let close = self.expect_close(")")?;
                let mut t = Term::compound(name, args);
                t.span = Some(Span::new(span.start, close.span.end));
                t.name_span = Some(span);
                return Ok((t, 0));
            }
        }
        // negative numeric literal
        if name == "-" && !quoted {
            if let Some(n) = self.peek() {
                if !n.layout_before && matches!(n.kind, TokenKind::Integer | TokenKind::Float) {
                    self.pos += 1;
                    let sp = Span::new(span.start, n.span.end);
                    let kind = if n.kind == TokenKind::Integer {
                        let v = integer_value(&n.text).ok_or_else(|| SyntaxError::Syntax {
                            span: sp,
                            expected: "integer in range".into(),
                        })?;
                        TermKind::Int(-v)
                    } else {
                        TermKind::Float(-n.text.replace('_', "").parse::<f64>().unwrap_or(0.0))
                    };
                    let mut t = Term::new(kind).with_span(sp);
                    t.raw = Some(format!("-{}", n.text));
                    return Ok((t, 0));
                }
            }
        }
        if !quoted {
            if let Some(def) = self.ops.prefix(name) {
                let next = self.peek();
                if self.is_term_start(next) {
                    let mut def = def;
                    if def.priority > max {
                        def.priority = max.min(999);
                        if def.priority == 0 {
                            return Ok((leaf_atom(name, span, raw), 0));
                        }
                    }
                    let save = self.pos;
                    match self.parse(def.prefix_arg_priority()) {
                        Ok(arg) => {
                            let sp = arg.span.map(|s| span.join(s));
                            let mut t = Term::compound(name, vec![arg]);
                            t.span = sp;
                            t.name_span = Some(span);
                            return Ok((t, def.priority));
                        }
                        Err(e) => {
                            // fall back to reading the operator as an atom
                            self.pos = save;
                            if self.is_term_start(self.peek()) {
                                return Err(e);
                            }
                        }
                    }
                }
                return Ok((leaf_atom(name, span, raw), 0));
            }
        }
        Ok((leaf_atom(name, span, raw), 0))
    }
}

fn leaf_atom(name: &str, span: Span, raw: Option<String>) -> Term {
    let mut t = Term::atom(name).with_span(span);
    t.name_span = Some(span);
    t.raw = raw;
    t
}

fn number_leaf(kind: TermKind, tok: &Token, span: Span) -> Term {
    let mut t = Term::new(kind).with_span(span);
    t.raw = Some(tok.text.clone());
    t
}

fn join_spans(a: &Term, b: &Term) -> Option<Span> {
    match (a.span, b.span) {
        (Some(x), Some(y)) => Some(x.join(y)),
        _ => None,
    }
}

fn build_list(items: Vec<Term>, tail: Option<Term>, end: usize) -> Term {
    let mut acc = tail.unwrap_or_else(|| Term::atom("[]"));
    for item in items.into_iter().rev() {
        let start = item.span.map_or(end, |s| s.start);
        acc = Term::compound(".", vec![item, acc]).with_span(Span::new(start, end));
    }
    acc
}

impl Token {
    /// Atom name of an atom token, unquoting quoted atoms.
    pub fn text_name(&self) -> String {
        if self.text.starts_with('\'') {
            unquote(&self.text).unwrap_or_else(|_| self.text.clone())
        } else {
            self.text.clone()
        }
    }
}
