//! Prolog source: tokens, terms, clauses and rendering.

mod goal;
pub mod lexer;
mod ops;
mod parser;
mod render;
mod term;

use thiserror::Error;

pub use goal::{Clause, Goal, GoalKind};
pub use lexer::{tokenize, tokenize_with_comments, Comment, Token, TokenKind};
pub use ops::{OpDef, OpType, OperatorTable};
pub use render::{atom_text, render_clause, render_goal, render_term, render_term_at, RenderStyle};
pub use term::{Span, Term, TermKind};

use parser::TermParser;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("unterminated quoted text starting at byte {offset}")]
    UnterminatedString { offset: usize },
    #[error("unterminated block comment starting at byte {offset}")]
    UnterminatedBlockComment { offset: usize },
    #[error("illegal character {ch:?} at byte {offset}")]
    IllegalCharacter { offset: usize, ch: char },
    #[error("syntax error at {span}: {expected}")]
    Syntax { span: Span, expected: String },
    #[error("operator priority clash at {span}")]
    OperatorClash { span: Span },
}

impl SyntaxError {
    pub fn offset(&self) -> usize {
        match self {
            SyntaxError::UnterminatedString { offset }
            | SyntaxError::UnterminatedBlockComment { offset }
            | SyntaxError::IllegalCharacter { offset, .. } => *offset,
            SyntaxError::Syntax { span, .. } | SyntaxError::OperatorClash { span } => span.start,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Item {
    Directive { term: Term, span: Span },
    Clause(Clause),
}

/// Structural, like `Clause` and `Term`: spans are ignored.
impl PartialEq for Item {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Item::Directive { term: a, .. }, Item::Directive { term: b, .. }) => a == b,
            (Item::Clause(a), Item::Clause(b)) => a == b,
            _ => false,
        }
    }
}

impl Item {
    pub fn span(&self) -> Span {
        match self {
            Item::Directive { span, .. } => *span,
            Item::Clause(c) => c.span,
        }
    }

    pub fn as_clause(&self) -> Option<&Clause> {
        match self {
            Item::Clause(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_directive(&self) -> Option<&Term> {
        match self {
            Item::Directive { term, .. } => Some(term),
            _ => None,
        }
    }
}

/// A parsed source file. Item spans are disjoint, ordered, and each ends at
/// the terminating `.` of its item.
#[derive(Debug, Clone)]
pub struct ParsedFile {
    pub path: String,
    pub text: String,
    pub items: Vec<Item>,
    pub comments: Vec<Comment>,
}

impl ParsedFile {
    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.items.iter().filter_map(Item::as_clause)
    }

    pub fn directives(&self) -> impl Iterator<Item = (&Term, Span)> {
        self.items.iter().filter_map(|i| match i {
            Item::Directive { term, span } => Some((term, *span)),
            _ => None,
        })
    }
}

/// Parses a whole file. `:- op/3` directives update `ops` for subsequent items.
pub fn parse_program(
    path: &str,
    text: &str,
    ops: &mut OperatorTable,
) -> Result<ParsedFile, SyntaxError> {
    let (tokens, comments) = tokenize_with_comments(text)?;
    let mut items = Vec::new();
    let mut start = 0;
    while start < tokens.len() {
        let end = tokens[start..]
            .iter()
            .position(|t| t.kind == TokenKind::End)
            .map(|i| start + i + 1)
            .ok_or_else(|| SyntaxError::Syntax {
                span: Span::new(tokens[start].span.start, text.len()),
                expected: "clause terminated by `.`".into(),
            })?;
        let slice = &tokens[start..end];
        let mut p = TermParser::new(slice, ops);
        let (term, span) = p.read_clause_term()?;
        let span = Span::new(slice[0].span.start, span.end);
        if term.is_functor(":-", 1) || term.is_functor("?-", 1) {
            let body = term.args()[0].clone();
            apply_op_directive(&body, ops);
            items.push(Item::Directive { term: body, span });
        } else {
            items.push(Item::Clause(Clause::from_term(&term, span)));
        }
        start = end;
    }
    Ok(ParsedFile {
        path: path.to_string(),
        text: text.to_string(),
        items,
        comments,
    })
}

fn apply_op_directive(directive: &Term, ops: &mut OperatorTable) {
    let mut goals = vec![directive];
    while let Some(g) = goals.pop() {
        if g.is_functor(",", 2) {
            goals.extend(g.args().iter());
            continue;
        }
        if !g.is_functor("op", 3) {
            continue;
        }
        let a = g.args();
        let (TermKind::Int(p), Some(kind)) = (&a[0].kind, a[1].atom_name()) else {
            continue;
        };
        let Ok(kind) = kind.parse::<OpType>() else { continue };
        let names: Vec<&Term> = match a[2].list_elements() {
            Some((items, None)) => items,
            _ => vec![&a[2]],
        };
        for n in names {
            if let Some(name) = n.atom_name() {
                ops.add(name, (*p).clamp(0, 1200) as u16, kind);
            }
        }
    }
}

/// Parses a single term, optionally followed by `.`.
pub fn parse_term(text: &str, ops: &OperatorTable) -> Result<Term, SyntaxError> {
    let mut tokens = tokenize(text)?;
    if tokens.last().is_some_and(|t| t.kind == TokenKind::End) {
        tokens.pop();
    }
    let mut p = TermParser::new(&tokens, ops);
    let t = p.parse(1200)?;
    if !p.at_end() {
        let tok = &tokens[tokens.len() - 1];
        return Err(SyntaxError::Syntax {
            span: tok.span,
            expected: "end of term".into(),
        });
    }
    Ok(t)
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Byte offset of a 1-based line and column, if it lies within `text`.
pub fn offset_of(text: &str, line: usize, col: usize) -> Option<usize> {
    let mut start = 0;
    for _ in 1..line {
        start += text[start..].find('\n')? + 1;
    }
    let line_text = text[start..].split('\n').next().unwrap_or("");
    if col == 0 {
        return None;
    }
    let mut chars = line_text.char_indices();
    match chars.nth(col - 1) {
        Some((i, _)) => Some(start + i),
        None if col - 1 == line_text.chars().count() => Some(start + line_text.len()),
        None => None,
    }
}

/// Renders a parsed clause item back to text.
pub fn render_item(item: &Item, ops: &OperatorTable, style: &RenderStyle) -> String {
    match item {
        Item::Directive { term, .. } => {
            format!(":- {}.", render_term_at(term, ops, 1199))
        }
        Item::Clause(c) => render_clause(c, ops, style),
    }
}
