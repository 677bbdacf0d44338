//! Reference SLD interpreter for a Prolog subset: depth-first, leftmost
//! selection, textual clause order, ISO cut and if-then-else.

mod engine;
mod store;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::Program;
use crate::syntax::{parse_program, parse_term, Item, OperatorTable, SyntaxError, Term};

pub use engine::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: u64,
    pub max_answers: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: 100_000,
            max_answers: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub module: String,
    pub goal: Term,
    /// Named variables reported in answers, in order of first occurrence.
    pub vars: Vec<String>,
}

impl Query {
    pub fn new(module: &str, goal: Term) -> Query {
        let vars = goal
            .variables()
            .into_iter()
            .filter(|v| !v.starts_with('_'))
            .collect();
        Query {
            module: module.to_string(),
            goal,
            vars,
        }
    }

    /// Parses `Goal`, `Goal.` or `?- Goal.`; `M:Goal` sets the module.
    pub fn parse(text: &str) -> Result<Query, SyntaxError> {
        let t = parse_term(text.trim(), &OperatorTable::default())?;
        let t = if t.is_functor("?-", 1) { t.args()[0].clone() } else { t };
        if t.is_functor(":", 2) {
            if let Some(m) = t.args()[0].atom_name() {
                return Ok(Query::new(m, t.args()[1].clone()));
            }
        }
        Ok(Query::new("user", t))
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = crate::syntax::render_term(&self.goal, &OperatorTable::default());
        if self.module == "user" {
            write!(f, "?- {g}.")
        } else {
            write!(f, "?- {}:{g}.", self.module)
        }
    }
}

/// Reads a query battery: one `?- Goal.` per line; blank lines and `%`
/// comments are skipped.
pub fn parse_battery(text: &str) -> Result<Vec<Query>, SyntaxError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'))
        .map(Query::parse)
        .collect()
}

/// Values bound to the query's named variables, in query order.
pub type Answer = Vec<(String, Term)>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "error", rename_all = "snake_case")]
pub enum Terminal {
    Exhausted,
    /// Stopped at the step or answer limit.
    DepthLimited,
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub answers: Vec<Answer>,
    pub terminal: Terminal,
    pub steps: u64,
}

impl Outcome {
    /// Answers with variables renamed canonically so that outcomes can be
    /// compared modulo variable naming.
    pub fn canonical_answers(&self) -> Vec<Answer> {
        self.answers.iter().map(|a| canonical_answer(a)).collect()
    }
}

fn canonical_answer(a: &Answer) -> Answer {
    let mut names: HashMap<String, String> = HashMap::new();
    a.iter()
        .map(|(v, t)| {
            let t = t.rename_vars(&mut |n| {
                let k = names.len();
                names.entry(n.to_string()).or_insert_with(|| format!("_{k}")).clone()
            });
            (v.clone(), t)
        })
        .collect()
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops = OperatorTable::default();
        for a in &self.answers {
            if a.is_empty() {
                writeln!(f, "true")?;
            } else {
                let parts: Vec<String> = a
                    .iter()
                    .map(|(v, t)| format!("{v} = {}", crate::syntax::render_term_at(t, &ops, 699)))
                    .collect();
                writeln!(f, "{}", parts.join(", "))?;
            }
        }
        match &self.terminal {
            Terminal::Exhausted if self.answers.is_empty() => write!(f, "false"),
            Terminal::Exhausted => write!(f, "(no more answers)"),
            Terminal::DepthLimited => write!(f, "(limit reached after {} steps)", self.steps),
            Terminal::Error(e) => write!(f, "error: {e}"),
        }
    }
}

/// Fact tables standing in for builtins the interpreter does not implement.
#[derive(Debug, Clone, Default)]
pub struct Stubs {
    pub(crate) facts: HashMap<(String, usize), Vec<Term>>,
}

#[derive(Debug, Error)]
pub enum StubError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("stub tables may only contain facts")]
    NotAFact,
}

impl Stubs {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses a fact table, e.g. `read(s0, hello). read(s1, end_of_file).`
    pub fn parse(text: &str) -> Result<Stubs, StubError> {
        let f = parse_program("stubs", text, &mut OperatorTable::default())?;
        let mut s = Stubs::new();
        for it in &f.items {
            match it {
                Item::Clause(c) if c.is_fact() => s.add(c.head.clone()),
                _ => return Err(StubError::NotAFact),
            }
        }
        Ok(s)
    }

    pub fn add(&mut self, fact: Term) {
        if let Some((n, a)) = fact.functor() {
            self.facts.entry((n.to_string(), a)).or_default().push(fact.strip_spans());
        }
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equal,
    /// Both sides hit a limit and the shorter answer list is a prefix of the longer.
    EqualWithinLimit,
    Different(String),
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        !matches!(self, Verdict::Different(_))
    }
}

/// Compares two outcomes modulo variable renaming.
pub fn compare_outcomes(a: &Outcome, b: &Outcome) -> Verdict {
    let xa = a.canonical_answers();
    let xb = b.canonical_answers();
    if a.terminal == Terminal::DepthLimited && b.terminal == Terminal::DepthLimited {
        let n = xa.len().min(xb.len());
        return if xa[..n] == xb[..n] {
            Verdict::EqualWithinLimit
        } else {
            Verdict::Different("answers differ before the limit".into())
        };
    }
    if a.terminal != b.terminal {
        return Verdict::Different(format!("terminal {:?} vs {:?}", a.terminal, b.terminal));
    }
    if xa != xb {
        return Verdict::Different(format!("{} vs {} answers, or different bindings", xa.len(), xb.len()));
    }
    Verdict::Equal
}

/// Runs every query on both programs and compares the outcomes.
pub fn equivalent(
    a: &Program,
    b: &Program,
    queries: &[Query],
    limits: Limits,
    stubs: &Stubs,
) -> Vec<Verdict> {
    queries
        .iter()
        .map(|q| compare_outcomes(&solve(a, q, limits, stubs), &solve(b, q, limits, stubs)))
        .collect()
}

#[cfg(test)]
mod tests;
