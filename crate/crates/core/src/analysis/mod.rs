//! Detection of refactoring opportunities. Every analysis is a read-only
//! function of a program snapshot; `all_suggestions` gathers them into
//! `Suggestion` records with ids that are stable across reloads.

mod dup;
mod far;
mod seq;
mod smells;
mod usage;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{ClauseRef, PredId, Program};
use crate::syntax::{Span, Term};

pub use dup::duplicate_groups;
pub use far::far;
pub use seq::{common_sequences, Occurrence, SequenceCandidate};
pub(crate) use seq::shared_vars;
pub use smells::clause_smells;
pub use usage::{dead_predicates, hideable_exports, unused_imports, HideableExport, UnusedImport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("no roots configured: add a [roots] section to the manifest")]
    NoRootsConfigured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuggestionKind {
    DeadCode,
    DuplicateGroup,
    CommonSequence,
    RedundantArgs,
    UnusedImport,
    HideableExport,
    CutReplaceable,
    UnificationAsTest,
    OutputBeforeCommit,
    InvertibleIte,
}

impl SuggestionKind {
    pub const ALL: [SuggestionKind; 10] = [
        SuggestionKind::DeadCode,
        SuggestionKind::DuplicateGroup,
        SuggestionKind::CommonSequence,
        SuggestionKind::RedundantArgs,
        SuggestionKind::UnusedImport,
        SuggestionKind::HideableExport,
        SuggestionKind::CutReplaceable,
        SuggestionKind::UnificationAsTest,
        SuggestionKind::OutputBeforeCommit,
        SuggestionKind::InvertibleIte,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuggestionKind::DeadCode => "dead-code",
            SuggestionKind::DuplicateGroup => "duplicate-group",
            SuggestionKind::CommonSequence => "common-sequence",
            SuggestionKind::RedundantArgs => "redundant-args",
            SuggestionKind::UnusedImport => "unused-import",
            SuggestionKind::HideableExport => "hideable-export",
            SuggestionKind::CutReplaceable => "cut-replaceable",
            SuggestionKind::UnificationAsTest => "unification-as-test",
            SuggestionKind::OutputBeforeCommit => "output-before-commit",
            SuggestionKind::InvertibleIte => "invertible-ite",
        }
    }

    pub fn parse(s: &str) -> Option<SuggestionKind> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for SuggestionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A source range in a project file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    pub start: usize,
    pub end: usize,
}

impl Location {
    pub fn new(program: &Program, file: usize, span: Span) -> Location {
        Location {
            file: program.files[file].path.clone(),
            start: span.start,
            end: span.end,
        }
    }

    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

/// An argument position, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArgPos {
    pub pred: PredId,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Suggestion {
    pub id: String,
    pub kind: SuggestionKind,
    pub module: String,
    pub target: String,
    pub span: Option<Location>,
    pub explanation: String,
    pub payload: serde_json::Value,
}

impl Suggestion {
    /// `key` identifies the targets independently of byte offsets.
    pub fn new(
        kind: SuggestionKind,
        key: &str,
        module: &str,
        target: String,
        span: Option<Location>,
        explanation: String,
        payload: serde_json::Value,
    ) -> Suggestion {
        Suggestion {
            id: suggestion_id(kind, key),
            kind,
            module: module.to_string(),
            target,
            span,
            explanation,
            payload,
        }
    }
}

pub fn suggestion_id(kind: SuggestionKind, key: &str) -> String {
    let mut h = Sha256::new();
    h.update(kind.as_str().as_bytes());
    h.update([0u8]);
    h.update(key.as_bytes());
    let digest = h.finalize();
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

/// Every analysis as suggestions, ordered by kind and then location.
/// Dead-code suggestions are only produced when roots are configured.
pub fn all_suggestions(program: &Program) -> Vec<Suggestion> {
    let mut out = Vec::new();
    if let Ok(dead) = dead_predicates(program) {
        for p in dead {
            out.push(usage::dead_suggestion(program, &p));
        }
    }
    for g in duplicate_groups(program) {
        out.push(dup::group_suggestion(program, &g));
    }
    for c in common_sequences(program, 2, 2) {
        out.push(c.suggestion(program));
    }
    out.extend(far::suggestions(program, &far(program)));
    for u in unused_imports(program) {
        out.push(u.suggestion());
    }
    for h in hideable_exports(program) {
        out.push(h.suggestion(program));
    }
    out.extend(clause_smells(program));
    sort_suggestions(program, &mut out);
    out
}

pub(crate) fn sort_suggestions(program: &Program, out: &mut Vec<Suggestion>) {
    let file_order: HashMap<&str, usize> = program
        .files
        .iter()
        .enumerate()
        .map(|(i, f)| (f.path.as_str(), i))
        .collect();
    let key = |s: &Suggestion| {
        let loc = s
            .span
            .as_ref()
            .map(|l| (file_order.get(l.file.as_str()).copied().unwrap_or(usize::MAX), l.start))
            .unwrap_or((usize::MAX, 0));
        (s.kind, loc, s.target.clone())
    };
    out.sort_by_key(key);
    out.dedup_by(|a, b| a.id == b.id);
}

/// Renames variables to `_0`, `_1`, ... in order of first occurrence across
/// the list; anonymous variables stay anonymous.
pub fn alpha_normal(terms: &[Term]) -> Vec<Term> {
    let mut names: HashMap<String, String> = HashMap::new();
    let mut n = 0usize;
    terms
        .iter()
        .map(|t| {
            t.strip_spans().rename_vars(&mut |v| {
                names
                    .entry(v.to_string())
                    .or_insert_with(|| {
                        n += 1;
                        format!("_{}", n - 1)
                    })
                    .clone()
            })
        })
        .collect()
}

/// 1-based index of a clause among its predicate's clauses.
pub fn clause_ordinal(program: &Program, c: ClauseRef) -> usize {
    let p = program.clause_pred(c);
    program
        .pred(&p)
        .and_then(|d| d.clauses.iter().position(|&x| x == c))
        .map_or(0, |i| i + 1)
}

#[cfg(test)]
mod tests;
