//! Edit sets: byte-range replacements plus file operations, with conflict
//! checking, unified diffs, and atomic application.

mod apply;
mod diff;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Program;
use crate::syntax::Span;

pub use apply::{apply, apply_and_reload, ApplyReport, Fs, RealFs, BACKUP_DIR, LOCK_FILE};
pub use diff::unified_diff;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextEdit {
    pub file: String,
    pub start: usize,
    pub end: usize,
    pub replacement: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl TextEdit {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }

    fn label(&self) -> String {
        match &self.note {
            Some(n) => format!("{} ({}@{}..{})", n, self.file, self.start, self.end),
            None => format!("{}@{}..{}", self.file, self.start, self.end),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum FileOp {
    Create { path: String, text: String },
    Delete { path: String },
    Rename { from: String, to: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SemanticsFlag {
    #[default]
    Preserving,
    Conditional,
    Changing,
}

impl SemanticsFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            SemanticsFlag::Preserving => "preserving",
            SemanticsFlag::Conditional => "conditional",
            SemanticsFlag::Changing => "changing",
        }
    }

    /// The stronger of two flags.
    pub fn max(self, other: SemanticsFlag) -> SemanticsFlag {
        std::cmp::max_by_key(self, other, |f| *f as u8)
    }
}

impl fmt::Display for SemanticsFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Edits computed against one program version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct EditSet {
    pub version: u64,
    pub edits: Vec<TextEdit>,
    pub file_ops: Vec<FileOp>,
    pub annotations: Vec<String>,
    pub semantics: SemanticsFlag,
}

impl EditSet {
    pub fn new(version: u64) -> Self {
        EditSet {
            version,
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty() && self.file_ops.is_empty()
    }

    pub fn replace(&mut self, file: &str, span: Span, text: impl Into<String>) {
        self.edits.push(TextEdit {
            file: file.to_string(),
            start: span.start,
            end: span.end,
            replacement: text.into(),
            note: None,
        });
    }

    pub fn replace_noted(&mut self, file: &str, span: Span, text: impl Into<String>, note: &str) {
        self.replace(file, span, text);
        if let Some(e) = self.edits.last_mut() {
            e.note = Some(note.to_string());
        }
    }

    pub fn insert(&mut self, file: &str, offset: usize, text: impl Into<String>) {
        self.replace(file, Span::new(offset, offset), text);
    }

    pub fn delete(&mut self, file: &str, span: Span) {
        self.replace(file, span, "");
    }

    pub fn annotate(&mut self, note: impl Into<String>) {
        let note = note.into();
        if !self.annotations.contains(&note) {
            self.annotations.push(note);
        }
    }

    pub fn flag(&mut self, f: SemanticsFlag) {
        self.semantics = self.semantics.max(f);
    }

    /// Sorts edits by file and position (stable, so insertions at the same
    /// offset keep their order) and drops exact duplicates.
    pub fn normalize(&mut self) {
        self.edits
            .sort_by(|a, b| (&a.file, a.start, a.end).cmp(&(&b.file, b.start, b.end)));
        self.edits.dedup_by(|b, a| a.file == b.file && a.start == b.start && a.end == b.end && a.replacement == b.replacement && a.start != a.end);
    }

    pub fn files_touched(&self) -> Vec<String> {
        let mut out: Vec<String> = self.edits.iter().map(|e| e.file.clone()).collect();
        for op in &self.file_ops {
            match op {
                FileOp::Create { path, .. } | FileOp::Delete { path } => out.push(path.clone()),
                FileOp::Rename { from, to } => {
                    out.push(from.clone());
                    out.push(to.clone());
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Folds another edit set computed against the same version into this one.
    pub fn merge(&mut self, other: EditSet) {
        self.edits.extend(other.edits);
        self.file_ops.extend(other.file_ops);
        for a in other.annotations {
            self.annotate(a);
        }
        self.flag(other.semantics);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conflict {
    Overlap { file: String, first: String, second: String },
    OutOfBounds { file: String, start: usize, end: usize, len: usize },
    Stale { expected: u64, actual: u64 },
    UnknownFile { file: String },
    FileExists { file: String },
    /// The file on disk no longer matches the loaded snapshot.
    ChangedOnDisk { file: String },
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conflict::Overlap { file, first, second } => {
                write!(f, "{file}: overlapping edits {first} and {second}")
            }
            Conflict::OutOfBounds { file, start, end, len } => {
                write!(f, "{file}: edit {start}..{end} outside file of {len} bytes")
            }
            Conflict::Stale { expected, actual } => write!(
                f,
                "edits were computed for version {expected} but the program is at version {actual}"
            ),
            Conflict::UnknownFile { file } => write!(f, "{file}: not part of the project"),
            Conflict::FileExists { file } => write!(f, "{file}: already exists"),
            Conflict::ChangedOnDisk { file } => write!(f, "{file}: changed on disk since it was loaded"),
        }
    }
}

#[derive(Debug, Error)]
pub enum EditError {
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Conflicts(Vec<Conflict>),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("another apply holds the project lock ({0})")]
    Locked(String),
    #[error("program was not loaded from disk")]
    NoRoot,
    #[error("reloading after apply failed: {0}")]
    Reload(#[from] crate::model::ModelError),
}

impl EditError {
    pub fn is_stale(&self) -> bool {
        matches!(self, EditError::Conflicts(c) if c.iter().any(|c| matches!(c, Conflict::Stale { .. } | Conflict::ChangedOnDisk { .. })))
    }
}

fn current_text<'a>(program: &'a Program, es: &'a EditSet, file: &str) -> Option<&'a str> {
    if let Some(f) = program.files.iter().find(|f| f.path == file) {
        return Some(f.text());
    }
    if file == manifest_name(program) {
        return Some(&program.manifest_text);
    }
    es.file_ops.iter().find_map(|op| match op {
        FileOp::Create { path, text } if path == file => Some(text.as_str()),
        _ => None,
    })
}

/// Validates an edit set against a program snapshot; never fails, returns
/// the conflicts found.
pub fn check(es: &EditSet, program: &Program) -> Vec<Conflict> {
    let mut out = Vec::new();
    if es.version != program.version {
        out.push(Conflict::Stale {
            expected: es.version,
            actual: program.version,
        });
    }
    let mut edits: Vec<&TextEdit> = es.edits.iter().collect();
    edits.sort_by(|a, b| (&a.file, a.start, a.end).cmp(&(&b.file, b.start, b.end)));
    for (i, e) in edits.iter().enumerate() {
        let Some(text) = current_text(program, es, &e.file) else {
            if i == 0 || edits[i - 1].file != e.file {
                out.push(Conflict::UnknownFile { file: e.file.clone() });
            }
            continue;
        };
        if e.start > e.end
            || e.end > text.len()
            || !text.is_char_boundary(e.start)
            || !text.is_char_boundary(e.end)
        {
            out.push(Conflict::OutOfBounds {
                file: e.file.clone(),
                start: e.start,
                end: e.end,
                len: text.len(),
            });
        }
        if i > 0 {
            let p = edits[i - 1];
            let overlapping = p.file == e.file
                && (p.end > e.start || (p.start == e.start && p.start != p.end && e.start != e.end));
            if overlapping {
                out.push(Conflict::Overlap {
                    file: e.file.clone(),
                    first: p.label(),
                    second: e.label(),
                });
            }
        }
    }
    for op in &es.file_ops {
        match op {
            FileOp::Create { path, .. } => {
                if program.file_index(path).is_some() {
                    out.push(Conflict::FileExists { file: path.clone() });
                }
            }
            FileOp::Delete { path } => {
                if program.file_index(path).is_none() {
                    out.push(Conflict::UnknownFile { file: path.clone() });
                }
            }
            FileOp::Rename { from, to } => {
                if program.file_index(from).is_none() {
                    out.push(Conflict::UnknownFile { file: from.clone() });
                }
                if program.file_index(to).is_some() {
                    out.push(Conflict::FileExists { file: to.clone() });
                }
            }
        }
    }
    out
}

/// Applies edits to one text, right to left.
pub fn apply_to_text(text: &str, edits: &[&TextEdit]) -> String {
    let mut sorted: Vec<&TextEdit> = edits.to_vec();
    sorted.sort_by_key(|e| (e.start, e.end));
    let mut out = text.to_string();
    for e in sorted.iter().rev() {
        out.replace_range(e.start..e.end, &e.replacement);
    }
    out
}

/// The project after applying an edit set, as new manifest text and
/// sources in manifest order (created files appended).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applied {
    pub manifest_text: String,
    pub sources: Vec<(String, String)>,
    /// Paths whose text changes, with old (None: created) and new (None:
    /// deleted) contents; the manifest is included under its own name.
    pub changes: Vec<FileChange>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileChange {
    pub old_path: Option<String>,
    pub new_path: Option<String>,
    pub old: Option<String>,
    pub new: Option<String>,
}

/// Name used for the manifest in diffs when the program has none on disk.
pub const DEFAULT_MANIFEST: &str = "project.plm";

pub fn manifest_name(program: &Program) -> String {
    program
        .manifest_path
        .clone()
        .unwrap_or_else(|| DEFAULT_MANIFEST.to_string())
}

/// Computes the resulting texts without touching the disk.
pub fn apply_in_memory(es: &EditSet, program: &Program) -> Result<Applied, EditError> {
    let conflicts: Vec<Conflict> = check(es, program)
        .into_iter()
        .filter(|c| !matches!(c, Conflict::Stale { .. }))
        .collect();
    if !conflicts.is_empty() {
        return Err(EditError::Conflicts(conflicts));
    }
    let mut changes = Vec::new();
    let mut sources = Vec::new();
    let mut added = Vec::new();
    let mut removed = Vec::new();
    for f in &program.files {
        let edits: Vec<&TextEdit> = es.edits.iter().filter(|e| e.file == f.path).collect();
        let new_text = if edits.is_empty() {
            f.text().to_string()
        } else {
            apply_to_text(f.text(), &edits)
        };
        let deleted = es
            .file_ops
            .iter()
            .any(|op| matches!(op, FileOp::Delete { path } if *path == f.path));
        let renamed = es.file_ops.iter().find_map(|op| match op {
            FileOp::Rename { from, to } if *from == f.path => Some(to.clone()),
            _ => None,
        });
        if deleted {
            removed.push(f.path.clone());
            changes.push(FileChange {
                old_path: Some(f.path.clone()),
                new_path: None,
                old: Some(f.text().to_string()),
                new: None,
            });
            continue;
        }
        let path = renamed.clone().unwrap_or_else(|| f.path.clone());
        if renamed.is_some() || new_text != f.text() {
            changes.push(FileChange {
                old_path: Some(f.path.clone()),
                new_path: Some(path.clone()),
                old: Some(f.text().to_string()),
                new: Some(new_text.clone()),
            });
        }
        sources.push((path, new_text));
    }
    let mut renames = Vec::new();
    for op in &es.file_ops {
        match op {
            FileOp::Create { path, text } => {
                let edits: Vec<&TextEdit> = es.edits.iter().filter(|e| e.file == *path).collect();
                let text = apply_to_text(text, &edits);
                added.push(path.clone());
                changes.push(FileChange {
                    old_path: None,
                    new_path: Some(path.clone()),
                    old: None,
                    new: Some(text.clone()),
                });
                sources.push((path.clone(), text));
            }
            FileOp::Rename { from, to } => renames.push((from.clone(), to.clone())),
            FileOp::Delete { .. } => {}
        }
    }
    let mname = manifest_name(program);
    let medits: Vec<&TextEdit> = es.edits.iter().filter(|e| e.file == mname).collect();
    let manifest_text = apply_to_text(&program.manifest_text, &medits);
    let manifest_text = rewrite_manifest(&manifest_text, &added, &removed, &renames);
    if manifest_text != program.manifest_text {
        let name = manifest_name(program);
        changes.push(FileChange {
            old_path: Some(name.clone()),
            new_path: Some(name),
            old: Some(program.manifest_text.clone()),
            new: Some(manifest_text.clone()),
        });
    }
    Ok(Applied {
        manifest_text,
        sources,
        changes,
    })
}

fn rewrite_manifest(
    text: &str,
    added: &[String],
    removed: &[String],
    renames: &[(String, String)],
) -> String {
    if added.is_empty() && removed.is_empty() && renames.is_empty() {
        return text.to_string();
    }
    // renamed entries keep their position in the file list
    let mut out = String::new();
    let mut in_files = false;
    for line in text.split_inclusive('\n') {
        let t = line.split('#').next().unwrap_or("").trim();
        if t.starts_with('[') && t.ends_with(']') {
            in_files = t == "[files]";
        } else if in_files {
            if let Some((_, to)) = renames.iter().find(|(from, _)| from == t) {
                out.push_str(&line.replacen(t, to, 1));
                continue;
            }
        }
        out.push_str(line);
    }
    crate::model::manifest::rewrite_files(&out, added, removed)
}

/// Applies an edit set in memory and loads the result as a new program.
pub fn apply_to_program(es: &EditSet, program: &Program) -> Result<Program, EditError> {
    let applied = apply_in_memory(es, program)?;
    Ok(program.reload_with(&applied.manifest_text, &applied.sources)?)
}
