//! Multi-module program model: predicate table, imports and exports, call
//! resolution, dependency graph and its condensation.

pub mod builtins;
mod load;
pub mod manifest;
mod pdg;
mod resolve;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{atom_text, Clause, OperatorTable, ParsedFile, Span, Term};

pub use manifest::{Indicator, Manifest, MetaArg, MetaSpec};
pub use pdg::{Condensation, Pdg, Scc};

pub type FileId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PredId {
    pub module: String,
    pub name: String,
    pub arity: usize,
}

impl PredId {
    pub fn new(module: &str, name: &str, arity: usize) -> Self {
        PredId {
            module: module.to_string(),
            name: name.to_string(),
            arity,
        }
    }

    /// `name/arity` without the module.
    pub fn indicator(&self) -> String {
        format!("{}/{}", atom_text(&self.name), self.arity)
    }

    pub fn key(&self) -> (&str, usize) {
        (&self.name, self.arity)
    }
}

impl fmt::Display for PredId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", atom_text(&self.module), self.indicator())
    }
}

/// Position of a clause: file and item index within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClauseRef {
    pub file: FileId,
    pub item: usize,
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: String,
    pub module: String,
    pub parsed: ParsedFile,
    /// Operator table in effect at the end of the file.
    pub ops: OperatorTable,
}

impl SourceFile {
    pub fn text(&self) -> &str {
        &self.parsed.text
    }
}

/// One element of an export or import list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListEntry {
    pub name: String,
    pub arity: usize,
    pub span: Option<Span>,
    /// `op/3` entries in export lists.
    pub is_op: bool,
}

/// Location of a `:- module(Name, Exports)` directive.
#[derive(Debug, Clone)]
pub struct ModuleDecl {
    pub item: usize,
    pub span: Span,
    pub name_span: Option<Span>,
    pub list_span: Option<Span>,
    /// Spans of all list elements in order, including non-predicate ones.
    pub element_spans: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImportSource {
    Module(String),
    Library(String),
    Unknown(String),
}

#[derive(Debug, Clone)]
pub struct ImportDecl {
    pub file: FileId,
    pub item: usize,
    /// Span of the whole directive, terminator included.
    pub span: Span,
    pub spec: Term,
    pub spec_span: Option<Span>,
    pub source: ImportSource,
    /// `None` imports everything the source exports.
    pub entries: Option<Vec<ListEntry>>,
    pub list_span: Option<Span>,
    pub element_spans: Vec<Span>,
}

impl ImportDecl {
    pub fn source_module(&self) -> Option<&str> {
        match &self.source {
            ImportSource::Module(m) => Some(m),
            _ => None,
        }
    }

    pub fn imports(&self, name: &str, arity: usize, program: &Program) -> bool {
        match &self.entries {
            Some(list) => list.iter().any(|e| e.name == name && e.arity == arity),
            None => match &self.source {
                ImportSource::Module(m) => program
                    .module(m)
                    .is_some_and(|md| md.exports(name, arity)),
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModuleDef {
    pub name: String,
    pub file: FileId,
    pub files: Vec<FileId>,
    pub decl: Option<ModuleDecl>,
    pub exports: Vec<ListEntry>,
    pub imports: Vec<ImportDecl>,
}

impl ModuleDef {
    pub fn exports(&self, name: &str, arity: usize) -> bool {
        self.exports
            .iter()
            .any(|e| !e.is_op && e.name == name && e.arity == arity)
    }
}

#[derive(Debug, Clone)]
pub struct PredDef {
    pub id: PredId,
    pub clauses: Vec<ClauseRef>,
    pub dynamic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resolution {
    Pred(PredId),
    Builtin,
    Control,
    /// Provided by a library or a module outside the project.
    External(String),
    Unresolved,
}

impl Resolution {
    pub fn pred(&self) -> Option<&PredId> {
        match self {
            Resolution::Pred(p) => Some(p),
            _ => None,
        }
    }
}

/// The `M` of a qualified goal `M:G`.
#[derive(Debug, Clone)]
pub struct Qualifier {
    pub module: String,
    /// Span of the whole `M:G` term.
    pub span: Option<Span>,
    pub module_span: Option<Span>,
}

/// A resolved goal occurrence.
#[derive(Debug, Clone)]
pub struct CallSite {
    /// `None` for goals in directives.
    pub caller: Option<PredId>,
    pub file: FileId,
    pub item: usize,
    /// Module in whose context the goal is resolved.
    pub module: String,
    /// The goal with any module qualification stripped.
    pub term: Term,
    pub qualifier: Option<Qualifier>,
    pub name: String,
    pub arity: usize,
    pub resolution: Resolution,
    /// Extra arguments appended by a meta-predicate; `None` for direct calls.
    pub meta_extra: Option<usize>,
}

impl CallSite {
    pub fn span(&self) -> Option<Span> {
        self.term.span
    }

    pub fn clause(&self) -> Option<ClauseRef> {
        self.caller.as_ref().map(|_| ClauseRef {
            file: self.file,
            item: self.item,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    UndefinedCall {
        caller: Option<String>,
        goal: String,
        file: String,
        span: Option<Span>,
    },
    UnknownImport {
        module: String,
        spec: String,
        file: String,
    },
    AmbiguousImport {
        module: String,
        indicator: String,
        chosen: String,
        other: String,
    },
    UnresolvedMeta {
        caller: Option<String>,
        goal: String,
        file: String,
        span: Option<Span>,
    },
    ExportNotDefined {
        module: String,
        indicator: String,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::UndefinedCall { caller, goal, file, .. } => match caller {
                Some(c) => write!(f, "{file}: {c} calls undefined {goal}"),
                None => write!(f, "{file}: directive calls undefined {goal}"),
            },
            Warning::UnknownImport { module, spec, file } => {
                write!(f, "{file}: module {module} imports unknown {spec}")
            }
            Warning::AmbiguousImport {
                module,
                indicator,
                chosen,
                other,
            } => write!(
                f,
                "module {module}: {indicator} imported from both {chosen} and {other}; using {chosen}"
            ),
            Warning::UnresolvedMeta { caller, goal, file, .. } => write!(
                f,
                "{file}: {} passes an unresolvable goal to {goal}",
                caller.as_deref().unwrap_or("directive")
            ),
            Warning::ExportNotDefined { module, indicator } => {
                write!(f, "module {module} exports undefined {indicator}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{file}:{line}:{col}: {message}")]
    Parse {
        file: String,
        offset: usize,
        line: usize,
        col: usize,
        message: String,
    },
    #[error("module {0} is defined more than once")]
    DuplicateModuleName(String),
}

/// An immutable snapshot of a loaded project.
#[derive(Debug, Clone)]
pub struct Program {
    pub version: u64,
    /// Directory the manifest's file paths are relative to, when loaded from disk.
    pub root: Option<PathBuf>,
    /// Manifest file name relative to `root`.
    pub manifest_path: Option<String>,
    pub manifest_text: String,
    pub manifest: Manifest,
    pub files: Vec<SourceFile>,
    pub modules: Vec<ModuleDef>,
    pub preds: BTreeMap<PredId, PredDef>,
    pub roots: BTreeSet<PredId>,
    /// Predicates called from `initialization` directives.
    pub entry_points: BTreeSet<PredId>,
    pub meta: Vec<MetaSpec>,
    pub warnings: Vec<Warning>,
    pub calls: Vec<CallSite>,
    pub pdg: Pdg,
    module_index: HashMap<String, usize>,
    calls_by_item: HashMap<(FileId, usize), Vec<usize>>,
    calls_by_callee: HashMap<PredId, Vec<usize>>,
}

impl Program {
    pub fn module(&self, name: &str) -> Option<&ModuleDef> {
        self.module_index.get(name).map(|&i| &self.modules[i])
    }

    pub fn pred(&self, id: &PredId) -> Option<&PredDef> {
        self.preds.get(id)
    }

    pub fn is_defined(&self, module: &str, name: &str, arity: usize) -> bool {
        self.preds.contains_key(&PredId::new(module, name, arity))
    }

    pub fn clause(&self, c: ClauseRef) -> &Clause {
        self.files[c.file].parsed.items[c.item]
            .as_clause()
            .expect("clause reference points at a clause")
    }

    pub fn clauses_of<'a>(&'a self, id: &PredId) -> impl Iterator<Item = (ClauseRef, &'a Clause)> + 'a {
        self.preds
            .get(id)
            .into_iter()
            .flat_map(|d| d.clauses.iter())
            .map(move |&c| (c, self.clause(c)))
    }

    pub fn file_text(&self, file: FileId) -> &str {
        self.files[file].text()
    }

    pub fn file_index(&self, path: &str) -> Option<FileId> {
        self.files.iter().position(|f| f.path == path)
    }

    /// Goals resolved inside the given clause or directive, in source order.
    pub fn calls_in(&self, c: ClauseRef) -> impl Iterator<Item = &CallSite> {
        self.calls_by_item
            .get(&(c.file, c.item))
            .into_iter()
            .flatten()
            .map(|&i| &self.calls[i])
    }

    /// Goals resolving to the given predicate.
    pub fn calls_to<'a>(&'a self, id: &PredId) -> impl Iterator<Item = &'a CallSite> + 'a {
        self.calls_by_callee
            .get(id)
            .into_iter()
            .flatten()
            .map(|&i| &self.calls[i])
    }

    /// The predicate a clause belongs to.
    pub fn clause_pred(&self, c: ClauseRef) -> PredId {
        let clause = self.clause(c);
        let (name, arity) = clause.head.functor().unwrap_or(("", 0));
        PredId::new(&self.files[c.file].module, name, arity)
    }

    /// Finds a predicate by indicator; without a module, `user` is tried
    /// first, then a unique definition in any module.
    pub fn find_pred(&self, ind: &Indicator) -> Option<PredId> {
        if let Some(m) = &ind.module {
            let id = PredId::new(m, &ind.name, ind.arity);
            return self.preds.contains_key(&id).then_some(id);
        }
        let user = PredId::new("user", &ind.name, ind.arity);
        if self.preds.contains_key(&user) {
            return Some(user);
        }
        let mut found = self
            .preds
            .keys()
            .filter(|p| p.name == ind.name && p.arity == ind.arity);
        match (found.next(), found.next()) {
            (Some(p), None) => Some(p.clone()),
            _ => None,
        }
    }

    /// Resolves a goal term in the context of `module`.
    pub fn resolve(&self, module: &str, goal: &Term) -> Resolution {
        resolve::resolve_goal(self, module, goal)
    }

    pub fn condensation(&self) -> Condensation {
        self.pdg.condensation()
    }

    pub fn meta_spec(&self, name: &str, arity: usize) -> Option<&MetaSpec> {
        self.meta.iter().find(|m| m.name == name && m.arity == arity)
    }

    /// Whether a predicate is an entry point: a configured root or called
    /// from an `initialization` directive.
    pub fn is_root(&self, id: &PredId) -> bool {
        self.roots.contains(id) || self.entry_points.contains(id)
    }
}

pub use load::{next_version, LoadOptions};

#[cfg(test)]
mod tests;
