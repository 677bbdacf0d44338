use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::json;

use super::{AnalysisError, Location, Suggestion, SuggestionKind};
use crate::model::{ImportSource, PredId, Program, Resolution};
use crate::syntax::{render_term, Span};

/// Defined predicates not reachable from the roots, the `initialization`
/// entry points or any other directive. Dynamic predicates count as live
/// since their callers may be asserted at run time.
pub fn dead_predicates(program: &Program) -> Result<BTreeSet<PredId>, AnalysisError> {
    if program.roots.is_empty() && program.entry_points.is_empty() {
        return Err(AnalysisError::NoRootsConfigured);
    }
    let mut start: BTreeSet<PredId> = program.roots.union(&program.entry_points).cloned().collect();
    for cs in &program.calls {
        if cs.caller.is_none() {
            if let Resolution::Pred(p) = &cs.resolution {
                start.insert(p.clone());
            }
        }
    }
    start.extend(program.preds.values().filter(|d| d.dynamic).map(|d| d.id.clone()));
    let live = program.pdg.reachable_from(start.iter());
    Ok(program
        .preds
        .keys()
        .filter(|p| !live.contains(*p))
        .cloned()
        .collect())
}

pub(crate) fn dead_suggestion(program: &Program, p: &PredId) -> Suggestion {
    let def = &program.preds[p];
    let span = def
        .clauses
        .first()
        .map(|&c| Location::new(program, c.file, program.clause(c).span));
    Suggestion::new(
        SuggestionKind::DeadCode,
        &p.to_string(),
        &p.module,
        p.to_string(),
        span,
        format!("{p} is not reachable from any root"),
        json!({ "pred": p, "clauses": def.clauses.len() }),
    )
}

/// An import that no goal of the importing module uses. `entry` is the
/// index in the import list, `None` for a whole-module import.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnusedImport {
    pub module: String,
    pub file: String,
    pub item: usize,
    pub source: String,
    pub entry: Option<usize>,
    pub indicator: Option<String>,
    pub span: Span,
}

impl UnusedImport {
    pub fn suggestion(&self) -> Suggestion {
        let what = self.indicator.clone().unwrap_or_else(|| "everything".into());
        Suggestion::new(
            SuggestionKind::UnusedImport,
            &format!("{}|{}|{}", self.module, self.source, what),
            &self.module,
            format!("{}: {} from {}", self.module, what, self.source),
            Some(Location {
                file: self.file.clone(),
                start: self.span.start,
                end: self.span.end,
            }),
            format!("module {} imports {} from {} but never uses it", self.module, what, self.source),
            json!({
                "file": self.file,
                "item": self.item,
                "entry": self.entry,
                "source": self.source,
                "indicator": self.indicator,
            }),
        )
    }
}

pub fn unused_imports(program: &Program) -> Vec<UnusedImport> {
    let mut out = Vec::new();
    for m in &program.modules {
        let calls: Vec<_> = program
            .calls
            .iter()
            .filter(|cs| program.files[cs.file].module == m.name && cs.qualifier.is_none())
            .collect();
        for d in &m.imports {
            let file = &program.files[d.file];
            let source = render_term(&d.spec, &file.ops);
            let from_source = |r: &Resolution, name: Option<(&str, usize)>| match (&d.source, r) {
                (ImportSource::Module(src), Resolution::Pred(p)) => {
                    p.module == *src && name.is_none_or(|k| p.key() == k)
                }
                (ImportSource::Module(src), Resolution::External(e)) => e == src,
                (_, Resolution::External(_)) => true,
                _ => false,
            };
            match &d.entries {
                Some(entries) => {
                    for (i, e) in entries.iter().enumerate() {
                        if e.is_op {
                            continue;
                        }
                        let used = calls.iter().any(|cs| {
                            cs.name == e.name
                                && cs.arity == e.arity
                                && from_source(&cs.resolution, Some((&e.name, e.arity)))
                        });
                        if !used {
                            out.push(UnusedImport {
                                module: m.name.clone(),
                                file: file.path.clone(),
                                item: d.item,
                                source: source.clone(),
                                entry: Some(i),
                                indicator: Some(format!("{}/{}", crate::syntax::atom_text(&e.name), e.arity)),
                                span: e.span.unwrap_or(d.span),
                            });
                        }
                    }
                }
                None => {
                    if !matches!(d.source, ImportSource::Module(_)) {
                        continue;
                    }
                    if !calls.iter().any(|cs| from_source(&cs.resolution, None)) {
                        out.push(UnusedImport {
                            module: m.name.clone(),
                            file: file.path.clone(),
                            item: d.item,
                            source,
                            entry: None,
                            indicator: None,
                            span: d.span,
                        });
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HideableExport {
    pub pred: PredId,
    pub file: String,
    pub span: Option<Span>,
}

impl HideableExport {
    pub fn suggestion(&self, _program: &Program) -> Suggestion {
        let p = &self.pred;
        Suggestion::new(
            SuggestionKind::HideableExport,
            &p.to_string(),
            &p.module,
            p.to_string(),
            self.span.map(|s| Location {
                file: self.file.clone(),
                start: s.start,
                end: s.end,
            }),
            format!("{} is exported but no other module uses it", p),
            json!({ "pred": p }),
        )
    }
}

/// Exported predicates that no other module imports by name, uses through a
/// whole-module import, or calls qualified. Roots are never hideable.
pub fn hideable_exports(program: &Program) -> Vec<HideableExport> {
    let mut out = Vec::new();
    for m in &program.modules {
        let Some(decl) = &m.decl else { continue };
        for e in &m.exports {
            if e.is_op {
                continue;
            }
            let p = PredId::new(&m.name, &e.name, e.arity);
            if !program.preds.contains_key(&p) || program.is_root(&p) {
                continue;
            }
            let named = program.modules.iter().any(|o| {
                o.name != m.name
                    && o.imports.iter().any(|d| {
                        d.source_module() == Some(m.name.as_str())
                            && d.entries
                                .as_ref()
                                .is_some_and(|es| es.iter().any(|x| x.name == e.name && x.arity == e.arity))
                    })
            });
            let called = program
                .calls_to(&p)
                .any(|cs| program.files[cs.file].module != m.name);
            if !named && !called {
                out.push(HideableExport {
                    pred: p,
                    file: program.files[m.file].path.clone(),
                    span: e.span.or(Some(decl.span)),
                });
            }
        }
    }
    out
}
