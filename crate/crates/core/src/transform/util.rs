use std::collections::{BTreeMap, BTreeSet};

use crate::edit::{manifest_name, EditSet, FileOp, TextEdit};
use crate::model::{ClauseRef, FileId, ImportSource, Indicator, PredId, Program, Resolution};
use crate::syntax::{atom_text, Clause, Goal, GoalKind, Item, Span, Term, TermKind};

use super::TransformError;

pub(crate) fn indicator_text(name: &str, arity: usize) -> String {
    format!("{}/{}", atom_text(name), arity)
}

/// Resolves a user-supplied indicator to a defined predicate.
pub(crate) fn find_pred(p: &Program, spec: &str) -> Result<PredId, TransformError> {
    let ind = Indicator::parse(spec).map_err(TransformError::BadParams)?;
    p.find_pred(&ind)
        .ok_or_else(|| TransformError::UnknownPredicate(spec.to_string()))
}

pub(crate) fn line_start(text: &str, off: usize) -> usize {
    text[..off].rfind('\n').map_or(0, |i| i + 1)
}

/// Column of `off` counted in characters.
pub(crate) fn column(text: &str, off: usize) -> usize {
    text[line_start(text, off)..off].chars().count()
}

/// The span to delete when removing a whole item: its line(s) when nothing
/// else shares them, plus one following blank line if a blank line also
/// precedes it.
pub(crate) fn removal_span(text: &str, span: Span) -> Span {
    let b = text.as_bytes();
    let len = b.len();
    let ls = line_start(text, span.start);
    if !text[ls..span.start].trim().is_empty() {
        return span;
    }
    let mut end = span.end;
    while end < len && (b[end] == b' ' || b[end] == b'\t' || b[end] == b'\r') {
        end += 1;
    }
    if end < len && b[end] != b'\n' {
        return span;
    }
    let mut start = ls;
    if end < len {
        end += 1;
        let mut k = end;
        while k < len && (b[k] == b' ' || b[k] == b'\t' || b[k] == b'\r') {
            k += 1;
        }
        let blank_before = ls == 0 || text[..ls].ends_with("\n\n");
        if k < len && b[k] == b'\n' && blank_before {
            end = k + 1;
        } else if k == len {
            end = k;
        }
    }
    if end == len && text[..start].ends_with("\n\n") {
        start -= 1;
    }
    Span::new(start, end)
}

/// Deletion spans removing the chosen elements of a comma-separated list
/// without leaving stray commas.
pub(crate) fn list_deletions(elements: &[Span], remove: &BTreeSet<usize>) -> Vec<Span> {
    let remove: BTreeSet<usize> = remove.iter().copied().filter(|&i| i < elements.len()).collect();
    if remove.is_empty() {
        return Vec::new();
    }
    if remove.len() == elements.len() {
        return vec![Span::new(elements[0].start, elements[elements.len() - 1].end)];
    }
    let first_kept = (0..elements.len()).find(|i| !remove.contains(i)).unwrap();
    remove
        .iter()
        .map(|&i| {
            if i > first_kept {
                Span::new(elements[i - 1].end, elements[i].end)
            } else {
                Span::new(elements[i].start, elements[i + 1].start)
            }
        })
        .collect()
}

pub(crate) fn clause_path(p: &Program, c: ClauseRef) -> String {
    p.files[c.file].path.clone()
}

/// Lines of the manifest's `[roots]` section as (span, indicator).
pub(crate) fn manifest_roots(p: &Program) -> Vec<(Span, Indicator)> {
    let mut out = Vec::new();
    let mut in_roots = false;
    let mut off = 0;
    for line in p.manifest_text.split_inclusive('\n') {
        let body = line.split('#').next().unwrap_or("");
        let t = body.trim();
        if t.starts_with('[') && t.ends_with(']') {
            in_roots = t == "[roots]";
        } else if in_roots && !t.is_empty() {
            let start = off + body.find(t).unwrap_or(0);
            if let Ok(ind) = Indicator::parse(t) {
                out.push((Span::new(start, start + t.len()), ind));
            }
        }
        off += line.len();
    }
    out
}

/// Manifest root entries naming `id`.
pub(crate) fn roots_naming(p: &Program, id: &PredId) -> Vec<(Span, Indicator)> {
    manifest_roots(p)
        .into_iter()
        .filter(|(_, ind)| p.find_pred(ind).as_ref() == Some(id))
        .collect()
}

/// Indicators in `dynamic`/`discontiguous`/`multifile`/`table` directives of
/// the given file, with their spans.
pub(crate) fn declared_indicators(p: &Program, file: FileId) -> Vec<(usize, Span, String, usize)> {
    let mut out = Vec::new();
    for (item, it) in p.files[file].parsed.items.iter().enumerate() {
        let Item::Directive { term, .. } = it else { continue };
        let Some((name, 1)) = term.functor() else { continue };
        if !matches!(name, "dynamic" | "discontiguous" | "multifile" | "table") {
            continue;
        }
        let mut stack = vec![&term.args()[0]];
        while let Some(t) = stack.pop() {
            if t.is_functor(",", 2) {
                stack.push(&t.args()[1]);
                stack.push(&t.args()[0]);
            } else if let Some((items, _)) = t.list_elements() {
                stack.extend(items.into_iter().rev());
            } else if let (Some(ind), Some(span)) = (Indicator::from_term(t), t.span) {
                out.push((item, span, ind.name, ind.arity));
            }
        }
    }
    out
}

pub(crate) fn fresh_var(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}{k}"))
        .find(|n| !taken.contains(n))
        .unwrap()
}

pub(crate) fn rename_goal(g: &Goal, f: &mut impl FnMut(&str) -> String) -> Goal {
    let kind = match &g.kind {
        GoalKind::Conj(a, b) => GoalKind::Conj(Box::new(rename_goal(a, f)), Box::new(rename_goal(b, f))),
        GoalKind::Disj(a, b) => GoalKind::Disj(Box::new(rename_goal(a, f)), Box::new(rename_goal(b, f))),
        GoalKind::IfThenElse {
            cond,
            then,
            else_,
            implicit_else,
        } => GoalKind::IfThenElse {
            cond: Box::new(rename_goal(cond, f)),
            then: Box::new(rename_goal(then, f)),
            else_: Box::new(rename_goal(else_, f)),
            implicit_else: *implicit_else,
        },
        GoalKind::Naf(a) => GoalKind::Naf(Box::new(rename_goal(a, f))),
        GoalKind::Cut => GoalKind::Cut,
        GoalKind::Call(t) => GoalKind::Call(t.rename_vars(f)),
    };
    Goal::new(kind)
}

/// Variables of a clause, anonymous ones excluded.
pub(crate) fn clause_vars(c: &Clause) -> BTreeSet<String> {
    c.variables().into_iter().collect()
}

/// The clause whose span covers `span` in `file`.
pub(crate) fn clause_at(p: &Program, file: FileId, span: Span) -> Option<ClauseRef> {
    p.files[file]
        .parsed
        .items
        .iter()
        .enumerate()
        .find(|(_, it)| matches!(it, Item::Clause(_)) && it.span().covers(span))
        .map(|(item, _)| ClauseRef { file, item })
}

pub(crate) fn file_of(p: &Program, path: &str) -> Result<FileId, TransformError> {
    p.file_index(path)
        .ok_or_else(|| TransformError::BadParams(format!("unknown file {path}")))
}

/// How a term's argument list changes.
pub(crate) enum ArgPlan<'a> {
    Keep,
    /// 0-based positions to drop.
    Remove(&'a BTreeSet<usize>),
    /// `perm[k]` is the 0-based old position of new position `k`.
    Permute(&'a [usize]),
    /// Insert text at a 0-based position.
    Insert(usize, String),
}

/// Collects replacements per file. A replacement covering earlier ones
/// absorbs them, provided its text was built with `slice`.
pub(crate) struct Rewriter<'p> {
    pub p: &'p Program,
    pending: BTreeMap<String, Vec<(Span, String, Option<String>, usize)>>,
    seq: usize,
    appended: BTreeSet<String>,
    deleted_items: BTreeMap<String, Vec<Span>>,
    pub es: EditSet,
}

fn contains(outer: Span, inner: Span) -> bool {
    if outer.is_empty() {
        return false;
    }
    let boundary_insert = inner.is_empty() && (inner.start == outer.start || inner.end == outer.end);
    outer.start <= inner.start && inner.end <= outer.end && !boundary_insert
}

impl<'p> Rewriter<'p> {
    pub fn new(p: &'p Program) -> Self {
        Rewriter {
            p,
            pending: BTreeMap::new(),
            seq: 0,
            appended: BTreeSet::new(),
            deleted_items: BTreeMap::new(),
            es: EditSet::new(p.version),
        }
    }

    pub fn text(&self, file: &str) -> &'p str {
        if let Some(i) = self.p.file_index(file) {
            return self.p.file_text(i);
        }
        if file == manifest_name(self.p) {
            return &self.p.manifest_text;
        }
        ""
    }

    /// Original text of `span` with the replacements inside it applied.
    pub fn slice(&self, file: &str, span: Span) -> String {
        let text = self.text(file);
        let mut inner: Vec<&(Span, String, Option<String>, usize)> = self
            .pending
            .get(file)
            .into_iter()
            .flatten()
            .filter(|e| contains(span, e.0) || (span.is_empty() && e.0 == span))
            .collect();
        inner.sort_by_key(|e| (e.0.start, e.0.end, e.3));
        let mut out = span.slice(text).to_string();
        for e in inner.iter().rev() {
            out.replace_range(e.0.start - span.start..e.0.end - span.start, &e.1);
        }
        out
    }

    pub fn put(&mut self, file: &str, span: Span, text: impl Into<String>) {
        self.put_noted(file, span, text, None);
    }

    pub fn put_noted(&mut self, file: &str, span: Span, text: impl Into<String>, note: Option<&str>) {
        let list = self.pending.entry(file.to_string()).or_default();
        list.retain(|e| !contains(span, e.0));
        self.seq += 1;
        list.push((span, text.into(), note.map(str::to_string), self.seq));
    }

    pub fn insert(&mut self, file: &str, off: usize, text: impl Into<String>) {
        self.put(file, Span::new(off, off), text);
    }

    pub fn delete(&mut self, file: &str, span: Span) {
        self.put(file, span, "");
    }

    pub fn discard_file(&mut self, file: &str) {
        self.pending.remove(file);
    }

    /// Deletes a whole item. Items deleted next to each other are removed
    /// as one block so that no stray blank line is left behind.
    pub fn delete_item(&mut self, file: &str, span: Span) {
        let text = self.text(file);
        let adjacent = |a: Span, b: Span| {
            let gap = &text[a.end.min(b.start)..b.start.max(a.end)];
            a.end <= b.start && gap.trim().is_empty() && gap.matches('\n').count() <= 1
        };
        let items = self.deleted_items.entry(file.to_string()).or_default();
        let mut joined = span;
        while let Some(k) = items.iter().position(|s| adjacent(*s, joined) || adjacent(joined, *s)) {
            joined = joined.join(items.remove(k));
        }
        items.push(joined);
        let s = removal_span(text, joined);
        self.delete(file, s);
    }

    /// Appends clause text at the end of a file after a blank line.
    pub fn append(&mut self, file: &str, text: &str) {
        let cur = self.text(file);
        let prefix = if self.appended.contains(file) {
            "\n"
        } else if cur.is_empty() || cur.ends_with("\n\n") {
            ""
        } else if cur.ends_with('\n') {
            "\n"
        } else {
            "\n\n"
        };
        self.appended.insert(file.to_string());
        let mut t = format!("{prefix}{text}");
        if !t.ends_with('\n') {
            t.push('\n');
        }
        self.insert(file, cur.len(), t);
    }

    pub fn create(&mut self, path: &str, text: String) {
        self.es.file_ops.push(FileOp::Create {
            path: path.to_string(),
            text,
        });
    }

    /// Replaces the functor name of a term occurrence.
    pub fn rename_term(&mut self, file: &str, t: &Term, new: &str) {
        self.rewrite_term(file, t, Some(new), ArgPlan::Keep);
    }

    /// Renames a term and/or changes its arguments with minimal edits.
    pub fn rewrite_term(&mut self, file: &str, t: &Term, new: Option<&str>, plan: ArgPlan) {
        let Some(span) = t.span else { return };
        let Some((old, _)) = t.functor() else { return };
        let name = atom_text(new.unwrap_or(old));
        let args = t.args();
        let prefix_form = matches!(t.kind, TermKind::Atom(_))
            || (t.name_span.is_some() && args.iter().all(|a| a.span.is_some()));
        if !prefix_form {
            let texts = self.arg_texts(file, args, &plan);
            let out = if texts.is_empty() {
                name
            } else {
                format!("{name}({})", texts.join(", "))
            };
            self.put(file, span, out);
            return;
        }
        if matches!(t.kind, TermKind::Atom(_)) {
            match plan {
                ArgPlan::Insert(_, v) => self.put(file, span, format!("{name}({v})")),
                _ if new.is_some() => self.put(file, span, name),
                _ => {}
            }
            return;
        }
        let name_span = t.name_span.unwrap();
        if new.is_some() {
            self.put(file, name_span, name);
        }
        let spans: Vec<Span> = args.iter().map(|a| a.span.unwrap()).collect();
        match plan {
            ArgPlan::Keep => {}
            ArgPlan::Remove(set) => {
                if set.len() >= args.len() && (0..args.len()).all(|i| set.contains(&i)) {
                    self.delete(file, Span::new(name_span.end, span.end));
                } else {
                    for s in list_deletions(&spans, set) {
                        self.delete(file, s);
                    }
                }
            }
            ArgPlan::Permute(perm) => {
                let texts: Vec<String> = perm.iter().map(|&k| self.slice(file, spans[k])).collect();
                for (k, text) in texts.into_iter().enumerate() {
                    if perm[k] != k {
                        self.put(file, spans[k], text);
                    }
                }
            }
            ArgPlan::Insert(pos, v) => {
                if pos >= spans.len() {
                    self.insert(file, spans[spans.len() - 1].end, format!(", {v}"));
                } else {
                    self.insert(file, spans[pos].start, format!("{v}, "));
                }
            }
        }
    }

    fn arg_texts(&self, file: &str, args: &[Term], plan: &ArgPlan) -> Vec<String> {
        let text_of = |a: &Term| match a.span {
            Some(s) => self.slice(file, s),
            None => crate::syntax::render_term_at(a, &Default::default(), 999),
        };
        let mut texts: Vec<String> = args.iter().map(text_of).collect();
        match plan {
            ArgPlan::Keep => {}
            ArgPlan::Remove(set) => {
                texts = texts
                    .into_iter()
                    .enumerate()
                    .filter(|(i, _)| !set.contains(i))
                    .map(|(_, t)| t)
                    .collect()
            }
            ArgPlan::Permute(perm) => texts = perm.iter().map(|&k| texts[k].clone()).collect(),
            ArgPlan::Insert(pos, v) => texts.insert((*pos).min(texts.len()), v.clone()),
        }
        texts
    }

    pub fn finish(mut self) -> EditSet {
        let mut all: Vec<(String, Span, String, Option<String>, usize)> = Vec::new();
        for (file, list) in std::mem::take(&mut self.pending) {
            for (span, text, note, seq) in list {
                all.push((file.clone(), span, text, note, seq));
            }
        }
        all.sort_by_key(|e| e.4);
        for (file, span, text, note, _) in all {
            if text.is_empty() && span.is_empty() {
                continue;
            }
            self.es.edits.push(TextEdit {
                file,
                start: span.start,
                end: span.end,
                replacement: text,
                note,
            });
        }
        self.es.normalize();
        self.es
    }
}

/// Export and import list changes gathered across a transform and emitted
/// together, so that one list never receives conflicting edits.
#[derive(Default)]
pub(crate) struct Interface {
    add_exports: BTreeMap<String, Vec<(String, usize)>>,
    drop_exports: BTreeMap<String, BTreeSet<(String, usize)>>,
    add_imports: BTreeMap<(String, String), Vec<(String, usize)>>,
    drop_imports: BTreeMap<String, BTreeSet<(String, String, usize)>>,
}

impl Interface {
    pub fn export(&mut self, module: &str, name: &str, arity: usize) {
        let v = self.add_exports.entry(module.to_string()).or_default();
        if !v.iter().any(|(n, a)| n == name && *a == arity) {
            v.push((name.to_string(), arity));
        }
    }

    pub fn unexport(&mut self, module: &str, name: &str, arity: usize) {
        self.drop_exports
            .entry(module.to_string())
            .or_default()
            .insert((name.to_string(), arity));
    }

    pub fn import(&mut self, importer: &str, source: &str, name: &str, arity: usize) {
        if importer == source {
            return;
        }
        let v = self
            .add_imports
            .entry((importer.to_string(), source.to_string()))
            .or_default();
        if !v.iter().any(|(n, a)| n == name && *a == arity) {
            v.push((name.to_string(), arity));
        }
    }

    pub fn unimport(&mut self, importer: &str, source: &str, name: &str, arity: usize) {
        self.drop_imports
            .entry(importer.to_string())
            .or_default()
            .insert((source.to_string(), name.to_string(), arity));
    }

    /// New module-to-module import edges.
    pub fn new_edges(&self) -> Vec<(String, String)> {
        self.add_imports.keys().cloned().collect()
    }

    pub fn flush(self, rw: &mut Rewriter) {
        let p = rw.p;
        let mut modules: BTreeSet<&String> = self.add_exports.keys().collect();
        modules.extend(self.drop_exports.keys());
        for m in modules {
            let Some(md) = p.module(m) else { continue };
            let Some(decl) = &md.decl else { continue };
            let Some(list_span) = decl.list_span else { continue };
            let path = p.files[md.file].path.clone();
            let drops = self.drop_exports.get(m).cloned().unwrap_or_default();
            let adds: Vec<&(String, usize)> = self
                .add_exports
                .get(m)
                .into_iter()
                .flatten()
                .filter(|(n, a)| !md.exports(n, *a))
                .collect();
            let mut remove = BTreeSet::new();
            for e in &md.exports {
                let re_added = self
                    .add_exports
                    .get(m)
                    .is_some_and(|v| v.iter().any(|(n, a)| *n == e.name && *a == e.arity));
                if !e.is_op && drops.contains(&(e.name.clone(), e.arity)) && !re_added {
                    if let Some(i) = decl.element_spans.iter().position(|s| Some(*s) == e.span) {
                        remove.insert(i);
                    }
                }
            }
            let add_text: Vec<String> = adds.iter().map(|(n, a)| indicator_text(n, *a)).collect();
            edit_list(rw, &path, list_span, &decl.element_spans, &remove, &add_text);
        }

        let mut importers: BTreeSet<String> = self.drop_imports.keys().cloned().collect();
        importers.extend(self.add_imports.keys().map(|(i, _)| i.clone()));
        for m in importers {
            let Some(md) = p.module(&m) else { continue };
            let path = p.files[md.file].path.clone();
            let drops = self.drop_imports.get(&m).cloned().unwrap_or_default();
            let mut surviving: Vec<bool> = Vec::new();
            let mut removed_sets: Vec<BTreeSet<usize>> = Vec::new();
            for imp in &md.imports {
                let mut remove = BTreeSet::new();
                if let (Some(src), Some(entries)) = (imp.source_module(), &imp.entries) {
                    for (k, e) in entries.iter().enumerate() {
                        if drops.contains(&(src.to_string(), e.name.clone(), e.arity)) {
                            if let Some(i) = imp.element_spans.iter().position(|s| Some(*s) == e.span) {
                                remove.insert(i);
                            } else {
                                remove.insert(k);
                            }
                        }
                    }
                }
                let all_gone = !imp.element_spans.is_empty() && remove.len() == imp.element_spans.len();
                surviving.push(!all_gone);
                removed_sets.push(remove);
            }
            // additions per source
            let mut new_directives = Vec::new();
            let mut appended: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            for ((imp_m, src), entries) in &self.add_imports {
                if *imp_m != m {
                    continue;
                }
                let needed: Vec<&(String, usize)> = entries
                    .iter()
                    .filter(|(n, a)| {
                        !md.imports.iter().enumerate().any(|(k, imp)| {
                            surviving[k]
                                && imp.source_module() == Some(src.as_str())
                                && match &imp.entries {
                                    Some(list) => list.iter().enumerate().any(|(j, e)| {
                                        e.name == *n && e.arity == *a && !removed_sets[k].contains(&j)
                                    }),
                                    None => p.module(src).is_some_and(|s| s.exports(n, *a)),
                                }
                        })
                    })
                    .collect();
                if needed.is_empty() {
                    continue;
                }
                let texts: Vec<String> = needed.iter().map(|(n, a)| indicator_text(n, *a)).collect();
                let target = md.imports.iter().enumerate().find(|(k, imp)| {
                    surviving[*k] && imp.source_module() == Some(src.as_str()) && imp.entries.is_some()
                });
                match target {
                    Some((k, _)) => appended.entry(k).or_default().extend(texts),
                    None => new_directives.push(format!(":- use_module({}, [{}]).", atom_text(src), texts.join(", "))),
                }
            }
            for (k, imp) in md.imports.iter().enumerate() {
                let ipath = p.files[imp.file].path.clone();
                if !surviving[k] {
                    rw.delete_item(&ipath, imp.span);
                    continue;
                }
                let adds = appended.remove(&k).unwrap_or_default();
                if let Some(ls) = imp.list_span {
                    edit_list(rw, &ipath, ls, &imp.element_spans, &removed_sets[k], &adds);
                }
            }
            if !new_directives.is_empty() {
                let text = rw.text(&path);
                let anchor = md
                    .imports
                    .iter()
                    .enumerate()
                    .filter(|(k, imp)| surviving[*k] && imp.file == md.file)
                    .map(|(_, imp)| imp.span.end)
                    .max()
                    .or(md.decl.as_ref().map(|d| d.span.end));
                match anchor {
                    Some(off) => rw.insert(
                        &path,
                        off,
                        new_directives.iter().map(|d| format!("\n{d}")).collect::<String>(),
                    ),
                    None => {
                        let sep = if text.is_empty() { "" } else { "\n" };
                        rw.insert(
                            &path,
                            0,
                            format!("{}\n{sep}", new_directives.join("\n")),
                        )
                    }
                }
            }
        }
    }
}

/// Deletes and appends list elements, rewriting the whole list when both
/// happen at once.
pub(crate) fn edit_list(
    rw: &mut Rewriter,
    file: &str,
    list_span: Span,
    elements: &[Span],
    remove: &BTreeSet<usize>,
    add: &[String],
) {
    if remove.is_empty() && add.is_empty() {
        return;
    }
    if !remove.is_empty() && !add.is_empty() {
        let mut items: Vec<String> = elements
            .iter()
            .enumerate()
            .filter(|(i, _)| !remove.contains(i))
            .map(|(_, s)| rw.slice(file, *s))
            .collect();
        items.extend(add.iter().cloned());
        rw.put(file, list_span, format!("[{}]", items.join(", ")));
        return;
    }
    for s in list_deletions(elements, remove) {
        rw.delete(file, s);
    }
    if !add.is_empty() {
        match elements.last() {
            Some(last) => rw.insert(file, last.end, format!(", {}", add.join(", "))),
            None => rw.insert(file, list_span.start + 1, add.join(", ")),
        }
    }
}

/// Module import graph: importer → imported project modules.
pub(crate) fn import_graph(p: &Program) -> BTreeMap<String, BTreeSet<String>> {
    let mut g: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for md in &p.modules {
        let e = g.entry(md.name.clone()).or_default();
        for imp in &md.imports {
            if let ImportSource::Module(s) = &imp.source {
                if *s != md.name {
                    e.insert(s.clone());
                }
            }
        }
    }
    g
}

/// A cycle through one of `added`, as a module path, if any.
pub(crate) fn cycle_through(
    mut g: BTreeMap<String, BTreeSet<String>>,
    added: &[(String, String)],
) -> Option<Vec<String>> {
    for (a, b) in added {
        g.entry(a.clone()).or_default().insert(b.clone());
    }
    for (a, b) in added {
        // path b ->* a closes the cycle
        let mut prev: BTreeMap<String, String> = BTreeMap::new();
        let mut stack = vec![b.clone()];
        let mut seen = BTreeSet::from([b.clone()]);
        while let Some(n) = stack.pop() {
            if n == *a {
                let mut path = vec![a.clone()];
                let mut cur = a.clone();
                while let Some(pv) = prev.get(&cur) {
                    path.push(pv.clone());
                    cur = pv.clone();
                }
                path.reverse();
                path.insert(0, a.clone());
                return Some(path);
            }
            for m in g.get(&n).into_iter().flatten() {
                if seen.insert(m.clone()) {
                    prev.insert(m.clone(), n.clone());
                    stack.push(m.clone());
                }
            }
        }
    }
    None
}

/// Whether a new definition of `name/arity` in `module` would change how
/// existing goals resolve there.
pub(crate) fn definition_clash(p: &Program, module: &str, name: &str, arity: usize) -> Option<String> {
    let probe = Term::compound(name, (0..arity).map(|i| Term::var(format!("_{i}"))).collect());
    match p.resolve(module, &probe) {
        Resolution::Pred(q) => Some(format!("{} is already visible in {module} as {q}", indicator_text(name, arity))),
        Resolution::Control => Some(format!("{} is a control construct", indicator_text(name, arity))),
        Resolution::External(src) => Some(format!(
            "{} is already imported into {module} from {src}",
            indicator_text(name, arity)
        )),
        Resolution::Builtin => {
            let used = p
                .calls
                .iter()
                .any(|cs| cs.module == module && cs.name == name && cs.arity == arity);
            used.then(|| format!("{} is a builtin called in {module}", indicator_text(name, arity)))
        }
        Resolution::Unresolved => None,
    }
}
