use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::analysis::{duplicate_groups, unused_imports, Location};
use crate::edit::{manifest_name, EditSet, FileOp, SemanticsFlag};
use crate::model::{ClauseRef, Indicator, PredId, Program, Resolution};
use crate::syntax::{atom_text, Span};

use super::util::{
    clause_path, cycle_through, definition_clash, file_of, import_graph, indicator_text, list_deletions, manifest_roots,
    roots_naming, Interface, Rewriter,
};
use super::TransformError;

/// What to do with a group of duplicate predicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DupStrategy {
    /// Keep the named member and point every use of the others at it.
    Keep { keep: String },
    /// Move one copy into a new module and delete the rest.
    ExtractTo { module: String, file: String },
}

fn module_def<'a>(p: &'a Program, name: &str) -> Result<&'a crate::model::ModuleDef, TransformError> {
    p.module(name).ok_or_else(|| TransformError::UnknownModule(name.to_string()))
}

fn whole(text: &str) -> Span {
    Span::new(0, text.len())
}

fn rewrite_root_modules(rw: &mut Rewriter, rename: impl Fn(&Indicator) -> Option<String>) {
    let mname = manifest_name(rw.p);
    for (s, ind) in manifest_roots(rw.p) {
        if let Some(m) = rename(&ind) {
            let new = Indicator {
                module: Some(m),
                ..ind
            };
            rw.put(&mname, s, new.to_string());
        }
    }
}

pub fn rename_module(p: &Program, module: &str, new: &str, file: Option<&str>) -> Result<EditSet, TransformError> {
    let md = module_def(p, module)?;
    let path = p.files[md.file].path.clone();
    let file = file.filter(|f| *f != path);
    if new == module && file.is_none() {
        return Ok(EditSet::new(p.version));
    }
    if new != module && p.module(new).is_some() {
        return Err(TransformError::NameClash(format!("module {new} already exists")));
    }
    if let Some(f) = file {
        if p.file_index(f).is_some() {
            return Err(TransformError::BadParams(format!("file {f} already exists")));
        }
    }
    let Some(decl) = &md.decl else {
        return Err(TransformError::NotApplicable(format!("{module} has no module declaration")));
    };
    let mut rw = Rewriter::new(p);
    if new != module {
        if let Some(s) = decl.name_span {
            rw.put(&path, s, atom_text(new));
        }
    }
    for other in &p.modules {
        for imp in &other.imports {
            if imp.source_module() != Some(module) {
                continue;
            }
            let by_name = imp.spec.atom_name() == Some(module);
            if let Some(s) = imp.spec_span.filter(|_| by_name || file.is_some()) {
                rw.put(&p.files[imp.file].path, s, atom_text(new));
            }
        }
    }
    for cs in &p.calls {
        if let Some(q) = cs.qualifier.as_ref().filter(|q| q.module == module) {
            if let Some(s) = q.module_span {
                rw.put(&p.files[cs.file].path, s, atom_text(new));
            }
        }
    }
    rewrite_root_modules(&mut rw, |ind| (ind.module.as_deref() == Some(module)).then(|| new.to_string()));
    if let Some(f) = file {
        rw.es.file_ops.push(FileOp::Rename {
            from: path,
            to: f.to_string(),
        });
    }
    Ok(rw.finish())
}

/// The module a call site will live in once `moved` predicates change home.
fn home_of(cs: &crate::model::CallSite, moved: &BTreeMap<PredId, String>) -> String {
    cs.caller
        .as_ref()
        .and_then(|c| moved.get(c))
        .cloned()
        .unwrap_or_else(|| cs.module.clone())
}

/// Re-points every use of predicates that change module. Returns those that
/// must be exported from their new home.
fn relink(
    rw: &mut Rewriter,
    iface: &mut Interface,
    moved: &BTreeMap<PredId, String>,
    skip_callers: &BTreeSet<PredId>,
) -> BTreeSet<PredId> {
    let p = rw.p;
    let mut export = BTreeSet::new();
    for cs in &p.calls {
        let Resolution::Pred(x) = &cs.resolution else { continue };
        let Some(nm) = moved.get(x) else { continue };
        if cs.caller.as_ref().is_some_and(|c| skip_callers.contains(c)) {
            continue;
        }
        let home = home_of(cs, moved);
        match &cs.qualifier {
            Some(q) => {
                if q.module == x.module {
                    if let Some(s) = q.module_span {
                        rw.put(&p.files[cs.file].path, s, atom_text(nm));
                    }
                }
            }
            None => iface.import(&home, nm, &x.name, x.arity),
        }
        if home != *nm {
            export.insert(x.clone());
        }
    }
    for (x, nm) in moved {
        for md in &p.modules {
            for imp in &md.imports {
                if imp.source_module() != Some(x.module.as_str()) {
                    continue;
                }
                let named = imp
                    .entries
                    .iter()
                    .flatten()
                    .any(|e| !e.is_op && e.name == x.name && e.arity == x.arity);
                if named {
                    iface.unimport(&md.name, &x.module, &x.name, x.arity);
                    if md.name != *nm {
                        iface.import(&md.name, nm, &x.name, x.arity);
                        export.insert(x.clone());
                    }
                }
            }
        }
        if p.module(&x.module).is_some_and(|m| m.exports(&x.name, x.arity)) {
            iface.unexport(&x.module, &x.name, x.arity);
            export.insert(x.clone());
        }
        if p.is_root(x) {
            export.insert(x.clone());
        }
        let mname = manifest_name(p);
        for (s, ind) in roots_naming(p, x) {
            if ind.module.is_some() {
                rw.put(&mname, s, Indicator::new(Some(nm), &x.name, x.arity).to_string());
            }
        }
    }
    export
}

/// What the clauses need once they live in module `home`: project imports
/// as (source, name, arity) and library import directives to copy.
fn clause_needs(
    p: &Program,
    clauses: &[ClauseRef],
    moved: &BTreeMap<PredId, String>,
    home: &str,
) -> (Vec<(String, String, usize)>, Vec<String>) {
    let mut imports = Vec::new();
    let mut directives: Vec<String> = Vec::new();
    let mut seen_decl = BTreeSet::new();
    for &c in clauses {
        for cs in p.calls_in(c) {
            if cs.qualifier.is_some() {
                continue;
            }
            match &cs.resolution {
                Resolution::Pred(y) => {
                    let src = moved.get(y).cloned().unwrap_or_else(|| y.module.clone());
                    let t = (src, y.name.clone(), y.arity);
                    if t.0 != home && !imports.contains(&t) {
                        imports.push(t);
                    }
                }
                Resolution::External(_) => {
                    let Some(md) = p.module(&cs.module) else { continue };
                    for (k, imp) in md.imports.iter().enumerate() {
                        if imp.source_module().is_none() && imp.imports(&cs.name, cs.arity, p) && seen_decl.insert(k) {
                            let text = imp.span.slice(p.file_text(imp.file)).to_string();
                            if !directives.contains(&text) {
                                directives.push(text);
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    (imports, directives)
}

fn module_header(name: &str, exports: &[String]) -> String {
    format!(":- module({}, [{}]).\n", atom_text(name), exports.join(", "))
}

fn import_lines(imports: &[(String, String, usize)], directives: &[String]) -> String {
    let mut by_src: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (s, n, a) in imports {
        by_src.entry(s).or_default().push(indicator_text(n, *a));
    }
    let mut out = String::new();
    for d in directives {
        out.push_str(d);
        out.push('\n');
    }
    for (s, list) in by_src {
        out.push_str(&format!(":- use_module({}, [{}]).\n", atom_text(s), list.join(", ")));
    }
    out
}

fn clause_texts(rw: &Rewriter, clauses: &[ClauseRef]) -> String {
    let p = rw.p;
    let mut out = String::new();
    let mut last: Option<PredId> = None;
    for &c in clauses {
        let id = p.clause_pred(c);
        if last.as_ref().is_some_and(|l| *l != id) {
            out.push('\n');
        }
        out.push_str(&rw.slice(&clause_path(p, c), p.clause(c).span));
        out.push('\n');
        last = Some(id);
    }
    out
}

fn note_cycles(rw: &mut Rewriter, edges: &[(String, String)]) {
    if let Some(path) = cycle_through(import_graph(rw.p), edges) {
        rw.es.annotate(format!("modules now import each other: {}", path.join(" -> ")));
    }
}

pub fn move_predicate(p: &Program, id: &PredId, target: &str) -> Result<EditSet, TransformError> {
    let def = p.pred(id).ok_or_else(|| TransformError::UnknownPredicate(id.to_string()))?;
    let tmd = module_def(p, target)?;
    if target == id.module {
        return Ok(EditSet::new(p.version));
    }
    if def.dynamic {
        return Err(TransformError::NotApplicable(format!("{id} is dynamic")));
    }
    if p.is_defined(target, &id.name, id.arity) {
        return Err(TransformError::NameClash(format!("{} is already defined in {target}", id.indicator())));
    }
    if let Some(why) = definition_clash(p, target, &id.name, id.arity) {
        let own = p.resolve(target, &crate::syntax::Term::compound(&id.name, vec![crate::syntax::Term::var("_"); id.arity]));
        if own.pred() != Some(id) {
            return Err(TransformError::NameClash(why));
        }
    }
    let mut rw = Rewriter::new(p);
    let mut iface = Interface::default();
    let moved = BTreeMap::from([(id.clone(), target.to_string())]);
    let clauses: Vec<ClauseRef> = def.clauses.clone();
    let (needs, directives) = clause_needs(p, &clauses, &moved, target);
    for (src, n, a) in &needs {
        iface.import(target, src, n, *a);
        if p.module(src).is_some_and(|m| !m.exports(n, *a)) {
            iface.export(src, n, *a);
            rw.es.annotate(format!("{} is now exported from {src} for {target}", indicator_text(n, *a)));
        }
    }
    let tpath = p.files[tmd.file].path.clone();
    let text = clause_texts(&rw, &clauses);
    for &c in &clauses {
        rw.delete_item(&clause_path(p, c), p.clause(c).span);
    }
    let export = relink(&mut rw, &mut iface, &moved, &BTreeSet::new());
    if export.contains(id) {
        iface.export(target, &id.name, id.arity);
    }
    let new_directives: Vec<String> = directives
        .into_iter()
        .filter(|d| {
            !tmd.imports
                .iter()
                .any(|imp| imp.span.slice(p.file_text(imp.file)) == d.as_str())
        })
        .collect();
    if !new_directives.is_empty() {
        let anchor = tmd.decl.as_ref().map_or(0, |d| d.span.end);
        let block: String = new_directives.iter().map(|d| format!("\n{d}")).collect();
        if anchor == 0 {
            rw.insert(&tpath, 0, format!("{}\n", block.trim_start()));
        } else {
            rw.insert(&tpath, anchor, block);
        }
    }
    let edges = iface.new_edges();
    iface.flush(&mut rw);
    rw.append(&tpath, &text);
    note_cycles(&mut rw, &edges);
    Ok(rw.finish())
}

pub fn split_module(
    p: &Program,
    module: &str,
    part_b: &[PredId],
    name_b: &str,
    file_b: &str,
) -> Result<EditSet, TransformError> {
    let md = module_def(p, module)?;
    if part_b.is_empty() {
        return Ok(EditSet::new(p.version));
    }
    for x in part_b {
        if x.module != module || p.pred(x).is_none() {
            return Err(TransformError::BadParams(format!("{x} is not defined in {module}")));
        }
    }
    let b: BTreeSet<&PredId> = part_b.iter().collect();
    let all_here: Vec<&PredId> = p.preds.keys().filter(|k| k.module == module).collect();
    if all_here.iter().all(|k| b.contains(k)) {
        return rename_module(p, module, name_b, Some(file_b));
    }
    if p.module(name_b).is_some() {
        return Err(TransformError::NameClash(format!("module {name_b} already exists")));
    }
    if p.file_index(file_b).is_some() {
        return Err(TransformError::BadParams(format!("file {file_b} already exists")));
    }
    if md.decl.is_none() {
        return Err(TransformError::NotApplicable(format!("{module} has no module declaration")));
    }
    let mut rw = Rewriter::new(p);
    let mut iface = Interface::default();
    let moved: BTreeMap<PredId, String> = part_b.iter().map(|x| (x.clone(), name_b.to_string())).collect();
    let clauses: Vec<ClauseRef> = p
        .preds
        .values()
        .filter(|d| b.contains(&d.id))
        .flat_map(|d| d.clauses.iter().copied())
        .collect();
    let (needs, directives) = clause_needs(p, &clauses, &moved, name_b);
    // original project imports of the module that the moved clauses use
    for (src, n, a) in &needs {
        if src == module && !md.exports(n, *a) {
            iface.export(module, n, *a);
        }
    }
    let export = relink(&mut rw, &mut iface, &moved, &BTreeSet::new());
    let text = clause_texts(&rw, &clauses);
    for &c in &clauses {
        rw.delete_item(&clause_path(p, c), p.clause(c).span);
    }
    let exports_b: Vec<String> = part_b
        .iter()
        .filter(|x| export.contains(*x))
        .map(|x| indicator_text(&x.name, x.arity))
        .collect();
    let mut edges = iface.new_edges();
    if needs.iter().any(|(s, _, _)| s == module) {
        edges.push((name_b.to_string(), module.to_string()));
    }
    let body = format!("{}{}\n{}", module_header(name_b, &exports_b), import_lines(&needs, &directives), text);
    iface.flush(&mut rw);
    rw.create(file_b, body.replace("\n\n\n", "\n\n"));
    if let Some(path) = cycle_through(import_graph(p), &edges) {
        rw.es.annotate(format!("{module} and {name_b} import each other: {}", path.join(" -> ")));
    }
    Ok(rw.finish())
}

pub fn merge_modules(p: &Program, modules: &[String], new: &str, file: &str) -> Result<EditSet, TransformError> {
    match modules {
        [] => return Err(TransformError::BadParams("no modules to merge".into())),
        [m] => {
            let md = module_def(p, m)?;
            let f = (p.files[md.file].path != file).then_some(file);
            return rename_module(p, m, new, f);
        }
        _ => {}
    }
    let set: BTreeSet<&str> = modules.iter().map(String::as_str).collect();
    let mut mds = Vec::new();
    for m in modules {
        let md = module_def(p, m)?;
        if md.decl.is_none() {
            return Err(TransformError::NotApplicable(format!("{m} has no module declaration")));
        }
        mds.push(md);
    }
    if !set.contains(new) && p.module(new).is_some() {
        return Err(TransformError::NameClash(format!("module {new} already exists")));
    }
    let merged_files: BTreeSet<usize> = mds.iter().flat_map(|m| m.files.iter().copied()).collect();
    if let Some(f) = p.file_index(file) {
        if !merged_files.contains(&f) {
            return Err(TransformError::BadParams(format!("file {file} belongs to another module")));
        }
    }
    let mut defined: BTreeMap<(&str, usize), &str> = BTreeMap::new();
    for id in p.preds.keys().filter(|k| set.contains(k.module.as_str())) {
        if let Some(other) = defined.insert((&id.name, id.arity), &id.module) {
            return Err(TransformError::DefinitionClash(format!(
                "{} is defined in both {other} and {}",
                indicator_text(&id.name, id.arity),
                id.module
            )));
        }
    }

    let mut rw = Rewriter::new(p);
    for cs in &p.calls {
        if let Some(q) = cs.qualifier.as_ref().filter(|q| set.contains(q.module.as_str())) {
            if let Some(s) = q.module_span {
                rw.put(&p.files[cs.file].path, s, atom_text(new));
            }
        }
    }
    for md in p.modules.iter().filter(|m| !set.contains(m.name.as_str())) {
        for imp in &md.imports {
            if imp.source_module().is_some_and(|s| set.contains(s)) {
                if let Some(s) = imp.spec_span {
                    rw.put(&p.files[imp.file].path, s, atom_text(new));
                }
            }
        }
    }
    rewrite_root_modules(&mut rw, |ind| {
        ind.module
            .as_deref()
            .filter(|m| set.contains(m))
            .map(|_| new.to_string())
    });

    let used_outside = |id: &PredId| {
        p.calls.iter().any(|cs| {
            !set.contains(cs.module.as_str()) && cs.resolution.pred() == Some(id)
        }) || p.modules.iter().filter(|m| !set.contains(m.name.as_str())).any(|m| {
            m.imports.iter().any(|imp| {
                imp.source_module() == Some(id.module.as_str())
                    && imp.entries.iter().flatten().any(|e| e.name == id.name && e.arity == id.arity)
            })
        })
    };
    let mut exports: Vec<String> = Vec::new();
    let mut dropped = Vec::new();
    for md in &mds {
        let text = p.file_text(md.file);
        for e in &md.exports {
            let id = PredId::new(&md.name, &e.name, e.arity);
            let keep = e.is_op || p.is_root(&id) || used_outside(&id);
            let t = e.span.map_or_else(|| indicator_text(&e.name, e.arity), |s| s.slice(text).to_string());
            if keep {
                if !exports.contains(&t) {
                    exports.push(t);
                }
            } else {
                dropped.push(t);
            }
        }
    }
    if !dropped.is_empty() {
        rw.es.annotate(format!("no longer exported (only used inside the merged module): {}", dropped.join(", ")));
    }

    let mut header_imports: Vec<String> = Vec::new();
    let mut bodies: Vec<String> = Vec::new();
    for md in &mds {
        let mut files = md.files.clone();
        files.sort_by_key(|f| *f != md.file);
        for f in files {
            let path = p.files[f].path.clone();
            for imp in md.imports.iter().filter(|i| i.file == f) {
                if !imp.source_module().is_some_and(|s| set.contains(s)) {
                    let t = rw.slice(&path, imp.span);
                    if !header_imports.contains(&t) {
                        header_imports.push(t);
                    }
                }
                rw.delete_item(&path, imp.span);
            }
            if let Some(d) = md.decl.as_ref().filter(|_| f == md.file) {
                rw.delete_item(&path, d.span);
            }
            let whole_text = rw.slice(&path, whole(p.file_text(f)));
            let trimmed = whole_text.trim();
            if !trimmed.is_empty() {
                bodies.push(format!("{trimmed}\n"));
            }
        }
    }
    let mut text = module_header(new, &exports);
    for h in &header_imports {
        text.push_str(h);
        text.push('\n');
    }
    for b in bodies {
        text.push('\n');
        text.push_str(&b);
    }
    for &f in &merged_files {
        rw.discard_file(&p.files[f].path.clone());
    }
    for &f in &merged_files {
        let path = p.files[f].path.clone();
        if path == file {
            rw.put(&path, whole(p.file_text(f)), text.clone());
        } else {
            rw.es.file_ops.push(FileOp::Delete { path });
        }
    }
    if p.file_index(file).is_none() {
        rw.create(file, text);
    }
    Ok(rw.finish())
}

pub fn remove_duplicates(p: &Program, group: &[PredId], strategy: &DupStrategy) -> Result<EditSet, TransformError> {
    let groups = duplicate_groups(p);
    let names: Vec<String> = group.iter().map(|g| g.to_string()).collect();
    let Some(full) = groups.iter().find(|g| group.iter().all(|m| g.contains(m))) else {
        return Err(TransformError::NotApplicable(format!(
            "{} do not form a duplicate group",
            names.join(", ")
        )));
    };
    if group.len() < 2 {
        return Ok(EditSet::new(p.version));
    }
    let mut rw = Rewriter::new(p);
    let mut iface = Interface::default();
    let mut moved: BTreeMap<PredId, String> = BTreeMap::new();
    let removed: BTreeSet<PredId>;
    let mut created: Option<(String, String, Vec<ClauseRef>, Vec<PredId>)> = None;
    match strategy {
        DupStrategy::Keep { keep } => {
            let k = super::util::find_pred(p, keep)?;
            if !group.contains(&k) {
                return Err(TransformError::BadParams(format!("{k} is not in the group")));
            }
            removed = group.iter().filter(|m| **m != k).cloned().collect();
            for m in &removed {
                moved.insert(m.clone(), k.module.clone());
            }
        }
        DupStrategy::ExtractTo { module, file } => {
            if p.module(module).is_some() {
                return Err(TransformError::NameClash(format!("module {module} already exists")));
            }
            if p.file_index(file).is_some() {
                return Err(TransformError::BadParams(format!("file {file} already exists")));
            }
            // duplicate groups twinned with this one through recursion
            let lead = &group[0];
            let cond = p.condensation();
            let scc = cond.scc_of(lead);
            let mut reps = Vec::new();
            let mut all = BTreeSet::new();
            for g in &groups {
                let twin = std::ptr::eq(g, full)
                    || g.iter().any(|m| m.module == lead.module && scc.is_some() && cond.scc_of(m) == scc);
                if !twin {
                    continue;
                }
                let members: Vec<&PredId> = if std::ptr::eq(g, full) { group.iter().collect() } else { g.iter().collect() };
                let rep = members.iter().find(|m| m.module == lead.module).copied().unwrap_or(members[0]);
                reps.push(rep.clone());
                for m in members {
                    all.insert(m.clone());
                    moved.insert(m.clone(), module.clone());
                }
            }
            let clauses: Vec<ClauseRef> = reps.iter().flat_map(|r| p.pred(r).unwrap().clauses.clone()).collect();
            removed = all.into_iter().filter(|m| !reps.contains(m)).collect();
            created = Some((module.clone(), file.clone(), clauses, reps));
        }
    }

    let mut export = relink(&mut rw, &mut iface, &moved, &removed);
    let mut edges = iface.new_edges();
    let mut new_text = None;
    if let Some((module, file, clauses, reps)) = &created {
        let (needs, directives) = clause_needs(p, clauses, &moved, module);
        for (src, n, a) in &needs {
            if reps.iter().any(|r| r.module == *src) && moved.keys().all(|m| m.module != *src || m.name != *n) {
                return Err(TransformError::ImportCycleCreated(format!(
                    "{module} would need {} from {src}, which imports {module}",
                    indicator_text(n, *a)
                )));
            }
            if p.module(src).is_some_and(|m| !m.exports(n, *a)) {
                iface.export(src, n, *a);
            }
            edges.push((module.clone(), src.clone()));
        }
        export.extend(reps.iter().cloned());
        let exports: Vec<String> = reps
            .iter()
            .filter(|r| export.contains(*r) || moved.keys().any(|m| m.name == r.name && m.arity == r.arity))
            .map(|r| indicator_text(&r.name, r.arity))
            .collect();
        let body = clause_texts(&rw, clauses);
        new_text = Some((
            file.clone(),
            format!("{}{}\n{}", module_header(module, &exports), import_lines(&needs, &directives), body),
        ));
        for r in reps {
            for (c, clause) in p.clauses_of(r) {
                rw.delete_item(&clause_path(p, c), clause.span);
            }
        }
    } else {
        for x in &removed {
            let k = &moved[x];
            if !p.module(k).is_some_and(|m| m.exports(&x.name, x.arity)) && export.contains(x) {
                iface.export(k, &x.name, x.arity);
            }
        }
    }
    if let Some(path) = cycle_through(import_graph(p), &edges) {
        return Err(TransformError::ImportCycleCreated(path.join(" -> ")));
    }
    for x in &removed {
        for (c, clause) in p.clauses_of(x) {
            rw.delete_item(&clause_path(p, c), clause.span);
        }
    }
    iface.flush(&mut rw);
    if let Some((file, text)) = new_text {
        rw.create(&file, text.replace("\n\n\n", "\n\n"));
    }
    Ok(rw.finish())
}

pub fn remove_import(p: &Program, loc: &Location) -> Result<EditSet, TransformError> {
    let fid = file_of(p, &loc.file)?;
    let sel = loc.span();
    let found = p
        .modules
        .iter()
        .flat_map(|m| m.imports.iter())
        .find(|imp| imp.file == fid && imp.span.covers(sel));
    let Some(imp) = found else {
        return Err(TransformError::NotApplicable(format!(
            "no import at {}@{}..{}",
            loc.file, loc.start, loc.end
        )));
    };
    let mut rw = Rewriter::new(p);
    let path = p.files[fid].path.clone();
    let entry = imp.element_spans.iter().position(|s| s.covers(sel));
    match entry {
        Some(i) if imp.element_spans.len() > 1 => {
            for s in list_deletions(&imp.element_spans, &BTreeSet::from([i])) {
                rw.delete(&path, s);
            }
        }
        _ => rw.delete_item(&path, imp.span),
    }
    let unused = unused_imports(p)
        .into_iter()
        .any(|u| u.file == path && u.item == imp.item && (u.entry.is_none() || u.entry == entry));
    if !unused {
        rw.es.flag(SemanticsFlag::Changing);
        rw.es.annotate("the removed import is still used; calls through it become unresolved");
    }
    Ok(rw.finish())
}
