use std::collections::{BTreeMap, BTreeSet};

use crate::analysis::{dead_predicates, far, hideable_exports, ArgPos, Location};
use crate::edit::{manifest_name, EditSet, SemanticsFlag};
use crate::model::builtins::is_builtin;
use crate::model::{ClauseRef, Indicator, PredId, Program};
use crate::syntax::{Span, Term};

use super::util::{
    clause_path, clause_vars, declared_indicators, definition_clash, edit_list, fresh_var, indicator_text,
    roots_naming, ArgPlan, Rewriter,
};
use super::TransformError;

pub(crate) fn builtin_rename_error(spec: &str) -> Option<TransformError> {
    let ind = Indicator::parse(spec).ok()?;
    is_builtin(&ind.name, ind.arity).then(|| TransformError::RenamesBuiltin {
        name: ind.to_string(),
        hint: format!(
            "extract the calls into a wrapper predicate with the new name instead (extract_predicate on a single {} goal)",
            ind
        ),
    })
}

fn check_defined(p: &Program, id: &PredId) -> Result<(), TransformError> {
    if p.pred(id).is_none() {
        return Err(TransformError::UnknownPredicate(id.to_string()));
    }
    Ok(())
}

/// Modules whose goals can see `id` unqualified.
fn visible_in(p: &Program, id: &PredId) -> BTreeSet<String> {
    let mut out = BTreeSet::from([id.module.clone()]);
    for md in &p.modules {
        if md.imports.iter().any(|imp| {
            imp.source_module() == Some(id.module.as_str()) && imp.imports(&id.name, id.arity, p)
        }) {
            out.insert(md.name.clone());
        }
    }
    out
}

/// Edits every export/import entry and declaration naming `id` to `new`.
fn rewrite_interface(rw: &mut Rewriter, id: &PredId, new: &str, new_arity: usize) {
    let p = rw.p;
    let text = indicator_text(new, new_arity);
    if let Some(md) = p.module(&id.module) {
        let path = p.files[md.file].path.clone();
        for e in &md.exports {
            if !e.is_op && e.name == id.name && e.arity == id.arity {
                if let Some(s) = e.span {
                    rw.put(&path, s, text.clone());
                }
            }
        }
        for &f in &md.files {
            let fpath = p.files[f].path.clone();
            for (_, s, n, a) in declared_indicators(p, f) {
                if n == id.name && a == id.arity {
                    rw.put(&fpath, s, text.clone());
                }
            }
        }
    }
    for md in &p.modules {
        for imp in &md.imports {
            if imp.source_module() != Some(id.module.as_str()) {
                continue;
            }
            let path = p.files[imp.file].path.clone();
            for e in imp.entries.iter().flatten() {
                if e.name == id.name && e.arity == id.arity {
                    if let Some(s) = e.span {
                        rw.put(&path, s, text.clone());
                    }
                }
            }
        }
    }
    let mname = manifest_name(p);
    for (s, ind) in roots_naming(p, id) {
        let new_ind = Indicator {
            module: ind.module.clone(),
            name: new.to_string(),
            arity: new_arity,
        };
        rw.put(&mname, s, new_ind.to_string());
    }
}

pub fn rename_predicate(p: &Program, id: &PredId, new: &str) -> Result<EditSet, TransformError> {
    if p.pred(id).is_none() {
        if let Some(e) = builtin_rename_error(&id.indicator()) {
            return Err(e);
        }
        return Err(TransformError::UnknownPredicate(id.to_string()));
    }
    if new == id.name {
        return Ok(EditSet::new(p.version));
    }
    if new.is_empty() {
        return Err(TransformError::BadParams("empty predicate name".into()));
    }
    let mut rw = Rewriter::new(p);
    for m in visible_in(p, id) {
        if let Some(why) = definition_clash(p, &m, new, id.arity) {
            return Err(TransformError::NameClash(why));
        }
        if is_builtin(new, id.arity) {
            rw.es.annotate(format!(
                "{} now shadows the builtin of the same name in {m}",
                indicator_text(new, id.arity)
            ));
        }
    }
    for (c, clause) in p.clauses_of(id) {
        rw.rename_term(&clause_path(p, c), &clause.head, new);
    }
    for cs in p.calls_to(id) {
        rw.rename_term(&p.files[cs.file].path, &cs.term, new);
    }
    rewrite_interface(&mut rw, id, new, id.arity);
    Ok(rw.finish())
}

fn in_filter(filter: Option<&[Location]>, file: &str, span: Span) -> bool {
    match filter {
        None => true,
        Some(list) => list.iter().any(|l| l.file == file && l.start <= span.start && span.end <= l.end),
    }
}

/// Renames non-call occurrences of the functor `name/arity`.
pub fn rename_functor(
    p: &Program,
    name: &str,
    arity: usize,
    new: &str,
    filter: Option<&[Location]>,
) -> Result<EditSet, TransformError> {
    if new.is_empty() {
        return Err(TransformError::BadParams("empty functor name".into()));
    }
    let mut rw = Rewriter::new(p);
    if new == name {
        return Ok(rw.finish());
    }
    for (fid, f) in p.files.iter().enumerate() {
        for (item, it) in f.parsed.items.iter().enumerate() {
            let Some(clause) = it.as_clause() else { continue };
            let c = ClauseRef { file: fid, item };
            let mut calls: BTreeSet<Span> = p.calls_in(c).filter_map(|cs| cs.span()).collect();
            calls.extend(clause.head.span);
            let mut roots: Vec<&Term> = clause.head.args().iter().collect();
            clause.body.for_each_term(&mut |t| roots.push(t));
            for t in roots {
                rename_data(&mut rw, &f.path, t, &calls, name, arity, new, filter);
            }
        }
    }
    if filter.is_some() {
        rw.es.flag(SemanticsFlag::Conditional);
        rw.es.annotate("only the selected occurrences are renamed; terms flowing between renamed and unrenamed code no longer unify");
    }
    Ok(rw.finish())
}

#[allow(clippy::too_many_arguments)]
fn rename_data(
    rw: &mut Rewriter,
    file: &str,
    t: &Term,
    calls: &BTreeSet<Span>,
    name: &str,
    arity: usize,
    new: &str,
    filter: Option<&[Location]>,
) {
    for a in t.args() {
        rename_data(rw, file, a, calls, name, arity, new, filter);
    }
    let Some(span) = t.span else { return };
    if calls.contains(&span) {
        return;
    }
    let matches = match t.functor() {
        Some((n, a)) => n == name && a == arity && (a > 0 || t.atom_name().is_some()),
        None => false,
    };
    if matches && in_filter(filter, file, span) {
        rw.rename_term(file, t, new);
    }
}

fn check_meta_partial(p: &Program, ids: &BTreeSet<&PredId>) -> Result<(), TransformError> {
    for id in ids {
        if p.calls_to(id).any(|cs| cs.meta_extra.unwrap_or(0) > 0) {
            return Err(TransformError::NotApplicable(format!(
                "{id} is called through a meta-predicate that supplies some of its arguments"
            )));
        }
    }
    Ok(())
}

/// `perm[k]` is the 1-based old position that moves to new position `k+1`.
pub fn reorder_arguments(p: &Program, id: &PredId, perm: &[usize]) -> Result<EditSet, TransformError> {
    check_defined(p, id)?;
    let n = id.arity;
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (1..=n).collect::<Vec<_>>() {
        return Err(TransformError::NotAPermutation(
            n,
            perm.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
        ));
    }
    let mut rw = Rewriter::new(p);
    if perm.iter().enumerate().all(|(k, &v)| v == k + 1) {
        return Ok(rw.finish());
    }
    check_meta_partial(p, &BTreeSet::from([id]))?;
    let zero: Vec<usize> = perm.iter().map(|v| v - 1).collect();
    let mut terms: Vec<(String, &Term)> = Vec::new();
    for (c, clause) in p.clauses_of(id) {
        terms.push((clause_path(p, c), &clause.head));
    }
    for cs in p.calls_to(id) {
        terms.push((p.files[cs.file].path.clone(), &cs.term));
    }
    // innermost first, so enclosing rewrites absorb nested ones
    terms.sort_by_key(|(_, t)| t.span.map_or(0, |s| s.len()));
    for (file, t) in terms {
        rw.rewrite_term(&file, t, None, ArgPlan::Permute(&zero));
    }
    if p.is_root(id) {
        rw.es.annotate(format!("{id} is an entry point; external callers must be updated by hand"));
    }
    Ok(rw.finish())
}

pub fn remove_arguments(p: &Program, positions: &BTreeSet<ArgPos>) -> Result<EditSet, TransformError> {
    let mut rw = Rewriter::new(p);
    if positions.is_empty() {
        return Ok(rw.finish());
    }
    let erasable = far(p);
    let mut by_pred: BTreeMap<&PredId, BTreeSet<usize>> = BTreeMap::new();
    for a in positions {
        check_defined(p, &a.pred)?;
        if a.index == 0 || a.index > a.pred.arity || !erasable.contains(a) {
            return Err(TransformError::NotErasable(a.pred.to_string(), a.index));
        }
        by_pred.entry(&a.pred).or_default().insert(a.index - 1);
    }
    let mut targets: BTreeSet<PredId> = BTreeSet::new();
    for (id, set) in &by_pred {
        let new_id = PredId::new(&id.module, &id.name, id.arity - set.len());
        let taken_by_other = p.pred(&new_id).is_some() && !by_pred.contains_key(&new_id);
        if taken_by_other || !targets.insert(new_id.clone()) {
            return Err(TransformError::ArityCollision(new_id.to_string()));
        }
        for m in visible_in(p, id) {
            if m != id.module && definition_clash(p, &m, &id.name, new_id.arity).is_some() {
                return Err(TransformError::ArityCollision(format!(
                    "{} in {m}",
                    indicator_text(&id.name, new_id.arity)
                )));
            }
        }
    }
    let mut terms: Vec<(String, &Term, &BTreeSet<usize>)> = Vec::new();
    for (id, set) in &by_pred {
        for (c, clause) in p.clauses_of(id) {
            terms.push((clause_path(p, c), &clause.head, set));
        }
        for cs in p.calls_to(id) {
            terms.push((p.files[cs.file].path.clone(), &cs.term, set));
        }
    }
    terms.sort_by_key(|(_, t, _)| t.span.map_or(0, |s| s.len()));
    for (file, t, set) in &terms {
        rw.rewrite_term(file, t, None, ArgPlan::Remove(set));
    }
    // head variables whose last surviving occurrence is now alone
    for (id, set) in &by_pred {
        for (c, clause) in p.clauses_of(id) {
            let file = clause_path(p, c);
            let removed_vars: BTreeSet<&str> = set
                .iter()
                .filter_map(|&i| clause.head.args()[i].var_name())
                .filter(|v| *v != "_")
                .collect();
            for v in removed_vars {
                let mut surviving = var_spans(&clause.head, v, Some(set));
                let calls: BTreeMap<Span, &BTreeSet<usize>> = p
                    .calls_in(c)
                    .filter_map(|cs| {
                        let s = cs.span()?;
                        let q = cs.resolution.pred()?;
                        by_pred.get(q).map(|set| (s, set))
                    })
                    .collect();
                let mut body_terms: Vec<&Term> = Vec::new();
                clause.body.for_each_term(&mut |t| body_terms.push(t));
                for t in body_terms {
                    let skip = t.span.and_then(|s| calls.get(&s)).copied();
                    surviving.extend(var_spans(t, v, skip));
                }
                if surviving.len() == 1 {
                    rw.put(&file, surviving[0], "_");
                }
            }
        }
    }
    for (id, set) in &by_pred {
        rewrite_interface(&mut rw, id, &id.name, id.arity - set.len());
    }
    Ok(rw.finish())
}

/// Threads a variable from `caller` down to `callee` through every
/// predicate on a call path between them.
pub fn add_argument(
    p: &Program,
    caller: &PredId,
    callee: &PredId,
    seed: &str,
    position: Option<usize>,
    clause: Option<usize>,
) -> Result<EditSet, TransformError> {
    check_defined(p, caller)?;
    check_defined(p, callee)?;
    if caller == callee {
        return Err(TransformError::BadParams("caller and callee must differ".into()));
    }
    if !seed.starts_with(|c: char| c.is_uppercase() || c == '_') || seed == "_" {
        return Err(TransformError::BadParams(format!("`{seed}` is not a variable name")));
    }
    let down = p.pdg.reachable_from([caller]);
    if !down.contains(callee) {
        return Err(TransformError::NoPath(caller.to_string(), callee.to_string()));
    }
    let up = p.pdg.reaching([callee]);
    let members: BTreeSet<PredId> = down.intersection(&up).filter(|q| *q != caller).cloned().collect();
    let caller_clauses: Vec<(ClauseRef, usize)> = p
        .clauses_of(caller)
        .enumerate()
        .filter(|(k, (_, c))| clause.is_none_or(|want| want == k + 1) && c.body.count_var(seed) > 0)
        .map(|(k, (c, _))| (c, k + 1))
        .collect();
    if caller_clauses.is_empty() {
        return Err(TransformError::VariableNotFound(seed.to_string(), caller.to_string()));
    }
    let selected: BTreeSet<ClauseRef> = caller_clauses.iter().map(|(c, _)| *c).collect();
    for q in &members {
        if p.pred(q).is_some_and(|d| d.dynamic) {
            return Err(TransformError::NotApplicable(format!("{q} is dynamic")));
        }
        if let Some(pos) = position {
            if pos == 0 || pos > q.arity + 1 {
                return Err(TransformError::BadParams(format!("position {pos} out of range for {q}")));
            }
        }
        let new_id = PredId::new(&q.module, &q.name, q.arity + 1);
        if p.pred(&new_id).is_some() {
            return Err(TransformError::ArityCollision(new_id.to_string()));
        }
    }
    check_meta_partial(p, &members.iter().collect())?;
    let mut rw = Rewriter::new(p);
    let at = |q: &PredId| position.map_or(q.arity, |k| k - 1);
    // fresh head variable per member clause
    let mut head_var: BTreeMap<ClauseRef, String> = BTreeMap::new();
    for q in &members {
        for (c, cl) in p.clauses_of(q) {
            let v = fresh_var(seed, &clause_vars(cl));
            head_var.insert(c, v);
        }
    }
    let mut terms: Vec<(String, &Term, String)> = Vec::new();
    for q in &members {
        for (c, cl) in p.clauses_of(q) {
            terms.push((clause_path(p, c), &cl.head, head_var[&c].clone()));
        }
        for cs in p.calls_to(q) {
            let file = p.files[cs.file].path.clone();
            let from = cs.clause();
            let arg = match (&cs.caller, from) {
                (Some(k), Some(c)) if k == caller && selected.contains(&c) => seed.to_string(),
                (Some(k), Some(c)) if members.contains(k) => head_var[&c].clone(),
                _ => {
                    let who = cs.caller.as_ref().map_or("a directive".to_string(), ToString::to_string);
                    rw.es.annotate(format!("call to {q} from {who} is outside the threading path and receives `_`"));
                    "_".to_string()
                }
            };
            terms.push((file, &cs.term, arg));
        }
    }
    terms.sort_by_key(|(_, t, _)| t.span.map_or(0, |s| s.len()));
    for (file, t, v) in terms {
        let q = members
            .iter()
            .find(|q| t.functor().is_some_and(|(n, a)| n == q.name && a == q.arity))
            .unwrap();
        rw.rewrite_term(&file, t, None, ArgPlan::Insert(at(q), v));
    }
    for q in &members {
        rewrite_interface(&mut rw, q, &q.name, q.arity + 1);
        if p.is_root(q) {
            rw.es.annotate(format!("{q} is an entry point and changes arity"));
        }
    }
    Ok(rw.finish())
}

pub fn remove_dead(p: &Program, targets: &[PredId], force: bool) -> Result<EditSet, TransformError> {
    let mut rw = Rewriter::new(p);
    if targets.is_empty() {
        return Ok(rw.finish());
    }
    let dead = match dead_predicates(p) {
        Ok(d) => d,
        Err(e) if !force => return Err(TransformError::NotApplicable(e.to_string())),
        Err(_) => BTreeSet::new(),
    };
    let targets: BTreeSet<&PredId> = targets.iter().collect();
    for t in &targets {
        check_defined(p, t)?;
        if !dead.contains(*t) {
            if !force {
                return Err(TransformError::NotDead(t.to_string()));
            }
            rw.es.annotate(format!("{t} is not dead; removed on request"));
            rw.es.flag(SemanticsFlag::Changing);
        }
    }
    for t in &targets {
        for (c, clause) in p.clauses_of(t) {
            rw.delete_item(&clause_path(p, c), clause.span);
        }
    }
    drop_interface_entries(&mut rw, &targets);
    Ok(rw.finish())
}

/// Removes export and import entries for predicates that disappear.
fn drop_interface_entries(rw: &mut Rewriter, gone: &BTreeSet<&PredId>) {
    let p = rw.p;
    for md in &p.modules {
        if let Some(decl) = &md.decl {
            let remove: BTreeSet<usize> = md
                .exports
                .iter()
                .filter(|e| !e.is_op && gone.contains(&PredId::new(&md.name, &e.name, e.arity)))
                .filter_map(|e| decl.element_spans.iter().position(|s| Some(*s) == e.span))
                .collect();
            if let Some(ls) = decl.list_span {
                edit_list(rw, &p.files[md.file].path.clone(), ls, &decl.element_spans, &remove, &[]);
            }
        }
        for imp in &md.imports {
            let (Some(src), Some(entries)) = (imp.source_module(), &imp.entries) else { continue };
            let remove: BTreeSet<usize> = entries
                .iter()
                .filter(|e| gone.contains(&PredId::new(src, &e.name, e.arity)))
                .filter_map(|e| imp.element_spans.iter().position(|s| Some(*s) == e.span))
                .collect();
            let path = p.files[imp.file].path.clone();
            if !remove.is_empty() && remove.len() == imp.element_spans.len() {
                rw.delete_item(&path, imp.span);
            } else if let Some(ls) = imp.list_span {
                edit_list(rw, &path, ls, &imp.element_spans, &remove, &[]);
            }
        }
    }
}

pub fn hide_predicates(p: &Program, targets: &[PredId], force: bool) -> Result<EditSet, TransformError> {
    let mut rw = Rewriter::new(p);
    let hideable: BTreeSet<PredId> = hideable_exports(p).into_iter().map(|h| h.pred).collect();
    let mut by_module: BTreeMap<&str, BTreeSet<(String, usize)>> = BTreeMap::new();
    for t in targets {
        let md = p
            .module(&t.module)
            .ok_or_else(|| TransformError::UnknownModule(t.module.clone()))?;
        if !md.exports(&t.name, t.arity) {
            return Err(TransformError::NotExported(t.to_string()));
        }
        if !hideable.contains(t) {
            let why = if p.is_root(t) {
                "it is an entry point"
            } else {
                "other modules use it"
            };
            if !force {
                return Err(TransformError::NotHideable(t.to_string(), why.into()));
            }
            rw.es.annotate(format!("{t} is hidden although {why}"));
            rw.es.flag(SemanticsFlag::Changing);
        }
        by_module.entry(&t.module).or_default().insert((t.name.clone(), t.arity));
    }
    for (m, set) in by_module {
        let md = p.module(m).unwrap();
        let Some(decl) = &md.decl else { continue };
        let Some(ls) = decl.list_span else { continue };
        let remove: BTreeSet<usize> = md
            .exports
            .iter()
            .filter(|e| !e.is_op && set.contains(&(e.name.clone(), e.arity)))
            .filter_map(|e| decl.element_spans.iter().position(|s| Some(*s) == e.span))
            .collect();
        edit_list(&mut rw, &p.files[md.file].path.clone(), ls, &decl.element_spans, &remove, &[]);
    }
    Ok(rw.finish())
}

fn var_spans(t: &Term, v: &str, skip: Option<&BTreeSet<usize>>) -> Vec<Span> {
    let mut out = Vec::new();
    for (k, a) in t.args().iter().enumerate() {
        if skip.is_some_and(|s| s.contains(&k)) {
            continue;
        }
        a.for_each_var(&mut |x| {
            if x.var_name() == Some(v) {
                out.extend(x.span);
            }
        });
    }
    if skip.is_none() && t.var_name() == Some(v) {
        out.extend(t.span);
    }
    out
}
