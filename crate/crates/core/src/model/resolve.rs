use std::collections::HashMap;

use crate::syntax::{Goal, GoalKind, Item, Term, TermKind};

use super::builtins::{is_builtin, is_control};
use super::{CallSite, ImportSource, PredId, Program, Qualifier, Resolution, Warning};

pub(super) fn resolve_indicator(p: &Program, module: &str, name: &str, arity: usize) -> Resolution {
    if is_control(name, arity) {
        return Resolution::Control;
    }
    if p.is_defined(module, name, arity) {
        return Resolution::Pred(PredId::new(module, name, arity));
    }
    let mut open_import = None;
    if let Some(md) = p.module(module) {
        for imp in &md.imports {
            match &imp.source {
                ImportSource::Module(m) => {
                    if imp.imports(name, arity, p) {
                        return if p.is_defined(m, name, arity) {
                            Resolution::Pred(PredId::new(m, name, arity))
                        } else {
                            Resolution::External(m.clone())
                        };
                    }
                }
                ImportSource::Library(l) | ImportSource::Unknown(l) => match &imp.entries {
                    Some(list) if list.iter().any(|e| e.name == name && e.arity == arity) => {
                        return Resolution::External(l.clone())
                    }
                    None if open_import.is_none() => open_import = Some(l.clone()),
                    _ => {}
                },
            }
        }
    }
    if module != "user" && p.is_defined("user", name, arity) {
        return Resolution::Pred(PredId::new("user", name, arity));
    }
    if is_builtin(name, arity) {
        return Resolution::Builtin;
    }
    match open_import {
        Some(l) => Resolution::External(l),
        None => Resolution::Unresolved,
    }
}

pub(super) fn resolve_goal(p: &Program, module: &str, goal: &Term) -> Resolution {
    match &goal.kind {
        TermKind::Compound(f, args) if f == ":" && args.len() == 2 => match args[0].atom_name() {
            Some(m) if p.module(m).is_some() => resolve_goal(p, m, &args[1]),
            Some(m) => Resolution::External(m.to_string()),
            None => Resolution::Unresolved,
        },
        _ => match goal.functor() {
            Some((name, arity)) => resolve_indicator(p, module, name, arity),
            None => Resolution::Unresolved,
        },
    }
}

struct Collector<'p> {
    p: &'p Program,
    calls: Vec<CallSite>,
    warnings: Vec<Warning>,
    caller: Option<PredId>,
    file: usize,
    item: usize,
}

impl Collector<'_> {
    fn walk(&mut self, g: &Goal, module: &str) {
        match &g.kind {
            GoalKind::Conj(a, b) | GoalKind::Disj(a, b) => {
                self.walk(a, module);
                self.walk(b, module);
            }
            GoalKind::IfThenElse {
                cond, then, else_, ..
            } => {
                self.walk(cond, module);
                self.walk(then, module);
                self.walk(else_, module);
            }
            GoalKind::Naf(inner) => self.walk(inner, module),
            GoalKind::Cut => {}
            GoalKind::Call(t) => self.visit(t, module, None, None),
        }
    }

    fn unresolved_meta(&mut self, goal: String, t: &Term) {
        self.warnings.push(Warning::UnresolvedMeta {
            caller: self.caller.as_ref().map(ToString::to_string),
            goal,
            file: self.p.files[self.file].path.clone(),
            span: t.span,
        });
    }

    fn visit(&mut self, t: &Term, module: &str, extra: Option<usize>, qualifier: Option<Qualifier>) {
        if t.is_var() {
            self.unresolved_meta("call/1".into(), t);
            return;
        }
        if t.is_functor(":", 2) {
            let (m, g) = (&t.args()[0], &t.args()[1]);
            match m.atom_name() {
                Some(name) => {
                    let q = Qualifier {
                        module: name.to_string(),
                        span: t.span,
                        module_span: m.span,
                    };
                    self.visit(g, name, extra, Some(q));
                }
                None => self.unresolved_meta(":/2".into(), t),
            }
            return;
        }
        let Some((name, n)) = t.functor() else { return };
        if is_control(name, n) && extra.unwrap_or(0) == 0 {
            self.walk(&Goal::from_term(t), module);
            return;
        }
        let arity = n + extra.unwrap_or(0);
        let resolution = match &qualifier {
            Some(q) if self.p.module(&q.module).is_none() => Resolution::External(q.module.clone()),
            _ => resolve_indicator(self.p, module, name, arity),
        };
        if resolution == Resolution::Unresolved {
            self.warnings.push(Warning::UndefinedCall {
                caller: self.caller.as_ref().map(ToString::to_string),
                goal: format!("{}/{}", crate::syntax::atom_text(name), arity),
                file: self.p.files[self.file].path.clone(),
                span: t.span,
            });
        }
        self.calls.push(CallSite {
            caller: self.caller.clone(),
            file: self.file,
            item: self.item,
            module: module.to_string(),
            term: t.clone(),
            qualifier,
            name: name.to_string(),
            arity,
            resolution,
            meta_extra: extra,
        });
        if extra.unwrap_or(0) != 0 {
            return;
        }
        let Some(spec) = self.p.meta_spec(name, arity).cloned() else {
            return;
        };
        for ma in &spec.args {
            let mut a = &t.args()[ma.pos - 1];
            if name == "bagof" || name == "setof" || name == "aggregate_all" {
                while a.is_functor("^", 2) {
                    a = &a.args()[1];
                }
            }
            if a.is_var() {
                self.unresolved_meta(format!("{}/{}", crate::syntax::atom_text(name), arity), a);
            } else {
                self.visit(a, module, Some(ma.extra), None);
            }
        }
    }
}

pub(super) fn collect_calls(p: &Program) -> (Vec<CallSite>, Vec<Warning>) {
    let mut c = Collector {
        p,
        calls: Vec::new(),
        warnings: Vec::new(),
        caller: None,
        file: 0,
        item: 0,
    };
    for (fid, f) in p.files.iter().enumerate() {
        for (item, it) in f.parsed.items.iter().enumerate() {
            c.file = fid;
            c.item = item;
            match it {
                Item::Clause(cl) => {
                    let (name, arity) = cl.head.functor().unwrap_or(("", 0));
                    c.caller = Some(PredId::new(&f.module, name, arity));
                    c.walk(&cl.body, &f.module);
                }
                Item::Directive { term, .. } => {
                    if term.is_functor("initialization", 1) || term.is_functor("initialization", 2) {
                        c.caller = None;
                        c.walk(&Goal::from_term(&term.args()[0]), &f.module);
                    }
                }
            }
        }
    }
    (c.calls, c.warnings)
}

pub(super) fn ambiguity_warnings(p: &Program) -> Vec<Warning> {
    let mut out = Vec::new();
    for md in &p.modules {
        let mut first: HashMap<(String, usize), String> = HashMap::new();
        for imp in &md.imports {
            let ImportSource::Module(src) = &imp.source else { continue };
            let provided: Vec<(String, usize)> = match &imp.entries {
                Some(list) => list.iter().map(|e| (e.name.clone(), e.arity)).collect(),
                None => p
                    .module(src)
                    .map(|m| {
                        m.exports
                            .iter()
                            .filter(|e| !e.is_op)
                            .map(|e| (e.name.clone(), e.arity))
                            .collect()
                    })
                    .unwrap_or_default(),
            };
            for key in provided {
                match first.get(&key) {
                    Some(prev) if prev != src => out.push(Warning::AmbiguousImport {
                        module: md.name.clone(),
                        indicator: format!("{}/{}", crate::syntax::atom_text(&key.0), key.1),
                        chosen: prev.clone(),
                        other: src.clone(),
                    }),
                    Some(_) => {}
                    None => {
                        first.insert(key, src.clone());
                    }
                }
            }
        }
    }
    out
}
