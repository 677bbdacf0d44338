use std::collections::{BTreeMap, BTreeSet};

use crate::analysis::{alpha_normal, Location};
use crate::edit::{EditSet, SemanticsFlag};
use crate::model::builtins::{is_binding_free_test, negated_test};
use crate::model::{ClauseRef, PredId, Program, Resolution};
use crate::syntax::{render_clause, render_goal, render_term, render_term_at, Clause, Goal, GoalKind, RenderStyle, Span, Term};

use super::util::{
    clause_at, clause_path, clause_vars, column, definition_clash, file_of, fresh_var, indicator_text, rename_goal,
    Interface, Rewriter,
};
use super::TransformError;

/// Conjunction lists of a body, outermost first.
fn conj_lists(g: &Goal) -> Vec<Vec<&Goal>> {
    let mut out = Vec::new();
    let mut queue = vec![g];
    while let Some(g) = queue.pop() {
        let list = g.conjuncts();
        for c in &list {
            match &c.kind {
                GoalKind::Disj(a, b) => {
                    queue.push(a);
                    queue.push(b);
                }
                GoalKind::IfThenElse {
                    cond,
                    then,
                    else_,
                    implicit_else,
                } => {
                    queue.push(cond);
                    queue.push(then);
                    if !implicit_else {
                        queue.push(else_);
                    }
                }
                GoalKind::Naf(a) => queue.push(a),
                _ => {}
            }
        }
        out.push(list);
    }
    out
}

fn gap_is_clean(s: &str) -> bool {
    s.chars().all(|c| c.is_whitespace() || c == ',')
}

struct Run<'a> {
    clause: ClauseRef,
    goals: Vec<&'a Goal>,
    span: Span,
}

fn locate_run<'a>(p: &'a Program, loc: &Location) -> Result<Run<'a>, TransformError> {
    let fid = file_of(p, &loc.file)?;
    let sel = loc.span();
    let bad = |why: &str| TransformError::NonContiguousSelection(format!("{}@{}..{}: {why}", loc.file, loc.start, loc.end));
    let c = clause_at(p, fid, sel).ok_or_else(|| bad("not inside a clause"))?;
    let clause = p.clause(c);
    if clause.head.span.is_some_and(|h| h.start < sel.end && sel.start < h.end) {
        return Err(bad("overlaps the clause head"));
    }
    let text = p.file_text(fid);
    for list in conj_lists(&clause.body) {
        let spans: Vec<Option<Span>> = list.iter().map(|g| g.span).collect();
        let inside: Vec<usize> = (0..list.len())
            .filter(|&i| spans[i].is_some_and(|s| sel.covers(s)))
            .collect();
        if inside.is_empty() {
            continue;
        }
        let partial = spans.iter().flatten().any(|s| !sel.covers(*s) && s.start < sel.end && sel.start < s.end);
        if partial {
            continue;
        }
        let (i, j) = (inside[0], inside[inside.len() - 1]);
        if j - i + 1 != inside.len() {
            return Err(bad("goals are not adjacent"));
        }
        let (first, last) = (spans[i].unwrap(), spans[j].unwrap());
        if !gap_is_clean(&text[sel.start..first.start]) || !gap_is_clean(&text[last.end..sel.end]) {
            return Err(bad("selection extends beyond a goal run"));
        }
        return Ok(Run {
            clause: c,
            goals: list[i..=j].to_vec(),
            span: first.join(last),
        });
    }
    Err(bad("no complete goal inside the selection"))
}

fn has_cut(g: &Goal) -> bool {
    let mut found = false;
    g.walk(&mut |x| found |= matches!(x.kind, GoalKind::Cut));
    found
}

/// Replaces goal runs by calls to a new predicate defined from the first
/// run.
pub fn extract_predicate(
    p: &Program,
    occurrences: &[Location],
    name: &str,
    module: Option<&str>,
) -> Result<EditSet, TransformError> {
    if occurrences.is_empty() {
        return Err(TransformError::BadParams("no occurrence given".into()));
    }
    if name.is_empty() {
        return Err(TransformError::BadParams("empty predicate name".into()));
    }
    let runs = occurrences.iter().map(|l| locate_run(p, l)).collect::<Result<Vec<_>, _>>()?;
    for (k, r) in runs.iter().enumerate() {
        if r.goals.iter().any(|g| has_cut(g)) {
            return Err(TransformError::CutInSelection);
        }
        for o in &runs[..k] {
            if o.clause == r.clause && o.span.start < r.span.end && r.span.start < o.span.end {
                return Err(TransformError::OccurrenceMismatch("occurrences overlap".into()));
            }
        }
    }
    let ops = crate::syntax::OperatorTable::default();
    let terms: Vec<Vec<Term>> = runs.iter().map(|r| r.goals.iter().map(|g| g.to_term()).collect()).collect();
    let key = |ts: &[Term]| -> Vec<String> { alpha_normal(ts).iter().map(|t| render_term(t, &ops)).collect() };
    let k0 = key(&terms[0]);
    for (r, ts) in runs.iter().zip(&terms).skip(1) {
        if key(ts) != k0 {
            return Err(TransformError::OccurrenceMismatch(format!(
                "{} differs from the first occurrence",
                r.span.slice(p.file_text(r.clause.file)).trim()
            )));
        }
    }
    let mut shared_all: BTreeSet<usize> = BTreeSet::new();
    let mut vars_per: Vec<Vec<String>> = Vec::new();
    for (r, ts) in runs.iter().zip(&terms) {
        let refs: Vec<&Term> = ts.iter().collect();
        let (vars, shared) = crate::analysis::shared_vars(p.clause(r.clause), &refs);
        shared_all.extend(shared);
        vars_per.push(vars);
    }
    let params: Vec<String> = shared_all.iter().map(|&k| vars_per[0][k].clone()).collect();
    let arity = params.len();

    let first_module = p.files[runs[0].clause.file].module.clone();
    let target = module.map_or(first_module.clone(), str::to_string);
    let tmd = p.module(&target).ok_or_else(|| TransformError::UnknownModule(target.clone()))?;
    if p.is_defined(&target, name, arity) {
        return Err(TransformError::NameClash(format!(
            "{} is already defined in {target}",
            indicator_text(name, arity)
        )));
    }
    let mut modules: BTreeSet<String> = runs.iter().map(|r| p.files[r.clause.file].module.clone()).collect();
    modules.insert(target.clone());
    let mut rw = Rewriter::new(p);
    for m in &modules {
        if let Some(why) = definition_clash(p, m, name, arity) {
            return Err(TransformError::NameClash(why));
        }
        if crate::model::builtins::is_builtin(name, arity) {
            rw.es.annotate(format!(
                "{} shadows the builtin of the same name in {m}",
                indicator_text(name, arity)
            ));
        }
    }
    for r in &runs {
        let m = &p.files[r.clause.file].module;
        if *m == target {
            continue;
        }
        for cs in p.calls_in(r.clause).filter(|cs| cs.span().is_some_and(|s| r.span.covers(s))) {
            if p.resolve(&target, &cs.term) != cs.resolution && cs.qualifier.is_none() {
                return Err(TransformError::NotApplicable(format!(
                    "{} resolves differently in {target}",
                    indicator_text(&cs.name, cs.arity)
                )));
            }
        }
    }

    let tfile = p.files[tmd.file].path.clone();
    let tops = &p.files[tmd.file].ops;
    let head = Term::compound(name, params.iter().map(Term::var).collect());
    let body = Goal::conj(terms[0].iter().map(Goal::from_term).collect());
    let def = render_clause(&Clause::synthetic(head, body), tops, &RenderStyle::default());
    let mut iface = Interface::default();
    for (k, r) in runs.iter().enumerate() {
        let args: Vec<Term> = shared_all.iter().map(|&i| Term::var(vars_per[k][i].clone())).collect();
        let call = render_term_at(&Term::compound(name, args), &p.files[r.clause.file].ops, 999);
        rw.put(&clause_path(p, r.clause), r.span, call);
        let m = &p.files[r.clause.file].module;
        if *m != target && tmd.decl.is_some() {
            iface.export(&target, name, arity);
            iface.import(m, &target, name, arity);
        }
    }
    iface.flush(&mut rw);
    rw.append(&tfile, &def);
    Ok(rw.finish())
}

fn first_occurrence_map(head: &Term) -> BTreeMap<String, usize> {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut map = BTreeMap::new();
    for (i, a) in head.args().iter().enumerate() {
        match a.var_name() {
            Some("_") => {}
            Some(v) => {
                if seen.insert(v.to_string()) {
                    map.insert(v.to_string(), i);
                }
            }
            None => seen.extend(a.variables()),
        }
    }
    map
}

/// A variable name for argument `i` taken from the clauses or the callers.
fn borrowed_name(p: &Program, id: &PredId, i: usize, clauses: &[&Clause]) -> String {
    for c in clauses {
        if let Some(v) = c.head.args()[i].var_name().filter(|v| *v != "_") {
            return v.to_string();
        }
    }
    for cs in p.calls_to(id) {
        if cs.meta_extra.unwrap_or(0) > 0 {
            continue;
        }
        if let Some(v) = cs.term.args().get(i).and_then(|a| a.var_name()).filter(|v| *v != "_") {
            return v.to_string();
        }
    }
    format!("V{}", i + 1)
}

fn count_cuts(g: &Goal) -> usize {
    let mut n = 0;
    g.walk(&mut |x| {
        if matches!(x.kind, GoalKind::Cut) {
            n += 1
        }
    });
    n
}

/// Folds a two-clause predicate with a neck cut into one clause with an
/// if-then-else.
pub fn replace_cut_by_ite(p: &Program, id: &PredId) -> Result<EditSet, TransformError> {
    let clauses: Vec<(ClauseRef, &Clause)> = p.clauses_of(id).collect();
    if p.pred(id).is_none() {
        return Err(TransformError::UnknownPredicate(id.to_string()));
    }
    if clauses.len() != 2 {
        return Err(TransformError::NotApplicable(format!(
            "{id} has {} clauses; exactly 2 are required",
            clauses.len()
        )));
    }
    let (c1, c2) = (clauses[0].1, clauses[1].1);
    if count_cuts(&c1.body) > 1 {
        return Err(TransformError::MultipleCuts(id.to_string()));
    }
    let top = c1.body.conjuncts();
    let Some(cut) = top.iter().position(|g| matches!(g.kind, GoalKind::Cut)) else {
        return Err(TransformError::NotApplicable(format!(
            "the first clause of {id} has no cut at the top level"
        )));
    };
    if count_cuts(&c2.body) > 0 {
        return Err(TransformError::NotApplicable(format!("the second clause of {id} contains a cut")));
    }
    let n = id.arity;
    let maps = [first_occurrence_map(&c1.head), first_occurrence_map(&c2.head)];
    let mut taken: BTreeSet<String> = BTreeSet::new();
    for (c, m) in [c1, c2].iter().zip(&maps) {
        taken.extend(clause_vars(c).into_iter().filter(|v| !m.contains_key(v)));
    }
    let mut names: Vec<String> = Vec::new();
    for i in 0..n {
        let v = fresh_var(&borrowed_name(p, id, i, &[c1, c2]), &taken);
        taken.insert(v.clone());
        names.push(v);
    }
    let branch = |c: &Clause, m: &BTreeMap<String, usize>, goals: Vec<&Goal>| -> Vec<Goal> {
        let mut ren = |v: &str| m.get(v).map_or(v.to_string(), |&i| names[i].clone());
        let mut out = Vec::new();
        for (i, a) in c.head.args().iter().enumerate() {
            let fresh_here = a.var_name().is_some_and(|v| v == "_" || m.get(v) == Some(&i));
            if fresh_here {
                continue;
            }
            let t = a.rename_vars(&mut ren);
            out.push(Goal::call(Term::compound("=", vec![Term::var(names[i].clone()), t])));
        }
        for g in goals {
            out.push(rename_goal(g, &mut ren));
        }
        out
    };
    let cond = branch(c1, &maps[0], top[..cut].to_vec());
    let then_goals: Vec<Goal> = top[cut + 1..].iter().map(|g| rename_goal(g, &mut |v| {
        maps[0].get(v).map_or(v.to_string(), |&i| names[i].clone())
    })).collect();
    let c2_goals: Vec<&Goal> = if c2.body.is_true() { vec![] } else { c2.body.conjuncts() };
    let else_goals = branch(c2, &maps[1], c2_goals);
    let ite = Goal::new(GoalKind::IfThenElse {
        cond: Box::new(Goal::conj(cond)),
        then: Box::new(Goal::conj(then_goals)),
        else_: Box::new(Goal::conj(else_goals)),
        implicit_else: false,
    });
    let head = Term::compound(&id.name, names.iter().map(Term::var).collect());
    let (r1, r2) = (clauses[0].0, clauses[1].0);
    let ops = &p.files[r1.file].ops;
    let text = render_clause(&Clause::synthetic(head, ite), ops, &RenderStyle::default());
    let mut rw = Rewriter::new(p);
    rw.put(&clause_path(p, r1), c1.span, text);
    rw.delete_item(&clause_path(p, r2), c2.span);
    Ok(rw.finish())
}

/// The innermost goal node satisfying `pred` whose span covers the location.
fn goal_at<'a>(
    p: &'a Program,
    loc: &Location,
    pred: impl Fn(&Goal) -> bool,
) -> Result<Option<(ClauseRef, &'a Goal)>, TransformError> {
    let fid = file_of(p, &loc.file)?;
    let Some(c) = clause_at(p, fid, loc.span()) else { return Ok(None) };
    let mut best: Option<&Goal> = None;
    p.clause(c).body.walk(&mut |g| {
        if let Some(s) = g.span {
            if s.covers(loc.span()) && pred(g) && best.is_none_or(|b| b.span.unwrap().len() >= s.len()) {
                best = Some(g);
            }
        }
    });
    Ok(best.map(|g| (c, g)))
}

fn is_builtin_call(p: &Program, module: &str, t: &Term) -> bool {
    p.resolve(module, t) == Resolution::Builtin
}

fn binding_free(p: &Program, module: &str, g: &Goal) -> bool {
    match &g.kind {
        GoalKind::Conj(a, b) | GoalKind::Disj(a, b) => binding_free(p, module, a) && binding_free(p, module, b),
        GoalKind::Naf(_) => true,
        GoalKind::Call(t) => {
            t.functor().is_some_and(|(n, a)| is_binding_free_test(n, a)) && is_builtin_call(p, module, t)
        }
        _ => false,
    }
}

fn negate(p: &Program, module: &str, g: &Goal) -> Goal {
    match &g.kind {
        GoalKind::Naf(inner) => (**inner).clone(),
        GoalKind::Call(t) if is_builtin_call(p, module, t) => {
            let (n, a) = t.functor().unwrap();
            match negated_test(n, a) {
                Some(neg) => Goal::call(Term::compound(neg, t.args().iter().map(Term::strip_spans).collect())),
                None => Goal::new(GoalKind::Naf(Box::new(g.clone()))),
            }
        }
        _ => Goal::new(GoalKind::Naf(Box::new(g.clone()))),
    }
}

fn render_in_place(p: &Program, c: ClauseRef, span: Span, g: &Goal) -> String {
    let text = p.file_text(c.file);
    let col = column(text, span.start);
    let out = render_goal(g, &p.files[c.file].ops, &RenderStyle::default(), col);
    out.trim_start_matches(' ').to_string()
}

/// `(P -> Q ; R)` becomes `(not P -> R ; Q)`, keeping `P` in the new else
/// branch unless it is a pure test.
pub fn invert_ite(p: &Program, loc: &Location) -> Result<EditSet, TransformError> {
    let where_ = format!("{}@{}..{}", loc.file, loc.start, loc.end);
    let found = goal_at(p, loc, |g| matches!(g.kind, GoalKind::IfThenElse { .. }))?;
    let Some((c, g)) = found else {
        return Err(TransformError::NotAnIte(where_));
    };
    let GoalKind::IfThenElse {
        cond,
        then,
        else_,
        implicit_else,
    } = &g.kind
    else {
        unreachable!()
    };
    if *implicit_else {
        return Err(TransformError::NotAnIte(format!("{where_} has no else branch")));
    }
    let module = p.files[c.file].module.clone();
    let neg = negate(p, &module, cond);
    let pure = binding_free(p, &module, cond);
    let new_else = if pure {
        (**then).clone()
    } else {
        Goal::conj(vec![(**cond).clone(), (**then).clone()])
    };
    let ite = Goal::new(GoalKind::IfThenElse {
        cond: Box::new(neg.clone()),
        then: else_.clone(),
        else_: Box::new(new_else),
        implicit_else: false,
    });
    let mut rw = Rewriter::new(p);
    let span = g.span.unwrap();
    rw.put(&clause_path(p, c), span, render_in_place(p, c, span, &ite));
    if !(pure && binding_free(p, &module, &neg)) {
        rw.es.flag(SemanticsFlag::Conditional);
        rw.es.annotate(
            "the condition is not a pure test: the original commits to its first solution, \
             while the inverted form may backtrack into it in the else branch",
        );
    }
    Ok(rw.finish())
}

pub fn unification_to_test(p: &Program, loc: &Location, test: &str) -> Result<EditSet, TransformError> {
    if test != "==" && test != "=:=" {
        return Err(TransformError::BadParams(format!("test must be == or =:=, not {test}")));
    }
    let where_ = format!("{}@{}..{}", loc.file, loc.start, loc.end);
    let found = goal_at(p, loc, |g| matches!(g.kind, GoalKind::Call(_)))?;
    let Some((c, g)) = found else {
        return Err(TransformError::NotAUnification(where_));
    };
    let GoalKind::Call(t) = &g.kind else { unreachable!() };
    if !t.is_functor("=", 2) {
        return Err(TransformError::NotAUnification(where_));
    }
    let text = p.file_text(c.file);
    let op_span = match t.name_span {
        Some(s) => s,
        None => {
            let (l, r) = (t.args()[0].span.unwrap(), t.args()[1].span.unwrap());
            let gap = &text[l.end..r.start];
            let off = l.end + gap.find('=').ok_or_else(|| TransformError::NotAUnification(where_.clone()))?;
            Span::new(off, off + 1)
        }
    };
    let mut rw = Rewriter::new(p);
    rw.put(&clause_path(p, c), op_span, test);
    rw.es.flag(SemanticsFlag::Changing);
    rw.es.annotate(format!(
        "{test} only tests: calls that relied on `=` binding an unbound argument now fail (mode narrowed on purpose)"
    ));
    Ok(rw.finish())
}

/// Moves output unifications behind the commit point: after the first cut,
/// or from an if-then-else condition into its then branch.
pub fn output_after_commit(p: &Program, id: &PredId, positions: &[usize]) -> Result<EditSet, TransformError> {
    if p.pred(id).is_none() {
        return Err(TransformError::UnknownPredicate(id.to_string()));
    }
    let mut pos: Vec<usize> = positions.to_vec();
    pos.sort_unstable();
    pos.dedup();
    if pos.is_empty() || pos.iter().any(|&i| i == 0 || i > id.arity) {
        return Err(TransformError::BadParams(format!("positions must lie in 1..{}", id.arity)));
    }
    let clauses: Vec<(ClauseRef, &Clause)> = p.clauses_of(id).collect();
    let all: Vec<&Clause> = clauses.iter().map(|(_, c)| *c).collect();
    let mut rw = Rewriter::new(p);
    let mut applicable = false;
    for (cref, clause) in &clauses {
        let file = clause_path(p, *cref);
        let top = clause.body.conjuncts();
        if let Some(cut) = top.iter().find(|g| matches!(g.kind, GoalKind::Cut)) {
            applicable = true;
            let mut taken = clause_vars(clause);
            let mut inserted = String::new();
            for &i in &pos {
                let a = &clause.head.args()[i - 1];
                if let Some(v) = a.var_name() {
                    if v == "_" || clause.head.count_var(v) == 1 {
                        continue;
                    }
                }
                let others: Vec<&Clause> = all.iter().copied().filter(|c| !std::ptr::eq(*c, *clause)).collect();
                let name = fresh_var(&borrowed_name(p, id, i - 1, &others), &taken);
                taken.insert(name.clone());
                let span = a.span.unwrap();
                inserted.push_str(&format!(", {name} = {}", rw.slice(&file, span)));
                rw.put(&file, span, name);
            }
            if !inserted.is_empty() {
                rw.insert(&file, cut.span.unwrap().end, inserted);
            }
            continue;
        }
        // if-then-else form
        for g in &top {
            let GoalKind::IfThenElse {
                cond,
                then,
                else_,
                implicit_else,
            } = &g.kind
            else {
                continue;
            };
            let outputs: BTreeSet<&str> = pos
                .iter()
                .filter_map(|&i| clause.head.args()[i - 1].var_name())
                .filter(|v| *v != "_")
                .collect();
            let is_output_unif = |c: &&Goal| match &c.kind {
                GoalKind::Call(t) if t.is_functor("=", 2) => {
                    t.args().iter().any(|a| a.var_name().is_some_and(|v| outputs.contains(v)))
                }
                _ => false,
            };
            let conj = cond.conjuncts();
            let (moved, kept): (Vec<&Goal>, Vec<&Goal>) = conj.iter().copied().partition(|c| is_output_unif(c));
            if moved.is_empty() {
                continue;
            }
            applicable = true;
            let mut new_then: Vec<Goal> = moved.into_iter().cloned().collect();
            if !then.is_true() {
                new_then.push((**then).clone());
            }
            let ite = Goal::new(GoalKind::IfThenElse {
                cond: Box::new(Goal::conj(kept.into_iter().cloned().collect())),
                then: Box::new(Goal::conj(new_then)),
                else_: else_.clone(),
                implicit_else: *implicit_else,
            });
            let span = g.span.unwrap();
            rw.put(&file, span, render_in_place(p, *cref, span, &ite));
            break;
        }
    }
    if !applicable {
        return Err(TransformError::NoCutInClause(id.to_string()));
    }
    rw.es.flag(SemanticsFlag::Changing);
    rw.es.annotate(
        "calls with the output argument already bound now commit before the output is unified (steadfast form)",
    );
    Ok(rw.finish())
}
