use serde_json::json;

use super::{clause_ordinal, sort_suggestions, Location, Suggestion, SuggestionKind};
use crate::model::{ClauseRef, PredId, Program};
use crate::syntax::{Clause, Goal, GoalKind, Span};

/// Clause-level suggestions: neck cuts replaceable by if-then-else, output
/// bound before a cut, unifications used as tests, and if-then-else whose
/// branches read better swapped.
pub fn clause_smells(program: &Program) -> Vec<Suggestion> {
    let mut out = Vec::new();
    for d in program.preds.values() {
        if let Some(s) = cut_replaceable(program, &d.id) {
            out.push(s);
        }
        for &c in &d.clauses {
            output_before_commit(program, &d.id, c, &mut out);
            unification_as_test(program, &d.id, c, &mut out);
            invertible_ite(program, &d.id, c, &mut out);
        }
    }
    sort_suggestions(program, &mut out);
    out
}

/// `G1, !, G2` as the first clause (cut at top level, the only cut) and a
/// cut-free second clause; exactly two clauses.
pub(crate) fn neck_cut_shape(program: &Program, p: &PredId) -> bool {
    let clauses: Vec<&Clause> = program.clauses_of(p).map(|(_, c)| c).collect();
    if clauses.len() != 2 {
        return false;
    }
    let top_cuts = clauses[0]
        .body
        .conjuncts()
        .iter()
        .filter(|g| matches!(g.kind, GoalKind::Cut))
        .count();
    let mut all_cuts = 0;
    clauses[0].body.walk(&mut |g| {
        if matches!(g.kind, GoalKind::Cut) {
            all_cuts += 1
        }
    });
    let mut second = 0;
    clauses[1].body.walk(&mut |g| {
        if matches!(g.kind, GoalKind::Cut) {
            second += 1
        }
    });
    top_cuts == 1 && all_cuts == 1 && second == 0
}

fn cut_replaceable(program: &Program, p: &PredId) -> Option<Suggestion> {
    if !neck_cut_shape(program, p) {
        return None;
    }
    let c = program.preds[p].clauses[0];
    Some(Suggestion::new(
        SuggestionKind::CutReplaceable,
        &p.to_string(),
        &p.module,
        p.to_string(),
        Some(Location::new(program, c.file, program.clause(c).span)),
        format!("the cut in {p} can be replaced by an if-then-else"),
        json!({ "pred": p }),
    ))
}

fn has_top_cut(clause: &Clause) -> bool {
    clause
        .body
        .conjuncts()
        .iter()
        .any(|g| matches!(g.kind, GoalKind::Cut))
}

/// Occurrences of `v` in goals of `clause` that end before `before`.
fn occurs_before(clause: &Clause, v: &str, before: usize) -> bool {
    let mut found = false;
    clause.body.for_each_term(&mut |t| {
        if t.span.is_some_and(|s| s.end <= before) && t.count_var(v) > 0 {
            found = true;
        }
    });
    found
}

fn output_before_commit(program: &Program, p: &PredId, c: ClauseRef, out: &mut Vec<Suggestion>) {
    let clause = program.clause(c);
    if !has_top_cut(clause) {
        return;
    }
    let sites: Vec<_> = program
        .calls_to(p)
        .filter(|cs| cs.meta_extra.is_none() && cs.caller.is_some() && cs.span().is_some())
        .collect();
    if sites.is_empty() {
        return;
    }
    let mut positions = Vec::new();
    for (k, arg) in clause.head.args().iter().enumerate() {
        if arg.is_var() {
            continue;
        }
        let all_fresh = sites.iter().all(|cs| {
            let Some(v) = cs.term.args().get(k).and_then(|a| a.var_name()) else {
                return false;
            };
            if v == "_" {
                return true;
            }
            let caller = program.clause(cs.clause().unwrap());
            !occurs_before(caller, v, cs.span().unwrap().start)
        });
        if all_fresh {
            positions.push(k + 1);
        }
    }
    if positions.is_empty() {
        return;
    }
    let ord = clause_ordinal(program, c);
    let list: Vec<String> = positions.iter().map(ToString::to_string).collect();
    out.push(Suggestion::new(
        SuggestionKind::OutputBeforeCommit,
        &format!("{p}|{ord}|{}", list.join(",")),
        &p.module,
        p.to_string(),
        Some(Location::new(program, c.file, clause.span)),
        format!(
            "clause {ord} of {p} binds output position(s) {} before its cut",
            list.join(", ")
        ),
        json!({ "pred": p, "clause": ord, "positions": positions }),
    ));
}

fn is_unification(g: &Goal) -> Option<(&crate::syntax::Term, &crate::syntax::Term)> {
    match &g.kind {
        GoalKind::Call(t) if t.is_functor("=", 2) => Some((&t.args()[0], &t.args()[1])),
        _ => None,
    }
}

fn unification_as_test(program: &Program, p: &PredId, c: ClauseRef, out: &mut Vec<Suggestion>) {
    let clause = program.clause(c);
    let mut candidates: Vec<Span> = Vec::new();
    // before the first top-level cut
    let top = clause.body.conjuncts();
    if let Some(cut) = top.iter().position(|g| matches!(g.kind, GoalKind::Cut)) {
        for g in &top[..cut] {
            if is_unification(g).is_some() {
                candidates.extend(g.span);
            }
        }
    }
    clause.body.walk(&mut |g| {
        if let GoalKind::IfThenElse { cond, .. } = &g.kind {
            cond.walk(&mut |h| {
                if is_unification(h).is_some() {
                    candidates.extend(h.span);
                }
            });
        }
    });
    candidates.sort();
    candidates.dedup();
    let mut unifs: Vec<&Goal> = Vec::new();
    clause.body.walk(&mut |g| {
        if is_unification(g).is_some() {
            unifs.push(g)
        }
    });
    let ord = clause_ordinal(program, c);
    for g in unifs {
        let Some(span) = g.span.filter(|s| candidates.contains(s)) else { continue };
        let (l, r) = is_unification(g).unwrap();
        let head_var = [l, r]
            .iter()
            .any(|t| t.var_name().is_some_and(|v| v != "_" && clause.head.count_var(v) > 0));
        if !head_var {
            continue;
        }
        let text = span.slice(program.file_text(c.file)).to_string();
        out.push(Suggestion::new(
            SuggestionKind::UnificationAsTest,
            &format!("{p}|{ord}|{text}"),
            &p.module,
            format!("{p}: {text}"),
            Some(Location::new(program, c.file, span)),
            format!("`{text}` in clause {ord} of {p} looks like a test; consider == or =:="),
            json!({ "pred": p, "clause": ord, "goal": text }),
        ));
    }
}

fn invertible_ite(program: &Program, p: &PredId, c: ClauseRef, out: &mut Vec<Suggestion>) {
    let clause = program.clause(c);
    let ord = clause_ordinal(program, c);
    let mut n = 0;
    clause.body.walk(&mut |g| {
        let GoalKind::IfThenElse {
            cond,
            then,
            else_,
            implicit_else,
        } = &g.kind
        else {
            return;
        };
        n += 1;
        if *implicit_else {
            return;
        }
        let negated = matches!(cond.kind, GoalKind::Naf(_));
        if !(negated || then.size() > else_.size()) {
            return;
        }
        let Some(span) = g.span else { return };
        let why = if negated {
            "its condition is a negation"
        } else {
            "its then-branch is longer than its else-branch"
        };
        out.push(Suggestion::new(
            SuggestionKind::InvertibleIte,
            &format!("{p}|{ord}|{n}"),
            &p.module,
            format!("{p}: if-then-else {n} of clause {ord}"),
            Some(Location::new(program, c.file, span)),
            format!("an if-then-else in clause {ord} of {p} could be inverted: {why}"),
            json!({ "pred": p, "clause": ord }),
        ));
    });
}
