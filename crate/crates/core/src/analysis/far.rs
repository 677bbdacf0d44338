use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;

use super::{ArgPos, Location, Suggestion, SuggestionKind};
use crate::model::{PredId, Program, Resolution};

/// Argument positions that no clause inspects or binds: the greatest set E
/// such that in every clause the argument is a variable occurring once in
/// the head and otherwise only as a whole argument at a position in E.
///
/// Roots, dynamic predicates and predicates reached through meta-calls or
/// directives keep all their positions.
pub fn far(program: &Program) -> BTreeSet<ArgPos> {
    let mut pinned: BTreeSet<&PredId> = BTreeSet::new();
    for cs in &program.calls {
        if let Resolution::Pred(p) = &cs.resolution {
            if cs.meta_extra.is_some() || cs.caller.is_none() || cs.arity != p.arity {
                pinned.insert(p);
            }
        }
    }
    let mut e: BTreeSet<ArgPos> = BTreeSet::new();
    for d in program.preds.values() {
        if d.dynamic || program.is_root(&d.id) || pinned.contains(&d.id) {
            continue;
        }
        for i in 1..=d.id.arity {
            e.insert(ArgPos {
                pred: d.id.clone(),
                index: i,
            });
        }
    }
    loop {
        let drop: Vec<ArgPos> = e.iter().filter(|a| !erasable(program, a, &e)).cloned().collect();
        if drop.is_empty() {
            return e;
        }
        for a in drop {
            e.remove(&a);
        }
    }
}

fn erasable(program: &Program, a: &ArgPos, e: &BTreeSet<ArgPos>) -> bool {
    program.clauses_of(&a.pred).all(|(cref, clause)| {
        let Some(v) = clause.head.args()[a.index - 1].var_name() else {
            return false;
        };
        if v == "_" {
            return true;
        }
        if clause.head.count_var(v) != 1 {
            return false;
        }
        let in_body = clause.body.count_var(v);
        if in_body == 0 {
            return true;
        }
        let mut ok = 0;
        for cs in program.calls_in(cref) {
            if cs.meta_extra.is_some() {
                continue;
            }
            for (j, arg) in cs.term.args().iter().enumerate() {
                if arg.var_name() == Some(v) {
                    match &cs.resolution {
                        Resolution::Pred(q)
                            if e.contains(&ArgPos {
                                pred: q.clone(),
                                index: j + 1,
                            }) =>
                        {
                            ok += 1
                        }
                        _ => return false,
                    }
                }
            }
        }
        ok == in_body
    })
}

pub(crate) fn suggestions(program: &Program, e: &BTreeSet<ArgPos>) -> Vec<Suggestion> {
    let mut by_pred: BTreeMap<&PredId, Vec<usize>> = BTreeMap::new();
    for a in e {
        by_pred.entry(&a.pred).or_default().push(a.index);
    }
    by_pred
        .into_iter()
        .map(|(p, idx)| {
            let span = program.preds[p]
                .clauses
                .first()
                .and_then(|&c| program.clause(c).head_span.map(|s| Location::new(program, c.file, s)));
            let list: Vec<String> = idx.iter().map(ToString::to_string).collect();
            Suggestion::new(
                SuggestionKind::RedundantArgs,
                &format!("{p}|{}", list.join(",")),
                &p.module,
                p.to_string(),
                span,
                format!("argument position(s) {} of {p} are never used", list.join(", ")),
                json!({ "pred": p, "positions": idx }),
            )
        })
        .collect()
}
