use std::collections::{BTreeMap, HashMap};

use serde_json::json;

use super::{alpha_normal, Location, Suggestion, SuggestionKind};
use crate::model::{PredId, Program, Resolution, Scc};

/// Groups of same-named predicates in different modules with identical
/// definitions. SCCs are compared bottom-up by stratum so that calls into
/// lower strata may target different but already matched duplicates.
pub fn duplicate_groups(program: &Program) -> Vec<Vec<PredId>> {
    let cond = program.condensation();
    let mut order: Vec<usize> = (0..cond.sccs.len()).collect();
    order.sort_by(|&a, &b| {
        (cond.sccs[a].stratum, &cond.sccs[a].members).cmp(&(cond.sccs[b].stratum, &cond.sccs[b].members))
    });
    let mut canon: HashMap<PredId, PredId> = HashMap::new();
    let mut reps: Vec<usize> = Vec::new();
    let mut matched: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for s in order {
        let scc = &cond.sccs[s];
        if !eligible(program, scc) {
            continue;
        }
        let found = reps
            .iter()
            .copied()
            .find(|&r| scc_match(program, &cond.sccs[r], scc, &canon));
        match found {
            Some(r) => {
                let rep = &cond.sccs[r];
                for m in &scc.members {
                    let twin = PredId::new(&rep.members[0].module, &m.name, m.arity);
                    canon.insert(m.clone(), twin);
                }
                matched.entry(r).or_default().push(s);
            }
            None => reps.push(s),
        }
    }
    let mut groups = Vec::new();
    for (r, others) in matched {
        for p in &cond.sccs[r].members {
            let mut g = vec![p.clone()];
            for &o in &others {
                g.extend(cond.sccs[o].members.iter().filter(|m| m.key() == p.key()).cloned());
            }
            g.sort();
            groups.push(g);
        }
    }
    groups.sort();
    groups
}

fn eligible(program: &Program, scc: &Scc) -> bool {
    let module = &scc.members[0].module;
    scc.members.iter().all(|m| {
        &m.module == module && program.preds.get(m).is_some_and(|d| !d.dynamic && !d.clauses.is_empty())
    })
}

fn canon_of<'a>(canon: &'a HashMap<PredId, PredId>, p: &'a PredId) -> &'a PredId {
    canon.get(p).unwrap_or(p)
}

fn scc_match(program: &Program, a: &Scc, b: &Scc, canon: &HashMap<PredId, PredId>) -> bool {
    let (ma, mb) = (&a.members[0].module, &b.members[0].module);
    if ma == mb || a.members.len() != b.members.len() {
        return false;
    }
    let twin = |p: &PredId| PredId::new(mb, &p.name, p.arity);
    if !a.members.iter().all(|p| b.members.contains(&twin(p))) {
        return false;
    }
    for p in &a.members {
        let q = twin(p);
        let ca = &program.preds[p].clauses;
        let cb = &program.preds[&q].clauses;
        if ca.len() != cb.len() {
            return false;
        }
        for (&x, &y) in ca.iter().zip(cb) {
            if alpha_normal(&[program.clause(x).to_term()]) != alpha_normal(&[program.clause(y).to_term()]) {
                return false;
            }
            let xs: Vec<_> = program.calls_in(x).collect();
            let ys: Vec<_> = program.calls_in(y).collect();
            if xs.len() != ys.len() {
                return false;
            }
            for (cx, cy) in xs.iter().zip(&ys) {
                let same = match (&cx.resolution, &cy.resolution) {
                    (Resolution::Pred(p1), Resolution::Pred(p2)) => {
                        if a.members.contains(p1) {
                            *p2 == twin(p1)
                        } else {
                            canon_of(canon, p1) == canon_of(canon, p2)
                        }
                    }
                    (r1, r2) => r1 == r2,
                };
                if !same {
                    return false;
                }
            }
        }
    }
    true
}

pub(crate) fn group_suggestion(program: &Program, group: &[PredId]) -> Suggestion {
    let names: Vec<String> = group.iter().map(ToString::to_string).collect();
    let target = names.join(", ");
    let span = program.preds[&group[0]]
        .clauses
        .first()
        .map(|&c| Location::new(program, c.file, program.clause(c).span));
    Suggestion::new(
        SuggestionKind::DuplicateGroup,
        &target,
        &group[0].module,
        target.clone(),
        span,
        format!("{} has identical definitions in {} modules", group[0].indicator(), group.len()),
        json!({ "members": group }),
    )
}
