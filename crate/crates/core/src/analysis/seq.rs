use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::json;

use super::{alpha_normal, Location, Suggestion, SuggestionKind};
use crate::model::{ClauseRef, PredId, Program};
use crate::syntax::{render_term, Clause, Goal, GoalKind, OperatorTable, Span, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Occurrence {
    pub pred: PredId,
    #[serde(skip)]
    pub clause: ClauseRef,
    pub file: String,
    pub start: usize,
    pub end: usize,
    /// Actual variables passed for each parameter.
    pub args: Vec<String>,
}

impl Occurrence {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceCandidate {
    /// Goals of the first occurrence.
    #[serde(skip)]
    pub goals: Vec<Term>,
    pub text: String,
    /// Parameter names as spelled in the first occurrence.
    pub params: Vec<String>,
    pub occurrences: Vec<Occurrence>,
}

impl SequenceCandidate {
    /// A name for the extracted predicate not yet defined in the module of
    /// the first occurrence.
    pub fn proposed_name(&self, program: &Program) -> String {
        let mut parts: Vec<&str> = self.goals.iter().filter_map(|g| g.functor().map(|f| f.0)).collect();
        parts.dedup();
        parts.truncate(2);
        let base: String = parts
            .join("_")
            .chars()
            .map(|c| if c.is_alphanumeric() || c == '_' { c } else { '_' })
            .collect();
        let base = if base.starts_with(|c: char| c.is_ascii_lowercase()) {
            base
        } else {
            format!("seq_{base}")
        };
        let module = &self.occurrences[0].pred.module;
        let arity = self.params.len();
        let mut name = base.clone();
        let mut k = 1;
        while program.is_defined(module, &name, arity) {
            k += 1;
            name = format!("{base}_{k}");
        }
        name
    }

    pub fn suggestion(&self, program: &Program) -> Suggestion {
        let first = &self.occurrences[0];
        let ops = OperatorTable::default();
        let key_terms = alpha_normal(&self.goals);
        let key: Vec<String> = key_terms.iter().map(|t| render_term(t, &ops)).collect();
        let mut preds: Vec<String> = self.occurrences.iter().map(|o| o.pred.to_string()).collect();
        preds.dedup();
        Suggestion::new(
            SuggestionKind::CommonSequence,
            &format!("{}|{}", key.join(", "), preds.join(",")),
            &first.pred.module,
            self.text.clone(),
            Some(Location {
                file: first.file.clone(),
                start: first.start,
                end: first.end,
            }),
            format!(
                "the goal sequence {} occurs {} times; parameters ({})",
                self.text,
                self.occurrences.len(),
                self.params.join(", ")
            ),
            json!({
                "goals": self.text,
                "params": self.params,
                "proposed_name": self.proposed_name(program),
                "occurrences": self.occurrences,
            }),
        )
    }
}

/// Maximal runs of plain calls at conjunction level within one body.
pub(crate) fn segments(g: &Goal) -> Vec<Vec<&Goal>> {
    let mut out = Vec::new();
    collect_segments(g, &mut out);
    out
}

fn collect_segments<'a>(g: &'a Goal, out: &mut Vec<Vec<&'a Goal>>) {
    let mut cur: Vec<&Goal> = Vec::new();
    for c in g.conjuncts() {
        match &c.kind {
            GoalKind::Call(_) if c.span.is_some() => cur.push(c),
            _ => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                match &c.kind {
                    GoalKind::Disj(a, b) => {
                        collect_segments(a, out);
                        collect_segments(b, out);
                    }
                    GoalKind::IfThenElse {
                        cond,
                        then,
                        else_,
                        implicit_else,
                    } => {
                        collect_segments(cond, out);
                        collect_segments(then, out);
                        if !implicit_else {
                            collect_segments(else_, out);
                        }
                    }
                    GoalKind::Naf(a) => collect_segments(a, out),
                    _ => {}
                }
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
}

pub(crate) fn goal_term(g: &Goal) -> &Term {
    match &g.kind {
        GoalKind::Call(t) => t,
        _ => unreachable!("segments hold calls only"),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Window {
    clause: ClauseRef,
    seg: usize,
    i: usize,
    j: usize,
}

impl Window {
    fn within(&self, o: &Window) -> bool {
        self.clause == o.clause && self.seg == o.seg && o.i <= self.i && self.j <= o.j
    }
}

/// Variables of `window` that also occur elsewhere in the clause, as
/// indices into the window's variables in first-occurrence order.
pub(crate) fn shared_vars(clause: &Clause, window: &[&Term]) -> (Vec<String>, BTreeSet<usize>) {
    let mut vars: Vec<String> = Vec::new();
    for t in window {
        for v in t.variables() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    let shared = vars
        .iter()
        .enumerate()
        .filter(|(_, v)| {
            let inside: usize = window.iter().map(|t| t.count_var(v)).sum();
            let total = clause.head.count_var(v) + clause.body.count_var(v);
            total > inside
        })
        .map(|(i, _)| i)
        .collect();
    (vars, shared)
}

/// Repeated goal sequences of at least `min_len` goals occurring at least
/// `min_occ` times, equal up to variable renaming. Windows never span a
/// cut or a control construct.
pub fn common_sequences(program: &Program, min_len: usize, min_occ: usize) -> Vec<SequenceCandidate> {
    let min_len = min_len.max(1);
    let ops = OperatorTable::default();
    let mut clauses: Vec<ClauseRef> = program.preds.values().flat_map(|d| d.clauses.iter().copied()).collect();
    clauses.sort();
    let mut segs: BTreeMap<ClauseRef, Vec<Vec<&Goal>>> = BTreeMap::new();
    let mut groups: BTreeMap<String, Vec<Window>> = BTreeMap::new();
    for &c in &clauses {
        let s = segments(&program.clause(c).body);
        for (si, seg) in s.iter().enumerate() {
            for i in 0..seg.len() {
                for j in (i + min_len)..=seg.len() {
                    let terms: Vec<Term> = seg[i..j].iter().map(|g| goal_term(g).clone()).collect();
                    let key: Vec<String> = alpha_normal(&terms).iter().map(|t| render_term(t, &ops)).collect();
                    groups.entry(key.join(", ")).or_default().push(Window { clause: c, seg: si, i, j });
                }
            }
        }
        segs.insert(c, s);
    }
    // drop overlapping occurrences within one segment
    let mut cands: Vec<Vec<Window>> = Vec::new();
    for (_, mut ws) in groups {
        ws.sort();
        let mut kept: Vec<Window> = Vec::new();
        for w in ws {
            if let Some(last) = kept.last() {
                if last.clause == w.clause && last.seg == w.seg && w.i < last.j {
                    continue;
                }
            }
            kept.push(w);
        }
        if kept.len() >= min_occ.max(2) {
            cands.push(kept);
        }
    }
    let maximal: Vec<&Vec<Window>> = cands
        .iter()
        .filter(|c| {
            !cands.iter().any(|d| {
                d.len() == c.len()
                    && d[0].j - d[0].i > c[0].j - c[0].i
                    && c.iter().all(|w| d.iter().any(|x| w.within(x)))
            })
        })
        .collect();
    let mut out: Vec<SequenceCandidate> = maximal
        .into_iter()
        .map(|ws| build(program, &segs, ws))
        .collect();
    out.sort_by(|a, b| {
        let ka = (a.occurrences[0].clause, a.occurrences[0].start, std::cmp::Reverse(a.goals.len()));
        let kb = (b.occurrences[0].clause, b.occurrences[0].start, std::cmp::Reverse(b.goals.len()));
        ka.cmp(&kb)
    });
    out
}

fn build(
    program: &Program,
    segs: &BTreeMap<ClauseRef, Vec<Vec<&Goal>>>,
    ws: &[Window],
) -> SequenceCandidate {
    let mut per_occ = Vec::new();
    let mut shared_all: BTreeSet<usize> = BTreeSet::new();
    for w in ws {
        let clause = program.clause(w.clause);
        let goals = &segs[&w.clause][w.seg][w.i..w.j];
        let terms: Vec<&Term> = goals.iter().map(|g| goal_term(g)).collect();
        let (vars, shared) = shared_vars(clause, &terms);
        shared_all.extend(shared);
        let span = goals[0].span.unwrap().join(goals[goals.len() - 1].span.unwrap());
        per_occ.push((w, vars, span, terms));
    }
    let first_terms: Vec<Term> = per_occ[0].3.iter().map(|t| (*t).clone()).collect();
    let params: Vec<String> = shared_all.iter().map(|&k| per_occ[0].1[k].clone()).collect();
    let text = first_terms
        .iter()
        .map(|t| render_term(t, &program.files[ws[0].clause.file].ops))
        .collect::<Vec<_>>()
        .join(", ");
    let occurrences = per_occ
        .iter()
        .map(|(w, vars, span, _)| Occurrence {
            pred: program.clause_pred(w.clause),
            clause: w.clause,
            file: program.files[w.clause.file].path.clone(),
            start: span.start,
            end: span.end,
            args: shared_all.iter().map(|&k| vars[k].clone()).collect(),
        })
        .collect();
    SequenceCandidate {
        goals: first_terms.iter().map(Term::strip_spans).collect(),
        text,
        params,
        occurrences,
    }
}
