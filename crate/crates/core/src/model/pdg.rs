use std::collections::{BTreeSet, HashMap};

use super::{PredId, Program};

/// Predicate dependency graph over defined predicates.
#[derive(Debug, Clone, Default)]
pub struct Pdg {
    /// Sorted node list; node indices refer into it.
    pub nodes: Vec<PredId>,
    pub edges: BTreeSet<(usize, usize)>,
    index: HashMap<PredId, usize>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scc {
    /// Sorted members.
    pub members: Vec<PredId>,
    pub stratum: usize,
}

/// SCC partition ordered by (stratum, least member), with the DAG between them.
#[derive(Debug, Clone, Default)]
pub struct Condensation {
    pub sccs: Vec<Scc>,
    pub edges: BTreeSet<(usize, usize)>,
    scc_of: HashMap<PredId, usize>,
}

impl Condensation {
    pub fn scc_of(&self, p: &PredId) -> Option<usize> {
        self.scc_of.get(p).copied()
    }

    pub fn max_stratum(&self) -> Option<usize> {
        self.sccs.iter().map(|s| s.stratum).max()
    }
}

impl Pdg {
    pub fn build(program: &Program) -> Pdg {
        let mut edges = BTreeSet::new();
        for c in &program.calls {
            if let (Some(from), Some(to)) = (&c.caller, c.resolution.pred()) {
                edges.insert((from.clone(), to.clone()));
            }
        }
        Pdg::from_edges(program.preds.keys().cloned(), edges)
    }

    pub fn from_edges(
        nodes: impl IntoIterator<Item = PredId>,
        edges: impl IntoIterator<Item = (PredId, PredId)>,
    ) -> Pdg {
        let edges: Vec<(PredId, PredId)> = edges.into_iter().collect();
        let mut set: BTreeSet<PredId> = nodes.into_iter().collect();
        for (a, b) in &edges {
            set.insert(a.clone());
            set.insert(b.clone());
        }
        let nodes: Vec<PredId> = set.into_iter().collect();
        let index: HashMap<PredId, usize> =
            nodes.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let idx_edges: BTreeSet<(usize, usize)> =
            edges.iter().map(|(a, b)| (index[a], index[b])).collect();
        let mut succ = vec![Vec::new(); nodes.len()];
        let mut pred = vec![Vec::new(); nodes.len()];
        for &(a, b) in &idx_edges {
            succ[a].push(b);
            pred[b].push(a);
        }
        Pdg {
            nodes,
            edges: idx_edges,
            index,
            succ,
            pred,
        }
    }

    pub fn index(&self, p: &PredId) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn callees(&self, p: &PredId) -> impl Iterator<Item = &PredId> {
        self.index(p)
            .into_iter()
            .flat_map(|i| self.succ[i].iter())
            .map(|&j| &self.nodes[j])
    }

    pub fn callers(&self, p: &PredId) -> impl Iterator<Item = &PredId> {
        self.index(p)
            .into_iter()
            .flat_map(|i| self.pred[i].iter())
            .map(|&j| &self.nodes[j])
    }

    pub fn has_edge(&self, a: &PredId, b: &PredId) -> bool {
        match (self.index(a), self.index(b)) {
            (Some(i), Some(j)) => self.edges.contains(&(i, j)),
            _ => false,
        }
    }

    /// Everything reachable from `start` by following edges forward,
    /// including `start` itself.
    pub fn reachable_from<'a>(&self, start: impl IntoIterator<Item = &'a PredId>) -> BTreeSet<PredId> {
        self.closure(start, &self.succ)
    }

    /// Everything that can reach `target`, including `target`.
    pub fn reaching<'a>(&self, target: impl IntoIterator<Item = &'a PredId>) -> BTreeSet<PredId> {
        self.closure(target, &self.pred)
    }

    fn closure<'a>(
        &self,
        start: impl IntoIterator<Item = &'a PredId>,
        adj: &[Vec<usize>],
    ) -> BTreeSet<PredId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue: std::collections::VecDeque<usize> =
            start.into_iter().filter_map(|p| self.index(p)).collect();
        for &i in &queue {
            seen[i] = true;
        }
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| self.nodes[i].clone())
            .collect()
    }

    /// Tarjan's algorithm (iterative), then longest-path strata from sinks.
    pub fn condensation(&self) -> Condensation {
        let n = self.nodes.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comp = vec![usize::MAX; n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut counter = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut work: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&(v, next)) = work.last() {
                if next < self.succ[v].len() {
                    let w = self.succ[v][next];
                    if let Some(top) = work.last_mut() {
                        top.1 += 1;
                    }
                    if index[w] == usize::MAX {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        work.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                    continue;
                }
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut members = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = comps.len();
                        members.push(w);
                        if w == v {
                            break;
                        }
                    }
                    members.sort_unstable();
                    comps.push(members);
                }
            }
        }

        // Tarjan emits components in reverse topological order: callees first
        let mut stratum = vec![0usize; comps.len()];
        let mut dag: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &(a, b) in &self.edges {
            if comp[a] != comp[b] {
                dag.insert((comp[a], comp[b]));
            }
        }
        for c in 0..comps.len() {
            let s = dag
                .range((c, 0)..(c + 1, 0))
                .map(|&(_, d)| stratum[d] + 1)
                .max()
                .unwrap_or(0);
            stratum[c] = s;
        }

        let mut order: Vec<usize> = (0..comps.len()).collect();
        order.sort_by_key(|&c| (stratum[c], comps[c][0]));
        let mut renumber = vec![0; comps.len()];
        for (new, &old) in order.iter().enumerate() {
            renumber[old] = new;
        }
        let sccs: Vec<Scc> = order
            .iter()
            .map(|&c| Scc {
                members: comps[c].iter().map(|&i| self.nodes[i].clone()).collect(),
                stratum: stratum[c],
            })
            .collect();
        let mut scc_of = HashMap::new();
        for (i, s) in sccs.iter().enumerate() {
            for m in &s.members {
                scc_of.insert(m.clone(), i);
            }
        }
        Condensation {
            sccs,
            edges: dag.iter().map(|&(a, b)| (renumber[a], renumber[b])).collect(),
            scc_of,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: &str) -> PredId {
        PredId::new("user", n, 0)
    }

    #[test]
    fn mutual_recursion_over_a_sink() {
        let g = Pdg::from_edges(
            [p("p"), p("q"), p("r")],
            [(p("p"), p("q")), (p("q"), p("p")), (p("q"), p("r"))],
        );
        let c = g.condensation();
        assert_eq!(c.sccs.len(), 2);
        assert_eq!(c.sccs[0].members, [p("r")]);
        assert_eq!(c.sccs[0].stratum, 0);
        assert_eq!(c.sccs[1].members, [p("p"), p("q")]);
        assert_eq!(c.sccs[1].stratum, 1);
        assert!(c.edges.contains(&(1, 0)));
    }

    #[test]
    fn empty_graph() {
        let c = Pdg::default().condensation();
        assert!(c.sccs.is_empty());
    }

    #[test]
    fn strata_are_longest_paths() {
        // a -> b -> c and a -> c: a sits two levels above c
        let g = Pdg::from_edges(
            [],
            [(p("a"), p("b")), (p("b"), p("c")), (p("a"), p("c"))],
        );
        let c = g.condensation();
        let strata: Vec<(String, usize)> = c
            .sccs
            .iter()
            .map(|s| (s.members[0].name.clone(), s.stratum))
            .collect();
        assert_eq!(strata, [("c".into(), 0), ("b".into(), 1), ("a".into(), 2)]);
    }

    #[test]
    fn self_loop_is_singleton() {
        let g = Pdg::from_edges([], [(p("a"), p("a"))]);
        let c = g.condensation();
        assert_eq!(c.sccs.len(), 1);
        assert_eq!(c.sccs[0].stratum, 0);
    }
}
