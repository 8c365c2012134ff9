#![allow(dead_code)]

use std::collections::BTreeSet;

use ssmst::cert::{accepts, max_levels, CertificateLabel, LabelNeighbor, LabelView, LevelRecord, Mode, Orientation};
use ssmst::graph::{NodeId, Weight, WeightedGraph};
use ssmst::oracle::EdgeSet;
use ssmst::quant::MilestoneSet;

/// Connected simple graphs on `n` nodes, one per isomorphism class, as edge
/// lists over `0..n`.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> =
            pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
        if !connected(n, &edges) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> =
                    edges.iter().map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b]))).collect();
                e.sort();
                e
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(edges);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            let v = if a == u { b } else if b == u { a } else { continue };
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Nodes `1..=n`, edge `i` weighted `weights[i % weights.len()]`.
pub fn weighted(n: usize, edges: &[(usize, usize)], weights: &[Weight]) -> WeightedGraph {
    WeightedGraph::from_edges(
        (1..=n as u32).map(NodeId),
        edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| (NodeId(a as u32 + 1), NodeId(b as u32 + 1), weights[i % weights.len()])),
    )
    .unwrap()
}

/// Transformed weight of `tree`.
pub fn tree_weight(g: &WeightedGraph, tree: &EdgeSet, ms: &MilestoneSet) -> Weight {
    tree.total_weight(g, |w| ms.transform(w).unwrap()).unwrap()
}

/// Parent indices of `tree` rooted at `root`, with a BFS order.
pub fn rooted(g: &WeightedGraph, tree: &EdgeSet, root: usize) -> (Vec<Option<usize>>, Vec<usize>) {
    let mut parent = vec![None; g.n()];
    let mut order = vec![root];
    let mut seen = vec![false; g.n()];
    seen[root] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for a in g.neighbors(u) {
            if !seen[a.index] && tree.contains(g.id(u), a.id) {
                seen[a.index] = true;
                parent[a.index] = Some(u);
                order.push(a.index);
            }
        }
    }
    (parent, order)
}

/// Acyclicity fields for `tree` rooted at `root`, with empty level stacks.
pub fn skeleton(g: &WeightedGraph, parent: &[Option<usize>], order: &[usize]) -> Vec<CertificateLabel> {
    let n = g.n();
    let mut desc = vec![1u32; n];
    for &u in order.iter().rev() {
        if let Some(p) = parent[u] {
            desc[p] += desc[u];
        }
    }
    (0..n)
        .map(|i| CertificateLabel {
            parent: parent[i].map(|p| g.id(p)),
            desc: desc[i],
            total: n as u32,
            levels: Vec::new(),
        })
        .collect()
}

/// Exhaustive search for level stacks that make every node accept, with the
/// parent pointers of one rooted tree.
///
/// Acyclicity and level checks read disjoint fields, so the counts are fixed to
/// the subtree sizes. Records whose orientation has no possible target, or
/// whose milestone index is not the index of an edge weight, can never be
/// backed and are left out. Subtree numbers range over `1..=n`; the verifier
/// only compares them for equality within a level, so a node may use at most
/// one more than the largest number already placed at that level.
pub struct Prover<'a> {
    g: &'a WeightedGraph,
    ms: &'a MilestoneSet,
    order: Vec<usize>,
    domains: Vec<Vec<CertificateLabel>>,
    chosen: Vec<Option<usize>>,
    pub checks: u64,
}

impl<'a> Prover<'a> {
    pub fn new(g: &'a WeightedGraph, tree: &EdgeSet, root: usize, ms: &'a MilestoneSet) -> Self {
        let n = g.n();
        let (parent, order) = rooted(g, tree, root);
        let base = skeleton(g, &parent, &order);
        let tws: BTreeSet<u32> = g.edges().iter().map(|e| ms.transform_index(e.w).unwrap() as u32).collect();
        let depth = max_levels(n);
        let domains = (0..n)
            .map(|i| {
                let mut orients = Vec::new();
                if parent[i].is_some() {
                    orients.push(Orientation::TowardParent);
                }
                if parent.iter().any(|&p| p == Some(i)) {
                    orients.push(Orientation::TowardChild);
                }
                let mut records = Vec::new();
                for num in 1..=n as u32 {
                    for &maxw in &tws {
                        for &orient in &orients {
                            records.push(LevelRecord { num, maxw, orient });
                        }
                    }
                }
                let mut stacks: Vec<Vec<LevelRecord>> = vec![vec![]];
                let mut out = Vec::new();
                for _ in 0..depth {
                    for s in &stacks {
                        let mut closed = s.clone();
                        closed.push(LevelRecord::CENTER);
                        out.push(CertificateLabel { levels: closed, ..base[i].clone() });
                    }
                    stacks = stacks
                        .iter()
                        .flat_map(|s| {
                            records.iter().map(move |r| {
                                let mut t = s.clone();
                                t.push(*r);
                                t
                            })
                        })
                        .collect();
                }
                out
            })
            .collect();
        Prover { g, ms, order, domains, chosen: vec![None; n], checks: 0 }
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.domains.iter().map(Vec::len).collect()
    }

    fn label(&self, i: usize) -> Option<&CertificateLabel> {
        self.chosen[i].map(|c| &self.domains[i][c])
    }

    fn accepts_at(&mut self, i: usize) -> bool {
        self.checks += 1;
        let neighbors: Vec<LabelNeighbor<'_>> = self
            .g
            .neighbors(i)
            .iter()
            .map(|a| LabelNeighbor { id: a.id, weight: a.weight, label: self.label(a.index) })
            .collect();
        let mode = if neighbors.iter().all(|nb| nb.label.is_some()) { Mode::Full } else { Mode::Partial };
        let view = LabelView { id: self.g.id(i), n: self.g.n(), label: self.label(i).unwrap(), neighbors };
        accepts(&view, self.ms, mode)
    }

    /// A labeling every node accepts, if one exists.
    pub fn find(&mut self) -> Option<Vec<CertificateLabel>> {
        if self.extend(0, &vec![0; max_levels(self.g.n())]) {
            Some((0..self.g.n()).map(|i| self.label(i).unwrap().clone()).collect())
        } else {
            None
        }
    }

    fn extend(&mut self, depth: usize, used: &[u32]) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let i = self.order[depth];
        for c in 0..self.domains[i].len() {
            let levels = &self.domains[i][c].levels;
            if levels.iter().zip(used).any(|(r, &u)| r.num > u + 1) {
                continue;
            }
            let next: Vec<u32> =
                used.iter().enumerate().map(|(l, &u)| levels.get(l).map_or(u, |r| u.max(r.num))).collect();
            self.chosen[i] = Some(c);
            if self.accepts_at(i) && self.assigned_neighbors_accept(i) && self.extend(depth + 1, &next) {
                return true;
            }
        }
        self.chosen[i] = None;
        false
    }

    fn assigned_neighbors_accept(&mut self, i: usize) -> bool {
        let nbs: Vec<usize> = self.g.neighbors(i).iter().map(|a| a.index).collect();
        nbs.into_iter().all(|j| self.chosen[j].is_none() || self.accepts_at(j))
    }
}
