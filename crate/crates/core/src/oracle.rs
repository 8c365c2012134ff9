//! Sequential ground truth: Kruskal, exhaustive enumeration and spanning-tree checks.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{NodeId, Weight, WeightedGraph};

/// Set of unordered node pairs, stored normalized as `(min, max)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeSet(BTreeSet<(NodeId, NodeId)>);

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: NodeId, b: NodeId) -> bool {
        self.0.insert(if a < b { (a, b) } else { (b, a) })
    }

    pub fn contains(&self, a: NodeId, b: NodeId) -> bool {
        self.0.contains(&if a < b { (a, b) } else { (b, a) })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.0.iter().copied()
    }

    /// Sum of `f(w)` over the edges; `None` if some pair is not a graph edge.
    pub fn total_weight(&self, g: &WeightedGraph, f: impl Fn(Weight) -> Weight) -> Option<Weight> {
        self.iter().map(|(a, b)| g.weight(a, b).map(&f)).sum()
    }
}

impl FromIterator<(NodeId, NodeId)> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = (NodeId, NodeId)>>(iter: I) -> Self {
        let mut s = EdgeSet::new();
        for (a, b) in iter {
            s.insert(a, b);
        }
        s
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KruskalResult {
    pub tree: EdgeSet,
    /// Total under the weight function used for the ordering.
    pub weight: Weight,
    /// Total under the original weights.
    pub original_weight: Weight,
}

/// Minimum spanning tree under `weight_fn(w)`; ties broken by
/// `(weight, min endpoint, max endpoint)`.
pub fn kruskal(g: &WeightedGraph, weight_fn: impl Fn(Weight) -> Weight) -> KruskalResult {
    let mut order: Vec<_> = g.edges().iter().map(|e| (weight_fn(e.w), e.u, e.v, e.w)).collect();
    order.sort();
    let mut uf = UnionFind::new(g.n());
    let mut tree = EdgeSet::new();
    let (mut weight, mut original_weight) = (0, 0);
    for (tw, u, v, w) in order {
        let (iu, iv) = (g.index_of(u).unwrap(), g.index_of(v).unwrap());
        if uf.union(iu, iv) {
            tree.insert(u, v);
            weight += tw;
            original_weight += w;
        }
    }
    KruskalResult { tree, weight, original_weight }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("graph with {0} nodes is too large for enumeration (max {MAX_ENUMERATION_NODES})")]
pub struct TooLarge(pub usize);

pub const MAX_ENUMERATION_NODES: usize = 9;

/// Minimum original weight over every spanning tree, by enumerating all
/// `(n-1)`-subsets of edges.
pub fn brute_force_mst_weight(g: &WeightedGraph) -> Result<Weight, TooLarge> {
    brute_force_mst_weight_with(g, |w| w)
}

pub fn brute_force_mst_weight_with(g: &WeightedGraph, weight_fn: impl Fn(Weight) -> Weight) -> Result<Weight, TooLarge> {
    let mut best = None;
    for_each_spanning_tree(g, |tree| {
        let w = tree.total_weight(g, &weight_fn).unwrap();
        best = Some(best.map_or(w, |b: Weight| b.min(w)));
    })?;
    Ok(best.unwrap_or(0))
}

/// Calls `f` on every spanning tree of `g`.
pub fn for_each_spanning_tree(g: &WeightedGraph, mut f: impl FnMut(&EdgeSet)) -> Result<(), TooLarge> {
    let n = g.n();
    if n > MAX_ENUMERATION_NODES {
        return Err(TooLarge(n));
    }
    if n == 1 {
        f(&EdgeSet::new());
        return Ok(());
    }
    let mut chosen = Vec::with_capacity(n - 1);
    fn rec(
        g: &WeightedGraph,
        start: usize,
        chosen: &mut Vec<usize>,
        f: &mut dyn FnMut(&EdgeSet),
    ) {
        let need = g.n() - 1;
        if chosen.len() == need {
            let set: EdgeSet = chosen.iter().map(|&i| (g.edges()[i].u, g.edges()[i].v)).collect();
            if is_spanning_tree(g, &set) {
                f(&set);
            }
            return;
        }
        let remaining = need - chosen.len();
        for i in start..=g.m().saturating_sub(remaining) {
            if i >= g.m() {
                break;
            }
            chosen.push(i);
            rec(g, i + 1, chosen, f);
            chosen.pop();
        }
    }
    rec(g, 0, &mut chosen, &mut f);
    Ok(())
}

/// True iff `es` has `n-1` graph edges and connects every node.
pub fn is_spanning_tree(g: &WeightedGraph, es: &EdgeSet) -> bool {
    if es.len() + 1 != g.n() {
        return false;
    }
    let mut uf = UnionFind::new(g.n());
    for (a, b) in es.iter() {
        if g.weight(a, b).is_none() {
            return false;
        }
        if !uf.union(g.index_of(a).unwrap(), g.index_of(b).unwrap()) {
            return false;
        }
    }
    true
}
