//! Immutable weighted network model, generators and the text format.
//!
//! Nodes are stored densely (index `0..n`) and carry a unique positive
//! [`NodeId`]. Adjacency lists are sorted by neighbour identifier so that
//! every per-edge variable of the protocol has a stable position.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Weight = u64;

/// Unique node identifier. Zero is reserved as the encoding of "none".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const NONE: NodeId = NodeId(0);

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid size {n} for a {kind} graph")]
    InvalidSize { kind: GraphKind, n: usize },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: u32, v: u32 },
    #[error("line {line}: weight {w} outside [1, {max}]")]
    WeightOutOfRange { line: usize, w: Weight, max: Weight },
    #[error("line {line}: identifier {id} outside [1, {max}]")]
    IdOutOfRange { line: usize, id: u64, max: u64 },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("expected {expected} distinct nodes, found {found}")]
    NodeCount { expected: usize, found: usize },
}

/// One undirected edge, stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub w: Weight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Adjacent {
    pub index: usize,
    pub id: NodeId,
    pub weight: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    ids: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
    adj: Vec<Vec<Adjacent>>,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Builds a graph from `(u, v, w)` triples over the given identifiers.
    ///
    /// Checks connectivity, duplicates and self-loops. Weight and identifier
    /// ranges are the caller's business (see [`parse_graph`]).
    pub fn from_edges(
        ids: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId, Weight)>,
    ) -> Result<Self, GraphError> {
        let mut ids: Vec<NodeId> = ids.into_iter().collect();
        ids.sort();
        ids.dedup();
        let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for (line, (a, b, w)) in edges.into_iter().enumerate() {
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if u == v {
                return Err(GraphError::Syntax { line: line + 1, msg: format!("self-loop at {u}") });
            }
            if !index.contains_key(&u) || !index.contains_key(&v) {
                return Err(GraphError::Syntax { line: line + 1, msg: format!("unknown endpoint in {u}-{v}") });
            }
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge { line: line + 1, u: u.0, v: v.0 });
            }
            list.push(Edge { u, v, w });
        }
        list.sort();
        let mut adj = vec![Vec::new(); ids.len()];
        for e in &list {
            let (iu, iv) = (index[&e.u], index[&e.v]);
            adj[iu].push(Adjacent { index: iv, id: e.v, weight: e.w });
            adj[iv].push(Adjacent { index: iu, id: e.u, weight: e.w });
        }
        for a in &mut adj {
            a.sort_by_key(|x| x.id);
        }
        let g = WeightedGraph { ids, index, adj, edges: list };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> NodeId {
        self.ids[index]
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Neighbours of the node at `index`, sorted by identifier.
    pub fn neighbors(&self, index: usize) -> &[Adjacent] {
        &self.adj[index]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adj[index].len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<Weight> {
        let ia = self.index_of(a)?;
        self.adj[ia].iter().find(|x| x.id == b).map(|x| x.weight)
    }

    pub fn max_id(&self) -> NodeId {
        self.ids.last().copied().unwrap_or(NodeId(1))
    }

    pub fn max_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.w).max().unwrap_or(1)
    }

    pub fn is_connected(&self) -> bool {
        if self.ids.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for a in &self.adj[x] {
                if !seen[a.index] {
                    seen[a.index] = true;
                    count += 1;
                    queue.push_back(a.index);
                }
            }
        }
        count == self.n()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Path,
    Star,
    Complete,
    Grid,
    RandomConnected,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GraphKind::Path => "path",
            GraphKind::Star => "star",
            GraphKind::Complete => "complete",
            GraphKind::Grid => "grid",
            GraphKind::RandomConnected => "random_connected",
        };
        f.write_str(s)
    }
}

impl FromStr for GraphKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "path" => GraphKind::Path,
            "star" => GraphKind::Star,
            "complete" => GraphKind::Complete,
            "grid" => GraphKind::Grid,
            "random_connected" | "random" => GraphKind::RandomConnected,
            _ => return Err(format!("unknown graph kind `{s}`")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightDist {
    Uniform1ToN,
    AllEqual,
    /// Weights `1..=n` cycled over the edges, then shuffled. Distinct
    /// whenever `m <= n`.
    DistinctShuffled,
}

impl fmt::Display for WeightDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WeightDist::Uniform1ToN => "uniform_1_to_n",
            WeightDist::AllEqual => "all_equal",
            WeightDist::DistinctShuffled => "distinct_shuffled",
        };
        f.write_str(s)
    }
}

impl FromStr for WeightDist {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "uniform_1_to_n" | "uniform" => WeightDist::Uniform1ToN,
            "all_equal" | "equal" => WeightDist::AllEqual,
            "distinct_shuffled" | "distinct" => WeightDist::DistinctShuffled,
            _ => return Err(format!("unknown weight distribution `{s}`")),
        })
    }
}

/// Deterministic graph generator. Identifiers are `1..=n`.
pub fn generate(kind: GraphKind, n: usize, dist: WeightDist, seed: u64) -> Result<WeightedGraph, GraphError> {
    let bad = || GraphError::InvalidSize { kind, n };
    if n == 0 || n > u32::MAX as usize / 2 {
        return Err(bad());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    match kind {
        GraphKind::Path => pairs.extend((1..n as u32).map(|i| (i, i + 1))),
        GraphKind::Star => pairs.extend((2..=n as u32).map(|i| (1, i))),
        GraphKind::Complete => {
            for u in 1..=n as u32 {
                for v in u + 1..=n as u32 {
                    pairs.push((u, v));
                }
            }
        }
        GraphKind::Grid => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return Err(bad());
            }
            let id = |r: usize, c: usize| (r * side + c + 1) as u32;
            for r in 0..side {
                for c in 0..side {
                    if c + 1 < side {
                        pairs.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < side {
                        pairs.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
        }
        GraphKind::RandomConnected => {
            let mut order: Vec<u32> = (1..=n as u32).collect();
            order.shuffle(&mut rng);
            let mut present = BTreeSet::new();
            for i in 1..n {
                let j = rng.gen_range(0..i);
                let (a, b) = (order[i].min(order[j]), order[i].max(order[j]));
                present.insert((a, b));
            }
            let p = (3.0 / n as f64).min(1.0);
            for u in 1..=n as u32 {
                for v in u + 1..=n as u32 {
                    if !present.contains(&(u, v)) && rng.gen_bool(p) {
                        present.insert((u, v));
                    }
                }
            }
            pairs.extend(present);
        }
    }
    let nw = n as Weight;
    let weights: Vec<Weight> = match dist {
        WeightDist::AllEqual => vec![1; pairs.len()],
        WeightDist::Uniform1ToN => (0..pairs.len()).map(|_| rng.gen_range(1..=nw)).collect(),
        WeightDist::DistinctShuffled => {
            let mut w: Vec<Weight> = (0..pairs.len()).map(|i| (i as Weight % nw) + 1).collect();
            w.shuffle(&mut rng);
            w
        }
    };
    let ids = (1..=n as u32).map(NodeId);
    let edges = pairs.into_iter().zip(weights).map(|((u, v), w)| (NodeId(u), NodeId(v), w));
    WeightedGraph::from_edges(ids, edges)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept weights up to `n^3` instead of `n`.
    pub polynomial_weights: bool,
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph, GraphError> {
    parse_graph_with(text, ParseOptions::default())
}

pub fn parse_graph_with(text: &str, opts: ParseOptions) -> Result<WeightedGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(GraphError::Syntax { line: 1, msg: "missing header".into() })?;
    let head = numbers(hline, header, 2)?;
    let (n, m) = (head[0] as usize, head[1] as usize);
    if n == 0 {
        return Err(GraphError::Syntax { line: hline, msg: "n must be positive".into() });
    }
    let n64 = n as u64;
    let max_id = n64.saturating_mul(n64).saturating_mul(n64).min(u32::MAX as u64);
    let max_w = if opts.polynomial_weights { n64.saturating_mul(n64).saturating_mul(n64) } else { n64 };
    let mut seen = BTreeSet::new();
    let mut ids = BTreeSet::new();
    let mut edges = Vec::with_capacity(m);
    for (line, l) in lines {
        let f = numbers(line, l, 3)?;
        let (u, v, w) = (f[0], f[1], f[2]);
        for id in [u, v] {
            if id == 0 || id > max_id {
                return Err(GraphError::IdOutOfRange { line, id, max: max_id });
            }
        }
        if u >= v {
            return Err(GraphError::Syntax { line, msg: format!("expected u < v, got {u} {v}") });
        }
        if w == 0 || w > max_w {
            return Err(GraphError::WeightOutOfRange { line, w, max: max_w });
        }
        if !seen.insert((u, v)) {
            return Err(GraphError::DuplicateEdge { line, u: u as u32, v: v as u32 });
        }
        ids.insert(NodeId(u as u32));
        ids.insert(NodeId(v as u32));
        edges.push((NodeId(u as u32), NodeId(v as u32), w));
    }
    if edges.len() != m {
        return Err(GraphError::Syntax { line: 0, msg: format!("header declares {m} edges, found {}", edges.len()) });
    }
    if n == 1 && m == 0 {
        ids.insert(NodeId(1));
    }
    if ids.len() != n {
        if ids.len() < n && m + 1 < n {
            return Err(GraphError::Disconnected);
        }
        return Err(GraphError::NodeCount { expected: n, found: ids.len() });
    }
    WeightedGraph::from_edges(ids, edges)
}

fn numbers(line: usize, text: &str, count: usize) -> Result<Vec<u64>, GraphError> {
    let v: Result<Vec<u64>, _> = text.split_whitespace().map(str::parse::<u64>).collect();
    match v {
        Ok(v) if v.len() == count => Ok(v),
        Ok(v) => Err(GraphError::Syntax { line, msg: format!("expected {count} fields, found {}", v.len()) }),
        Err(e) => Err(GraphError::Syntax { line, msg: e.to_string() }),
    }
}

/// Canonical text form: header, then edges sorted by `(u, v)`.
pub fn write_graph(g: &WeightedGraph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for e in g.edges() {
        out.push_str(&format!("{} {} {}\n", e.u, e.v, e.w));
    }
    out
}
