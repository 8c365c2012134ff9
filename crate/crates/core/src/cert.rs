//! Proof-labeling scheme for minimum spanning trees.
//!
//! A label has two parts. The acyclicity part is a parent pointer, the
//! number of descendants and the network size. The second part is a stack of
//! per-level records obtained from a recursive centroid decomposition: at
//! each level a non-center node stores the number of its subtree (numbered by
//! decreasing size), the heaviest transformed weight on its path to the
//! center, and whether that center lies towards its parent or towards one of
//! its children. A center closes its stack with a `SelfIsCenter` record.
//!
//! For a non-tree edge the two endpoints find the first level where their
//! records separate; the tree path between them then runs through that
//! level's center, so its heaviest edge is the larger of the two stored
//! maxima. A strictly lighter non-tree edge is a witness against minimality.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NodeId, Weight, WeightedGraph};
use crate::oracle::{is_spanning_tree, EdgeSet};
use crate::quant::MilestoneSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    SelfIsCenter,
    TowardParent,
    TowardChild,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelRecord {
    /// Subtree number, `>= 1` for non-centers; unused for centers.
    pub num: u32,
    /// Milestone index of the heaviest transformed weight towards the center.
    pub maxw: u32,
    pub orient: Orientation,
}

impl LevelRecord {
    pub const CENTER: LevelRecord = LevelRecord { num: 0, maxw: 0, orient: Orientation::SelfIsCenter };

    pub fn is_center(&self) -> bool {
        self.orient == Orientation::SelfIsCenter
    }

    /// Path maximum as seen by the separation test; a center has none.
    pub fn path_max(&self) -> Option<u32> {
        (!self.is_center()).then_some(self.maxw)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CertificateLabel {
    pub parent: Option<NodeId>,
    pub desc: u32,
    pub total: u32,
    pub levels: Vec<LevelRecord>,
}

impl CertificateLabel {
    pub fn center_level(&self) -> Option<usize> {
        match self.levels.last() {
            Some(r) if r.is_center() => Some(self.levels.len() - 1),
            _ => None,
        }
    }
}

/// `floor(log2 n) + 1`, the depth of a balanced decomposition.
pub fn max_levels(n: usize) -> usize {
    (usize::BITS - n.max(1).leading_zeros()) as usize
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertError {
    #[error("edge set is not a spanning tree of the graph")]
    NotASpanningTree,
}

/// Tree adjacency over graph indices.
#[derive(Clone, Debug)]
pub struct TreeAdj {
    adj: Vec<Vec<usize>>,
}

impl TreeAdj {
    pub fn new(g: &WeightedGraph, tree: &EdgeSet) -> Self {
        let mut adj = vec![Vec::new(); g.n()];
        for (a, b) in tree.iter() {
            let (ia, ib) = (g.index_of(a).unwrap(), g.index_of(b).unwrap());
            adj[ia].push(ib);
            adj[ib].push(ia);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        TreeAdj { adj }
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Component of `start` inside `alive`.
    fn component(&self, start: usize, alive: &[bool]) -> Vec<usize> {
        let mut seen = BTreeMap::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start, ());
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if alive[y] && seen.insert(y, ()).is_none() {
                    queue.push_back(y);
                }
            }
        }
        seen.into_keys().collect()
    }
}

/// A node of `scope` whose removal leaves pieces of size at most
/// `|scope| / 2`; the smallest identifier wins ties.
pub fn find_center(g: &WeightedGraph, tree: &TreeAdj, scope: &[usize]) -> usize {
    assert!(!scope.is_empty());
    let mut alive = vec![false; g.n()];
    for &i in scope {
        alive[i] = true;
    }
    let half = scope.len() / 2;
    let mut best: Option<usize> = None;
    for &c in scope {
        alive[c] = false;
        let ok = tree.neighbors(c).iter().filter(|&&y| alive[y]).all(|&y| tree.component(y, &alive).len() <= half);
        alive[c] = true;
        if ok && best.map_or(true, |b| g.id(c) < g.id(b)) {
            best = Some(c);
        }
    }
    best.expect("every tree has a centroid")
}

/// Honest labels for `tree`, oriented towards its smallest identifier.
/// Labels are indexed like the graph.
pub fn reference_label(g: &WeightedGraph, tree: &EdgeSet, ms: &MilestoneSet) -> Result<Vec<CertificateLabel>, CertError> {
    if !is_spanning_tree(g, tree) {
        return Err(CertError::NotASpanningTree);
    }
    let t = TreeAdj::new(g, tree);
    let n = g.n();
    let tw = |a: usize, b: usize| ms.transform_index(g.weight(g.id(a), g.id(b)).unwrap()).unwrap() as u32;
    let mut labels = vec![CertificateLabel::default(); n];

    // acyclicity part: BFS from index 0 (smallest identifier)
    let mut parent = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for &y in t.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some(x);
                queue.push_back(y);
            }
        }
    }
    let mut desc = vec![1u32; n];
    for &x in order.iter().rev() {
        if let Some(p) = parent[x] {
            desc[p] += desc[x];
        }
    }
    for i in 0..n {
        labels[i].parent = parent[i].map(|p| g.id(p));
        labels[i].desc = desc[i];
        labels[i].total = n as u32;
    }

    // recursive centers
    let mut alive = vec![true; n];
    let mut work = vec![(0..n).collect::<Vec<_>>()];
    while let Some(scope) = work.pop() {
        let c = find_center(g, &t, &scope);
        labels[c].levels.push(LevelRecord::CENTER);
        alive[c] = false;
        let mut subtrees: Vec<Vec<usize>> = t
            .neighbors(c)
            .iter()
            .filter(|&&y| alive[y])
            .map(|&y| t.component(y, &alive))
            .collect();
        // root of each subtree is the neighbour of c it contains
        let root_of = |s: &Vec<usize>| *t.neighbors(c).iter().find(|y| s.binary_search(y).is_ok()).unwrap();
        subtrees.sort_by_key(|s| (std::cmp::Reverse(s.len()), g.id(root_of(s))));
        for (k, sub) in subtrees.iter().enumerate() {
            let root = root_of(sub);
            // walk outwards from the subtree root, tracking the path maximum
            let mut queue = VecDeque::from([(root, c, tw(root, c))]);
            while let Some((x, toward, m)) = queue.pop_front() {
                let orient = if parent[x] == Some(toward) { Orientation::TowardParent } else { Orientation::TowardChild };
                labels[x].levels.push(LevelRecord { num: k as u32 + 1, maxw: m, orient });
                for &y in t.neighbors(x) {
                    if alive[y] && y != toward {
                        queue.push_back((y, x, m.max(tw(x, y))));
                    }
                }
            }
            work.push(sub.clone());
        }
    }
    Ok(labels)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Malformed,
    Acyclicity,
    LevelStructure,
    Orientation,
    MaxWeight,
    Cut,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(Vec<Reason>),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// `Full` requires every neighbour label and a closed stack. `Partial` runs
/// only the checks whose inputs are available, for labels still being built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Full,
    Partial,
}

#[derive(Clone, Copy, Debug)]
pub struct LabelNeighbor<'a> {
    pub id: NodeId,
    pub weight: Weight,
    pub label: Option<&'a CertificateLabel>,
}

#[derive(Clone, Debug)]
pub struct LabelView<'a> {
    pub id: NodeId,
    pub n: usize,
    pub label: &'a CertificateLabel,
    pub neighbors: Vec<LabelNeighbor<'a>>,
}

struct Sink {
    reasons: Vec<Reason>,
    first_only: bool,
}

impl Sink {
    fn fail(&mut self, r: Reason) {
        if !self.reasons.contains(&r) {
            self.reasons.push(r);
        }
    }

    fn stop(&self) -> bool {
        self.first_only && !self.reasons.is_empty()
    }
}

pub fn verify_node(view: &LabelView<'_>, ms: &MilestoneSet, mode: Mode) -> Verdict {
    let mut sink = Sink { reasons: Vec::new(), first_only: false };
    check(view, ms, mode, &mut sink);
    if sink.reasons.is_empty() {
        Verdict::Accept
    } else {
        Verdict::Reject(sink.reasons)
    }
}

/// Same decision as [`verify_node`], stopping at the first failed check.
pub fn accepts(view: &LabelView<'_>, ms: &MilestoneSet, mode: Mode) -> bool {
    let mut sink = Sink { reasons: Vec::new(), first_only: true };
    check(view, ms, mode, &mut sink);
    sink.reasons.is_empty()
}

fn check(view: &LabelView<'_>, ms: &MilestoneSet, mode: Mode, sink: &mut Sink) {
    let me = view.label;
    let lv = &me.levels;
    let full = mode == Mode::Full;
    let tw = |w: Weight| ms.transform_index(w).map_or(u32::MAX, |i| i as u32);

    // well-formedness
    let last_center = lv.last().map_or(false, |r| r.is_center());
    let malformed = (full && !last_center)
        || lv.len() > max_levels(view.n)
        || lv.iter().rev().skip(1).any(|r| r.is_center())
        || lv.iter().any(|r| !r.is_center() && (r.num == 0 || r.maxw as usize >= ms.len()))
        || me.total as usize != view.n
        || me.desc == 0
        || me.desc > me.total
        || me.parent.map_or(false, |p| !view.neighbors.iter().any(|nb| nb.id == p))
        || (full && view.neighbors.iter().any(|nb| nb.label.is_none()));
    if malformed {
        sink.fail(Reason::Malformed);
        if sink.stop() {
            return;
        }
    }

    // acyclicity: counts, agreement on the size, unique root
    if me.parent.is_none() != (me.desc == me.total) {
        sink.fail(Reason::Acyclicity);
    }
    let mut all_known = true;
    let mut child_sum = 0u64;
    for nb in &view.neighbors {
        match nb.label {
            Some(l) => {
                if l.total != me.total {
                    sink.fail(Reason::Acyclicity);
                }
                if l.parent == Some(view.id) {
                    child_sum += l.desc as u64;
                    if me.parent == Some(nb.id) {
                        sink.fail(Reason::Acyclicity);
                    }
                }
            }
            None => all_known = false,
        }
    }
    if all_known && child_sum + 1 != me.desc as u64 {
        sink.fail(Reason::Acyclicity);
    }
    if sink.stop() {
        return;
    }

    let points_to = |rec: &LevelRecord, nb_id: NodeId, nb_label: &CertificateLabel| match rec.orient {
        Orientation::TowardParent => me.parent == Some(nb_id),
        Orientation::TowardChild => nb_label.parent == Some(view.id),
        Orientation::SelfIsCenter => false,
    };

    for nb in &view.neighbors {
        let Some(other) = nb.label else { continue };
        let ol = &other.levels;
        let is_tree = me.parent == Some(nb.id) || other.parent == Some(view.id);
        let m = lv.len().min(ol.len());
        // first level where the two stacks separate
        let mut sep = None;
        for l in 0..m {
            if lv[l].is_center() || ol[l].is_center() || lv[l].num != ol[l].num {
                sep = Some(l);
                break;
            }
        }
        if is_tree {
            match sep {
                Some(l) => {
                    let (a, b) = (lv[l], ol[l]);
                    if a.is_center() && b.is_center() {
                        sink.fail(Reason::LevelStructure);
                    } else if !a.is_center() && !b.is_center() {
                        // adjacent non-centers always share their subtree
                        sink.fail(Reason::LevelStructure);
                    } else if b.is_center() {
                        if !points_to(&a, nb.id, other) {
                            sink.fail(Reason::Orientation);
                        }
                        if a.maxw != tw(nb.weight) {
                            sink.fail(Reason::MaxWeight);
                        }
                    }
                }
                None if full => sink.fail(Reason::LevelStructure),
                None => {}
            }
        } else {
            match sep {
                Some(l) => {
                    if lv[l].is_center() && ol[l].is_center() {
                        sink.fail(Reason::LevelStructure);
                    } else if Some(tw(nb.weight)) < lv[l].path_max().max(ol[l].path_max()) {
                        sink.fail(Reason::Cut);
                    }
                }
                None if full => sink.fail(Reason::LevelStructure),
                None => {}
            }
        }
        if sink.stop() {
            return;
        }
    }

    // every non-center record must be backed by the neighbour it points to
    for (l, rec) in lv.iter().enumerate() {
        if rec.is_center() {
            continue;
        }
        let mut unknown = false;
        let mut backed = false;
        let mut candidates = 0;
        for nb in &view.neighbors {
            let target = match rec.orient {
                Orientation::TowardParent => me.parent == Some(nb.id),
                _ => nb.label.map_or(false, |o| o.parent == Some(view.id)),
            };
            let is_child_slot = rec.orient == Orientation::TowardChild && nb.label.is_none();
            if !target && !is_child_slot {
                continue;
            }
            candidates += 1;
            let Some(o) = nb.label else {
                unknown = true;
                continue;
            };
            if o.levels.len() <= l || lv[..l].iter().zip(&o.levels[..l]).any(|(a, b)| b.is_center() || a.num != b.num) {
                continue;
            }
            let r = o.levels[l];
            let e = tw(nb.weight);
            let ok = if r.is_center() {
                rec.maxw == e
            } else {
                let points_back = match rec.orient {
                    Orientation::TowardChild => r.orient == Orientation::TowardParent,
                    _ => false,
                };
                r.num == rec.num && !points_back && rec.maxw == r.maxw.max(e)
            };
            if ok {
                backed = true;
                break;
            }
        }
        if !backed && !(unknown && !full) {
            sink.fail(if candidates == 0 { Reason::Orientation } else { Reason::MaxWeight });
            if sink.stop() {
                return;
            }
        }
    }

    // one center per component: children of the same component that do not
    // point up are the only way down, and a center numbers its subtrees apart
    for (l, rec) in lv.iter().enumerate() {
        let mut free = 0;
        let mut nums = Vec::new();
        for nb in &view.neighbors {
            let Some(o) = nb.label else { continue };
            if o.levels.len() <= l || lv[..l].iter().zip(&o.levels[..l]).any(|(a, b)| b.is_center() || a.num != b.num) {
                continue;
            }
            let r = o.levels[l];
            let child = o.parent == Some(view.id);
            if rec.is_center() && !r.is_center() && (child || me.parent == Some(nb.id)) {
                nums.push(r.num);
            }
            if child && r.orient != Orientation::TowardParent && (rec.is_center() || r.is_center() || r.num == rec.num) {
                free += 1;
            }
        }
        nums.sort_unstable();
        if nums.windows(2).any(|w| w[0] == w[1]) {
            sink.fail(Reason::LevelStructure);
        }
        if free > usize::from(rec.orient == Orientation::TowardChild) {
            sink.fail(Reason::Orientation);
        }
        if sink.stop() {
            return;
        }
    }
}

/// Builds the view of node `index` over a full labeling.
pub fn label_view<'a>(g: &'a WeightedGraph, labels: &'a [CertificateLabel], index: usize) -> LabelView<'a> {
    LabelView {
        id: g.id(index),
        n: g.n(),
        label: &labels[index],
        neighbors: g
            .neighbors(index)
            .iter()
            .map(|a| LabelNeighbor { id: a.id, weight: a.weight, label: Some(&labels[a.index]) })
            .collect(),
    }
}

/// Identifiers of the nodes rejecting `labels` in full mode.
pub fn verify_labels(g: &WeightedGraph, labels: &[CertificateLabel], ms: &MilestoneSet) -> Vec<NodeId> {
    (0..g.n()).filter(|&i| !accepts(&label_view(g, labels, i), ms, Mode::Full)).map(|i| g.id(i)).collect()
}

/// Tree encoded by the parent pointers of a labeling.
pub fn tree_of(g: &WeightedGraph, labels: &[CertificateLabel]) -> EdgeSet {
    (0..g.n()).filter_map(|i| labels[i].parent.map(|p| (g.id(i), p))).collect()
}

#[derive(Serialize, Deserialize)]
struct DumpLevel {
    num: u32,
    maxw_index: u32,
    orient: Orientation,
}

#[derive(Serialize, Deserialize)]
struct DumpLabel {
    id: NodeId,
    parent: Option<NodeId>,
    desc: u32,
    total: u32,
    levels: Vec<DumpLevel>,
}

/// JSON-lines label dump, one object per node.
pub fn dump_labels(g: &WeightedGraph, labels: &[CertificateLabel]) -> String {
    let mut out = String::new();
    for (i, l) in labels.iter().enumerate() {
        let d = DumpLabel {
            id: g.id(i),
            parent: l.parent,
            desc: l.desc,
            total: l.total,
            levels: l.levels.iter().map(|r| DumpLevel { num: r.num, maxw_index: r.maxw, orient: r.orient }).collect(),
        };
        out.push_str(&serde_json::to_string(&d).expect("plain record"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("label for unknown node {0}")]
    UnknownNode(NodeId),
    #[error("missing label for node {0}")]
    Missing(NodeId),
}

pub fn parse_labels(g: &WeightedGraph, text: &str) -> Result<Vec<CertificateLabel>, DumpError> {
    let mut labels: Vec<Option<CertificateLabel>> = vec![None; g.n()];
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let d: DumpLabel = serde_json::from_str(line).map_err(|source| DumpError::Json { line: i + 1, source })?;
        let idx = g.index_of(d.id).ok_or(DumpError::UnknownNode(d.id))?;
        labels[idx] = Some(CertificateLabel {
            parent: d.parent,
            desc: d.desc,
            total: d.total,
            levels: d.levels.into_iter().map(|r| LevelRecord { num: r.num, maxw: r.maxw_index, orient: r.orient }).collect(),
        });
    }
    labels.into_iter().enumerate().map(|(i, l)| l.ok_or(DumpError::Missing(g.id(i)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, parse_graph, GraphKind, WeightDist};
    use crate::oracle::kruskal;

    fn idx_tree(g: &WeightedGraph, pairs: &[(u32, u32)]) -> EdgeSet {
        let _ = g;
        pairs.iter().map(|&(a, b)| (NodeId(a), NodeId(b))).collect()
    }

    #[test]
    fn centers_of_small_trees() {
        let star = generate(GraphKind::Star, 5, WeightDist::AllEqual, 0).unwrap();
        let t = TreeAdj::new(&star, &kruskal(&star, |w| w).tree);
        assert_eq!(star.id(find_center(&star, &t, &[0, 1, 2, 3, 4])), NodeId(1));

        let path = generate(GraphKind::Path, 4, WeightDist::AllEqual, 0).unwrap();
        let t = TreeAdj::new(&path, &kruskal(&path, |w| w).tree);
        assert_eq!(path.id(find_center(&path, &t, &[0, 1, 2, 3])), NodeId(2));
        assert_eq!(find_center(&path, &t, &[3]), 3);
    }

    #[test]
    fn single_edge_labels() {
        let g = parse_graph("2 1\n1 2 2\n").unwrap();
        let ms = MilestoneSet::new(2, 0).unwrap();
        let labels = reference_label(&g, &idx_tree(&g, &[(1, 2)]), &ms).unwrap();
        assert_eq!(labels[0].levels, vec![LevelRecord::CENTER]);
        assert_eq!(labels[1].levels.len(), 2);
        assert_eq!(labels[1].levels[0], LevelRecord { num: 1, maxw: 1, orient: Orientation::TowardParent });
        assert!(verify_labels(&g, &labels, &ms).is_empty());
    }

    #[test]
    fn path_depth_is_logarithmic() {
        let g = generate(GraphKind::Path, 4, WeightDist::Uniform1ToN, 1).unwrap();
        let ms = MilestoneSet::new(4, 1).unwrap();
        let labels = reference_label(&g, &kruskal(&g, |w| w).tree, &ms).unwrap();
        assert!(labels.iter().all(|l| l.levels.len() <= 3));
        assert!(verify_labels(&g, &labels, &ms).is_empty());
    }

    #[test]
    fn heavy_tree_is_rejected() {
        let g = parse_graph("3 3\n1 2 1\n2 3 2\n1 3 3\n").unwrap();
        let ms = MilestoneSet::new(3, 1).unwrap();
        let bad = idx_tree(&g, &[(2, 3), (1, 3)]);
        let labels = reference_label(&g, &bad, &ms).unwrap();
        let rejecting = verify_labels(&g, &labels, &ms);
        assert!(rejecting.contains(&NodeId(1)) || rejecting.contains(&NodeId(2)));
    }

    #[test]
    fn broken_counts_are_rejected() {
        let g = generate(GraphKind::Path, 5, WeightDist::AllEqual, 0).unwrap();
        let ms = MilestoneSet::new(5, 0).unwrap();
        let mut labels = reference_label(&g, &kruskal(&g, |w| w).tree, &ms).unwrap();
        labels[2].desc += 1;
        let view = label_view(&g, &labels, 2);
        match verify_node(&view, &ms, Mode::Full) {
            Verdict::Reject(r) => assert!(r.contains(&Reason::Acyclicity)),
            Verdict::Accept => panic!("inconsistent count accepted"),
        }
    }

    #[test]
    fn dump_round_trip() {
        let g = generate(GraphKind::RandomConnected, 7, WeightDist::Uniform1ToN, 2).unwrap();
        let ms = MilestoneSet::new(7, 0).unwrap();
        let labels = reference_label(&g, &kruskal(&g, |w| ms.transform(w).unwrap()).tree, &ms).unwrap();
        assert_eq!(parse_labels(&g, &dump_labels(&g, &labels)).unwrap(), labels);
    }
}
