//! Node state of the protocol stack, its static environment and bit metering.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bits::{gamma_len, width_for};
use crate::cert::{max_levels, CertificateLabel};
use crate::graph::{NodeId, Weight, WeightedGraph};
use crate::quant::{ceil_log2, MilestoneSet};
use crate::sim::LocalView;

/// Non-mutable memory shared by every node: network size, milestones and the
/// derived field widths.
#[derive(Clone, Debug)]
pub struct Env {
    pub n: usize,
    pub ms: MilestoneSet,
    pub alpha: Ratio<u64>,
    /// `floor(alpha * max(1, ceil(log2 n)) * s)`.
    pub cap_bits: u64,
    pub id_w: u32,
    pub cnt_w: u32,
    pub s: u32,
    pub max_levels: usize,
}

impl Env {
    pub fn new(g: &WeightedGraph, ms: MilestoneSet, alpha: Ratio<u64>) -> Self {
        let n = g.n();
        let s = ms.code_length().max(1);
        let log_n = ceil_log2(n as u64).max(1) as u64;
        let cap_bits = (alpha * Ratio::from_integer(log_n * s as u64)).to_integer();
        Env {
            n,
            id_w: width_for(g.max_id().get() as u64),
            cnt_w: width_for(n as u64),
            s,
            max_levels: max_levels(n),
            cap_bits,
            alpha,
            ms,
        }
    }

    /// Milestone index of `w`; weights outside the milestone range map past the end.
    pub fn tw(&self, w: Weight) -> u32 {
        self.ms.transform_index(w).map_or(self.ms.len() as u32, |i| i as u32)
    }
}

pub type View<'a> = LocalView<'a, NodeState, Env>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Reset,
    Build,
    Augment,
    Certify,
    Done,
}

impl Phase {
    pub const ALL: [Phase; 5] = [Phase::Reset, Phase::Build, Phase::Augment, Phase::Certify, Phase::Done];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wave {
    None,
    Freeze,
    Clean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResetVars {
    /// Counter modulo 4.
    pub epoch: u8,
    pub wave: Wave,
}

/// Position of the traversal token relative to a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Visit {
    Idle,
    Here,
    InChild(NodeId),
    Done,
}

/// Four-state wave: broadcast, feedback, cleaning broadcast, idle feedback.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pif {
    Idle,
    Bcast,
    Fback,
    Clean,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BuildVars {
    pub bb_root: NodeId,
    pub bb_parent: Option<NodeId>,
    pub bb_dist: u32,
    pub visit: Visit,
    /// Set once a traversal counted every node.
    pub bb_ok: bool,
    /// Milestone index currently processed by the token.
    pub phase_w: u32,
    pub count: u32,
    pub added: bool,
    pub merged: bool,
    pub comp: NodeId,
    /// One bit per incident edge, in neighbour identifier order.
    pub sel: Vec<bool>,
    pub rn: Pif,
    pub rn_parent: Option<NodeId>,
    /// Depth in the oriented tree, written during augmentation.
    pub depth: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertWave {
    Idle,
    Bcast,
    Fback,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CertVars {
    /// The acyclicity part doubles as the augmentation output.
    pub label: CertificateLabel,
    pub w_parent: Option<NodeId>,
    pub w_desc: u32,
    pub in_transfer: bool,
    pub cursor: Option<(NodeId, u32)>,
    pub wave: CertWave,
}

impl CertVars {
    pub fn blank() -> Self {
        CertVars {
            label: CertificateLabel::default(),
            w_parent: None,
            w_desc: 0,
            in_transfer: false,
            cursor: None,
            wave: CertWave::Idle,
        }
    }

    pub fn clear_working(&mut self) {
        self.w_parent = None;
        self.w_desc = 0;
        self.in_transfer = false;
        self.cursor = None;
        self.wave = CertWave::Idle;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeState {
    pub phase: Phase,
    pub reset: ResetVars,
    pub build: BuildVars,
    pub cert: CertVars,
}

impl NodeState {
    /// The clean post-reset state of node `id` with `degree` incident edges.
    pub fn blank(id: NodeId, degree: usize) -> Self {
        NodeState {
            phase: Phase::Build,
            reset: ResetVars { epoch: 0, wave: Wave::None },
            build: BuildVars {
                bb_root: id,
                bb_parent: None,
                bb_dist: 0,
                visit: Visit::Idle,
                bb_ok: false,
                phase_w: 0,
                count: 0,
                added: false,
                merged: false,
                comp: id,
                sel: vec![false; degree],
                rn: Pif::Idle,
                rn_parent: None,
                depth: 0,
            },
            cert: CertVars::blank(),
        }
    }

    /// Blank variable blocks, keeping the reset block.
    pub fn wiped(&self, id: NodeId, degree: usize) -> Self {
        NodeState { reset: self.reset, ..NodeState::blank(id, degree) }
    }

    pub fn in_reset(&self) -> bool {
        self.reset.wave != Wave::None || self.phase == Phase::Reset
    }
}

/// Bits per level record: orientation code, then for non-centers the gamma
/// code of the subtree number and one milestone index.
pub fn level_bits(num: u32, center: bool, env: &Env) -> u64 {
    if center {
        2
    } else {
        2 + gamma_len(num.max(1) as u64) as u64 + env.s as u64
    }
}

/// Length of the canonical encoding of `st`.
pub fn serialized_bits(st: &NodeState, env: &Env) -> u64 {
    let id = env.id_w as u64;
    let cnt = env.cnt_w as u64;
    let s = env.s as u64;
    let reset = 3 + 2 + 2;
    let build = id + id + cnt // backbone
        + 2 + id + 1 + s + cnt + 1 + 1 // token
        + id + st.build.sel.len() as u64 + 2 + id // forest and renaming
        + cnt; // depth
    let label = &st.cert.label;
    let cert = id + cnt + cnt + cnt
        + label.levels.iter().map(|r| level_bits(r.num, r.is_center(), env)).sum::<u64>()
        + id + cnt + 1 + (1 + id + cnt) + 2;
    reset + build + cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::LevelRecord;
    use crate::cert::Orientation;
    use crate::graph::{generate, GraphKind, WeightDist};

    fn env16(k: i32) -> (WeightedGraph, Env) {
        let g = generate(GraphKind::Path, 16, WeightDist::AllEqual, 0).unwrap();
        let env = Env::new(&g, MilestoneSet::new(16, k).unwrap(), Ratio::from_integer(8));
        (g, env)
    }

    #[test]
    fn widths_for_sixteen() {
        let (_, env) = env16(0);
        assert_eq!((env.id_w, env.cnt_w, env.s, env.max_levels), (5, 5, 3, 5));
        assert_eq!(env.cap_bits, 8 * 4 * 3);
    }

    #[test]
    fn blank_state_size_is_fixed() {
        let (_, env) = env16(0);
        // interior path node: two incident edges
        let st = NodeState::blank(NodeId(2), 2);
        // reset 7, build 15+18+14+5, cert 20+24
        assert_eq!(serialized_bits(&st, &env), 103);
    }

    #[test]
    fn one_level_costs_its_record() {
        let (_, env) = env16(0);
        let mut st = NodeState::blank(NodeId(2), 2);
        let before = serialized_bits(&st, &env);
        st.cert.label.levels.push(LevelRecord { num: 3, maxw: 1, orient: Orientation::TowardChild });
        assert_eq!(serialized_bits(&st, &env) - before, 2 + 3 + 3);
        st.cert.label.levels.push(LevelRecord::CENTER);
        assert_eq!(serialized_bits(&st, &env) - before, 2 + 3 + 3 + 2);
    }
}
