//! Transient-fault injection. Every produced state respects the field widths
//! of the encoding; the values themselves are arbitrary.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cert::{CertificateLabel, LevelRecord, Orientation};
use crate::graph::{NodeId, WeightedGraph};
use crate::sim::Configuration;

use super::state::{BuildVars, CertVars, CertWave, Env, NodeState, Phase, Pif, ResetVars, Visit, Wave};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corruption {
    None,
    RandomBits,
    SwapStates,
    StalePhase,
    GarbageCertificates,
}

impl Corruption {
    pub const FAULTS: [Corruption; 4] =
        [Corruption::RandomBits, Corruption::SwapStates, Corruption::StalePhase, Corruption::GarbageCertificates];

    /// Whether the policy starts from a stabilized configuration.
    pub fn needs_stable(self) -> bool {
        matches!(self, Corruption::SwapStates | Corruption::StalePhase | Corruption::GarbageCertificates)
    }
}

impl fmt::Display for Corruption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Corruption::None => "none",
            Corruption::RandomBits => "random_bits",
            Corruption::SwapStates => "swap_states",
            Corruption::StalePhase => "stale_phase",
            Corruption::GarbageCertificates => "garbage_certificates",
        })
    }
}

impl FromStr for Corruption {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "none" => Corruption::None,
            "random_bits" => Corruption::RandomBits,
            "swap_states" => Corruption::SwapStates,
            "stale_phase" => Corruption::StalePhase,
            "garbage_certificates" => Corruption::GarbageCertificates,
            _ => return Err(format!("unknown corruption policy `{s}`")),
        })
    }
}

fn below<R: Rng>(rng: &mut R, width: u32) -> u32 {
    rng.gen_range(0..(1u64 << width.min(31))) as u32
}

fn any_id<R: Rng>(rng: &mut R, env: &Env) -> NodeId {
    NodeId(below(rng, env.id_w))
}

fn any_opt_id<R: Rng>(rng: &mut R, env: &Env) -> Option<NodeId> {
    Some(any_id(rng, env)).filter(|id| id.get() != 0)
}

/// Prefer identifiers of actual neighbours so that garbage is locally plausible.
fn near_id<R: Rng>(rng: &mut R, env: &Env, g: &WeightedGraph, index: usize) -> Option<NodeId> {
    let adj = g.neighbors(index);
    match rng.gen_range(0..4) {
        0 => None,
        1 => any_opt_id(rng, env),
        _ => Some(adj[rng.gen_range(0..adj.len())].id),
    }
}

fn random_record<R: Rng>(rng: &mut R, env: &Env, degree: usize) -> LevelRecord {
    LevelRecord {
        num: rng.gen_range(1..=degree.max(1) as u32 + 1),
        maxw: below(rng, env.s).min(env.ms.len() as u32 - 1),
        orient: if rng.gen_bool(0.5) { Orientation::TowardParent } else { Orientation::TowardChild },
    }
}

fn random_label<R: Rng>(rng: &mut R, env: &Env, g: &WeightedGraph, index: usize, closed: bool) -> CertificateLabel {
    let n = env.n as u32;
    let depth = rng.gen_range(usize::from(closed)..=env.max_levels);
    let mut levels: Vec<LevelRecord> = (0..depth).map(|_| random_record(rng, env, g.degree(index))).collect();
    if closed || (depth > 0 && rng.gen_bool(0.3)) {
        if let Some(last) = levels.last_mut() {
            *last = LevelRecord::CENTER;
        }
    }
    CertificateLabel {
        parent: near_id(rng, env, g, index),
        desc: rng.gen_range(1..=n),
        total: if rng.gen_bool(0.8) { n } else { below(rng, env.cnt_w) },
        levels,
    }
}

/// A uniformly shaped, well-formed state with arbitrary values.
pub fn random_state<R: Rng>(rng: &mut R, env: &Env, g: &WeightedGraph, index: usize) -> NodeState {
    let degree = g.degree(index);
    let phase = Phase::ALL[rng.gen_range(0..5)];
    let wave = [Wave::None, Wave::None, Wave::Freeze, Wave::Clean][rng.gen_range(0..4)];
    let visit = match rng.gen_range(0..4) {
        0 => Visit::Idle,
        1 => Visit::Here,
        2 => Visit::InChild(near_id(rng, env, g, index).unwrap_or(NodeId(0))),
        _ => Visit::Done,
    };
    let pifs = [Pif::Idle, Pif::Bcast, Pif::Fback, Pif::Clean];
    let build = BuildVars {
        bb_root: any_id(rng, env),
        bb_parent: near_id(rng, env, g, index),
        bb_dist: below(rng, env.cnt_w),
        visit,
        bb_ok: rng.gen(),
        phase_w: below(rng, env.s),
        count: below(rng, env.cnt_w),
        added: rng.gen(),
        merged: rng.gen(),
        comp: any_id(rng, env),
        sel: (0..degree).map(|_| rng.gen()).collect(),
        rn: pifs[rng.gen_range(0..4)],
        rn_parent: near_id(rng, env, g, index),
        depth: below(rng, env.cnt_w),
    };
    let cert = CertVars {
        label: random_label(rng, env, g, index, false),
        w_parent: near_id(rng, env, g, index),
        w_desc: below(rng, env.cnt_w),
        in_transfer: rng.gen(),
        cursor: if rng.gen() { near_id(rng, env, g, index).map(|id| (id, below(rng, env.cnt_w))) } else { None },
        wave: [CertWave::Idle, CertWave::Bcast, CertWave::Fback][rng.gen_range(0..3)],
    };
    NodeState { phase, reset: ResetVars { epoch: rng.gen_range(0..4), wave }, build, cert }
}

fn fit_degree(st: &mut NodeState, degree: usize) {
    st.build.sel.resize(degree, false);
}

/// Applies `policy` to `cfg`. Policies other than `random_bits` expect a
/// stabilized configuration as input.
pub fn corrupt<R: Rng>(
    g: &WeightedGraph,
    env: &Env,
    cfg: &Configuration<NodeState>,
    rng: &mut R,
    policy: Corruption,
) -> Configuration<NodeState> {
    let n = g.n();
    let mut states = cfg.states.clone();
    match policy {
        Corruption::None => {}
        Corruption::RandomBits => {
            for (i, st) in states.iter_mut().enumerate() {
                *st = random_state(rng, env, g, i);
            }
        }
        Corruption::SwapStates => {
            let mut perm: Vec<usize> = (0..n).collect();
            while perm.iter().enumerate().all(|(i, &p)| i == p) && n > 1 {
                perm.shuffle(rng);
            }
            states = perm.iter().map(|&p| cfg.states[p].clone()).collect();
            for (i, st) in states.iter_mut().enumerate() {
                fit_degree(st, g.degree(i));
            }
        }
        Corruption::StalePhase => {
            let mut hit = false;
            for st in states.iter_mut() {
                if rng.gen_bool(0.5) {
                    st.phase = [Phase::Build, Phase::Augment, Phase::Certify][rng.gen_range(0..3)];
                    hit = true;
                }
            }
            if !hit {
                let i = rng.gen_range(0..n);
                states[i].phase = Phase::Build;
            }
        }
        Corruption::GarbageCertificates => {
            for (i, st) in states.iter_mut().enumerate() {
                st.phase = Phase::Done;
                st.cert.clear_working();
                st.cert.label = random_label(rng, env, g, i, true);
            }
        }
    }
    Configuration::new(states)
}
