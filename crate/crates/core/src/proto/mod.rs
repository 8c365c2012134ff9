//! The protocol stack: reset rules first, then construction, then
//! certification.

pub mod build;
pub mod certify;
pub mod corrupt;
pub mod reset;
pub mod state;

use thiserror::Error;

use crate::cert::{verify_labels, CertificateLabel};
use crate::graph::{NodeId, WeightedGraph};
use crate::oracle::EdgeSet;
use crate::sim::{Configuration, Rule};

pub use reset::{diagnose, locally_consistent};
pub use state::{serialized_bits, Env, NodeState, Phase, View};

pub type ProtoRule = Rule<NodeState, Env>;

/// Outcome of a consistency check; the error carries the source line of the
/// failed condition.
pub type Check = Result<(), u32>;

fn check(ok: bool, line: u32) -> Check {
    if ok {
        Ok(())
    } else {
        Err(line)
    }
}

/// Name of the rule whose firings count as reset initiations.
pub const TRIGGER_RULE: &str = "reset_trigger";

/// Rule running outside any reset, enabled only if it changes the state.
fn protocol(name: &'static str, f: fn(&View<'_>) -> Option<NodeState>) -> ProtoRule {
    Rule::from_fn(name, move |v: &View<'_>| {
        if v.state().in_reset() || v.neighbors().any(|nb| nb.state.in_reset()) {
            return None;
        }
        f(v).filter(|st| st != v.state())
    })
}

fn plain(name: &'static str, f: fn(&View<'_>) -> Option<NodeState>) -> ProtoRule {
    Rule::from_fn(name, move |v: &View<'_>| f(v).filter(|st| st != v.state()))
}

pub fn reset_rules() -> Vec<ProtoRule> {
    vec![
        plain("reset_propagate", reset::propagate),
        plain(TRIGGER_RULE, reset::trigger),
        plain("reset_clean", reset::clean),
        plain("reset_recede", reset::recede),
    ]
}

pub fn build_rules() -> Vec<ProtoRule> {
    vec![
        protocol("backbone_adopt", build::bb_adopt),
        protocol("rename_join", build::rename_join),
        protocol("rename_feedback", build::rename_feedback),
        protocol("rename_clean", build::rename_clean),
        protocol("rename_idle", build::rename_idle),
        protocol("edge_accept", build::accept_edge),
        protocol("edge_add", build::add_edge),
        protocol("token_start", build::token_start),
        protocol("token_enter", build::token_enter),
        protocol("token_move", build::token_step),
        protocol("token_release", build::token_release),
        protocol("augment_join", build::augment_join),
        protocol("augment_count", build::augment_count),
        protocol("augment_total", build::augment_total),
        protocol("certify_enter", build::enter_certify),
    ]
}

pub fn certify_rules() -> Vec<ProtoRule> {
    vec![
        protocol("center_adopt", certify::adopt),
        protocol("center_ack", certify::acknowledge),
        protocol("center_designate", certify::designate),
        protocol("center_settle", certify::become_center),
        protocol("center_advance", certify::advance),
        protocol("level_push", certify::push_record),
        protocol("level_feedback", certify::feedback),
        protocol("level_detach", certify::detach),
    ]
}

/// The full stack in priority order.
pub fn rules() -> Vec<ProtoRule> {
    let mut r = reset_rules();
    r.extend(build_rules());
    r.extend(certify_rules());
    r
}

/// Every node blank in the build phase.
pub fn clean_configuration(g: &WeightedGraph) -> Configuration<NodeState> {
    Configuration::new((0..g.n()).map(|i| NodeState::blank(g.id(i), g.degree(i))).collect())
}

pub fn meter(st: &NodeState, env: &Env) -> u64 {
    serialized_bits(st, env)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("edge ({0}, {1}) is selected on one side only")]
    Asymmetric(NodeId, NodeId),
    #[error("node {0} has not finished construction")]
    NotBuilt(NodeId),
}

/// Edges selected at both endpoints.
pub fn selected_tree(g: &WeightedGraph, cfg: &Configuration<NodeState>) -> Result<EdgeSet, TreeError> {
    let mut out = EdgeSet::new();
    for i in 0..g.n() {
        if cfg.states[i].phase < Phase::Augment {
            return Err(TreeError::NotBuilt(g.id(i)));
        }
        for (port, a) in g.neighbors(i).iter().enumerate() {
            let back = g.neighbors(a.index).iter().position(|b| b.index == i).unwrap();
            let (mine, theirs) = (cfg.states[i].build.sel[port], cfg.states[a.index].build.sel[back]);
            if mine != theirs {
                return Err(TreeError::Asymmetric(g.id(i), a.id));
            }
            if mine {
                out.insert(g.id(i), a.id);
            }
        }
    }
    Ok(out)
}

pub fn labels(cfg: &Configuration<NodeState>) -> Vec<CertificateLabel> {
    cfg.states.iter().map(|s| s.cert.label.clone()).collect()
}

/// Identifiers rejecting the certificate held in `cfg`.
pub fn verify_all(g: &WeightedGraph, env: &Env, cfg: &Configuration<NodeState>) -> Vec<NodeId> {
    verify_labels(g, &labels(cfg), &env.ms)
}

/// True iff every node is done and locally consistent.
pub fn is_legitimate(g: &WeightedGraph, env: &Env, cfg: &Configuration<NodeState>) -> bool {
    (0..g.n()).all(|i| {
        cfg.states[i].phase == Phase::Done && locally_consistent(&View::new(g, i, &cfg.states, env))
    })
}
