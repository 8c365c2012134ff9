//! Network-wide reset: a freeze wave, a cleaning wave, and a receding wave
//! that leaves every node blank in the build phase. Also hosts the single
//! consistency predicate deciding when a reset is triggered.

use crate::sim::Neighbor;

use super::state::{serialized_bits, NodeState, Phase, View, Wave};
use super::{build, certify, check};

fn phase_rank(p: Phase) -> i32 {
    match p {
        Phase::Reset => -1,
        Phase::Build => 0,
        Phase::Augment => 1,
        Phase::Certify => 2,
        Phase::Done => 3,
    }
}

/// True iff nothing around the viewing node contradicts a clean execution.
pub fn locally_consistent(v: &View<'_>) -> bool {
    diagnose(v).is_none()
}

/// The first failed check at the viewing node, as `file:line`.
pub fn diagnose(v: &View<'_>) -> Option<String> {
    let fail = |file: &str, line: u32| Some(format!("{file}:{line}"));
    match reset_check(v) {
        Err(l) => return fail("reset.rs", l),
        Ok(true) => return None,
        Ok(false) => {}
    }
    if let Err(l) = build::consistent(v) {
        return fail("build.rs", l);
    }
    if build::token_fault(v) {
        return fail("build.rs", 0);
    }
    certify::consistent(v).err().and_then(|l| fail("certify.rs", l))
}

/// `Ok(true)` when the remaining checks do not apply.
fn reset_check(v: &View<'_>) -> Result<bool, u32> {
    let me = v.state();
    if me.in_reset() {
        return check(me.phase == Phase::Reset && me.reset.wave != Wave::None, line!()).map(|_| true);
    }
    if serialized_bits(me, v.env()) > v.env().cap_bits {
        return Err(line!());
    }
    let mut neighbor_in_reset = false;
    for nb in v.neighbors() {
        if nb.state.in_reset() {
            neighbor_in_reset = true;
        } else if (phase_rank(nb.state.phase) - phase_rank(me.phase)).abs() > 1 {
            return Err(line!());
        }
    }
    if neighbor_in_reset {
        // a node through the same wave as a cleaning neighbour cannot have moved on
        let same_wave = v.neighbors().any(|nb| nb.state.reset.wave == Wave::Clean && nb.state.reset.epoch == me.reset.epoch);
        return check(me.phase == Phase::Build && (!same_wave || is_blank(v)), line!()).map(|_| true);
    }
    Ok(false)
}

fn enter_freeze(v: &View<'_>, epoch: u8) -> NodeState {
    let mut st = v.state().wiped(v.id(), v.degree());
    st.phase = Phase::Reset;
    st.reset.wave = Wave::Freeze;
    st.reset.epoch = epoch % 4;
    st
}

/// Nothing left to wipe: such a node does not join a wave.
fn is_blank(v: &View<'_>) -> bool {
    *v.state() == v.state().wiped(v.id(), v.degree())
}

/// `later` has already cleaned the wave of epoch `earlier`.
fn past(later: u8, earlier: u8) -> bool {
    later == (earlier + 1) % 4
}

pub(super) fn propagate(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.reset.wave != Wave::None {
        return None;
    }
    if is_blank(v) {
        return None;
    }
    let nb = v.neighbors().find(|nb| nb.state.reset.wave == Wave::Freeze && !past(me.reset.epoch, nb.state.reset.epoch))?;
    Some(enter_freeze(v, nb.state.reset.epoch))
}

pub(super) fn trigger(v: &View<'_>) -> Option<NodeState> {
    if v.state().reset.wave != Wave::None || locally_consistent(v) {
        return None;
    }
    Some(enter_freeze(v, v.state().reset.epoch))
}

pub(super) fn clean(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    let waiting = |nb: &Neighbor<'_, NodeState>| {
        nb.state.reset.wave == Wave::None && !past(nb.state.reset.epoch, me.reset.epoch) && *nb.state != nb.state.wiped(nb.id, v.graph().degree(nb.index))
    };
    if me.reset.wave != Wave::Freeze || v.neighbors().any(|nb| waiting(&nb)) {
        return None;
    }
    let mut st = me.wiped(v.id(), v.degree());
    st.phase = Phase::Reset;
    st.reset.wave = Wave::Clean;
    st.reset.epoch = (me.reset.epoch + 1) % 4;
    Some(st)
}

pub(super) fn recede(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.reset.wave != Wave::Clean || v.neighbors().any(|nb| nb.state.reset.wave == Wave::Freeze) {
        return None;
    }
    let mut st = me.wiped(v.id(), v.degree());
    st.reset.wave = Wave::None;
    Some(st)
}
