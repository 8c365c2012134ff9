//! Distributed construction of the certificate on the oriented tree: the root
//! of each working tree migrates to a centroid, the centroid numbers its
//! subtrees one at a time, each subtree copies its record with a broadcast
//! and feedback wave, then detaches and recurses.

use std::cmp::Reverse;

use crate::cert::{accepts, LabelNeighbor, LabelView, LevelRecord, Mode, Orientation};
use crate::graph::NodeId;
use crate::sim::Neighbor;

use super::state::{serialized_bits, CertWave, NodeState, Phase, View};
use super::{check, Check};

type Nb<'a> = Neighbor<'a, NodeState>;

fn len(st: &NodeState) -> usize {
    st.cert.label.levels.len()
}

fn is_center(st: &NodeState) -> bool {
    st.cert.label.levels.last().map_or(false, |r| r.is_center())
}

/// Finished with every level below `levels.len()` and waiting for the next.
fn ready(st: &NodeState) -> bool {
    if is_center(st) {
        return false;
    }
    match len(st) {
        0 => st.cert.wave == CertWave::Idle,
        _ => st.cert.wave == CertWave::Fback,
    }
}

/// Certify rules only run once every neighbour is certifying.
fn active(v: &View<'_>) -> bool {
    v.state().phase == Phase::Certify && v.neighbors().all(|nb| nb.state.phase >= Phase::Certify)
}

fn working_children<'a>(v: &'a View<'a>) -> impl Iterator<Item = Nb<'a>> + 'a {
    let id = v.id();
    v.neighbors().filter(move |nb| nb.state.phase == Phase::Certify && nb.state.cert.w_parent == Some(id))
}

/// Largest working size first, smaller identifier on ties.
fn order_key(nb: &Nb<'_>) -> (Reverse<u32>, NodeId) {
    (Reverse(nb.state.cert.w_desc), nb.id)
}

fn orientation(st: &NodeState, toward: NodeId) -> Orientation {
    if st.cert.label.parent == Some(toward) {
        Orientation::TowardParent
    } else {
        Orientation::TowardChild
    }
}

/// Root decision at its current level: `Some(Some(c))` to migrate to `c`,
/// `Some(None)` to become the center.
fn root_decision<'a>(v: &'a View<'a>) -> Option<Option<Nb<'a>>> {
    let me = v.state();
    if !active(v) || me.cert.w_parent.is_some() || me.cert.in_transfer || !ready(me) {
        return None;
    }
    let l = len(me);
    let mut best: Option<Nb<'a>> = None;
    for c in working_children(v) {
        if len(c.state) != l || !ready(c.state) || c.state.cert.in_transfer {
            return None;
        }
        if best.as_ref().map_or(true, |b| order_key(&c) < order_key(b)) {
            best = Some(c);
        }
    }
    Some(best.filter(|c| 2 * c.state.cert.w_desc as u64 > me.cert.w_desc as u64))
}

pub(super) fn designate(v: &View<'_>) -> Option<NodeState> {
    let c = root_decision(v)??;
    let mut st = v.state().clone();
    st.cert.w_parent = Some(c.id);
    st.cert.w_desc = st.cert.w_desc.saturating_sub(c.state.cert.w_desc);
    st.cert.in_transfer = true;
    Some(st)
}

pub(super) fn adopt(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if !active(v) || me.cert.in_transfer {
        return None;
    }
    let r = v.neighbor(me.cert.w_parent?)?;
    if r.state.cert.w_parent != Some(v.id()) || !r.state.cert.in_transfer {
        return None;
    }
    let mut st = me.clone();
    st.cert.w_parent = None;
    st.cert.w_desc = (me.cert.w_desc + r.state.cert.w_desc).min(v.env().n as u32);
    Some(st)
}

pub(super) fn acknowledge(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if !active(v) || !me.cert.in_transfer {
        return None;
    }
    let c = v.neighbor(me.cert.w_parent?)?;
    if c.state.cert.w_parent == Some(v.id()) {
        return None;
    }
    let mut st = me.clone();
    st.cert.in_transfer = false;
    Some(st)
}

fn finish(st: &mut NodeState) {
    st.phase = Phase::Done;
    st.cert.clear_working();
}

pub(super) fn become_center(v: &View<'_>) -> Option<NodeState> {
    if root_decision(v)?.is_some() {
        return None;
    }
    let mut st = v.state().clone();
    st.cert.label.levels.push(LevelRecord::CENTER);
    st.cert.wave = CertWave::Idle;
    match working_children(v).min_by_key(order_key) {
        Some(c) => st.cert.cursor = Some((c.id, 1)),
        None => finish(&mut st),
    }
    Some(st)
}

pub(super) fn advance(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if !active(v) || !is_center(me) {
        return None;
    }
    let (r, k) = me.cert.cursor?;
    let j = len(me) - 1;
    let named = v.neighbor(r)?;
    let got = named.state.cert.label.levels.get(j);
    if !got.map_or(false, |rec| !rec.is_center() && rec.num == k) {
        return None;
    }
    let mut st = me.clone();
    let next = working_children(v).filter(|c| c.id != r && len(c.state) == j).min_by_key(order_key);
    match next {
        Some(c) => st.cert.cursor = Some((c.id, k + 1)),
        None => finish(&mut st),
    }
    Some(st)
}

/// The record the viewing node would push next, and the resulting state.
fn push_candidate(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if !active(v) || !ready(me) {
        return None;
    }
    let l = len(me);
    let p = v.neighbor(me.cert.w_parent?)?;
    if len(p.state) != l + 1 {
        return None;
    }
    let tw = v.env().tw(p.weight);
    let prec = *p.state.cert.label.levels.last()?;
    let rec = if prec.is_center() {
        match p.state.cert.cursor {
            Some((r, k)) if r == v.id() => LevelRecord { num: k, maxw: tw, orient: orientation(me, p.id) },
            _ => return None,
        }
    } else {
        if p.state.cert.wave != CertWave::Bcast {
            return None;
        }
        LevelRecord { num: prec.num, maxw: prec.maxw.max(tw), orient: orientation(me, p.id) }
    };
    let mut st = me.clone();
    st.cert.label.levels.push(rec);
    st.cert.wave = CertWave::Bcast;
    Some(st)
}

fn fits(st: &NodeState, v: &View<'_>) -> bool {
    len(st) <= v.env().max_levels && serialized_bits(st, v.env()) <= v.env().cap_bits
}

pub(super) fn push_record(v: &View<'_>) -> Option<NodeState> {
    push_candidate(v).filter(|st| fits(st, v))
}

pub(super) fn feedback(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if !active(v) || me.cert.wave != CertWave::Bcast || is_center(me) {
        return None;
    }
    let l = len(me);
    if !working_children(v).all(|c| len(c.state) == l && c.state.cert.wave == CertWave::Fback && !is_center(c.state)) {
        return None;
    }
    let mut st = me.clone();
    st.cert.wave = CertWave::Fback;
    Some(st)
}

pub(super) fn detach(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if !active(v) || me.cert.wave != CertWave::Fback || is_center(me) || me.cert.in_transfer {
        return None;
    }
    let c = v.neighbor(me.cert.w_parent?)?;
    let l = len(me);
    if len(c.state) != l || !is_center(c.state) {
        return None;
    }
    let mut st = me.clone();
    st.cert.w_parent = None;
    Some(st)
}

/// Verifier view over the labels of finished neighbours.
pub(super) fn verifier_accepts(v: &View<'_>) -> bool {
    let me = v.state();
    let mut all = true;
    let neighbors = v
        .neighbors()
        .map(|nb| {
            let done = nb.state.phase == Phase::Done;
            all &= done;
            LabelNeighbor { id: nb.id, weight: nb.weight, label: done.then_some(&nb.state.cert.label) }
        })
        .collect();
    let view = LabelView { id: v.id(), n: v.env().n, label: &me.cert.label, neighbors };
    accepts(&view, &v.env().ms, if all { Mode::Full } else { Mode::Partial })
}

/// Checks of the certification variables; neighbours are active.
pub(super) fn consistent(v: &View<'_>) -> Check {
    let me = v.state();
    let env = v.env();
    let n = env.n as u32;
    let c = &me.cert;
    let levels = &c.label.levels;
    if levels.len() > env.max_levels || c.w_desc > n {
        return Err(line!());
    }
    let ms_len = env.ms.len() as u32;
    for (i, r) in levels.iter().enumerate() {
        if r.is_center() {
            if i + 1 != levels.len() {
                return Err(line!());
            }
        } else if r.num == 0 || r.num > n || r.maxw >= ms_len {
            return Err(line!());
        }
    }
    if me.phase == Phase::Done {
        let blank = c.w_parent.is_none() && c.w_desc == 0 && !c.in_transfer && c.cursor.is_none() && c.wave == CertWave::Idle;
        return check(blank && is_center(me) && verifier_accepts(v), line!());
    }
    if me.phase != Phase::Certify {
        return check(levels.is_empty() && c.w_parent.is_none() && c.w_desc == 0 && !c.in_transfer && c.cursor.is_none() && c.wave == CertWave::Idle, line!());
    }
    if push_candidate(v).map_or(false, |st| !fits(&st, v)) {
        return Err(line!());
    }
    if v.neighbors().any(|nb| nb.state.phase < Phase::Certify) {
        return Ok(());
    }
    let center = is_center(me);
    match (center, c.cursor) {
        (true, None) => return Err(line!()),
        (true, Some((r, k))) => {
            if k == 0 || k > n || v.neighbor(r).is_none() || c.wave != CertWave::Idle {
                return Err(line!());
            }
        }
        (false, Some(_)) => return Err(line!()),
        (false, None) => {
            if levels.is_empty() != (c.wave == CertWave::Idle) {
                return Err(line!());
            }
        }
    }
    if c.in_transfer && c.w_parent.is_none() {
        return Err(line!());
    }
    let Some(pid) = c.w_parent else { return Ok(()) };
    let Some(p) = v.neighbor(pid) else { return Err(line!()) };
    let port = v.port_of(pid).unwrap();
    if !super::build::my_bit(v, port) || !super::build::their_bit(v, &p) || p.state.phase == Phase::Done && !is_center(p.state) {
        return Err(line!());
    }
    let pc = &p.state.cert;
    if pc.w_parent == Some(v.id()) && c.in_transfer == pc.in_transfer {
        return Err(line!());
    }
    if center || c.in_transfer || pc.w_parent == Some(v.id()) {
        return Ok(());
    }
    let (l, pl) = (len(me), len(p.state));
    if pl == l + 1 {
        // parent moved on to the next level; this node must be waiting for it
        return check(ready(me) && (is_center(p.state) || pc.wave == CertWave::Bcast), line!());
    }
    if pl != l {
        return Err(line!());
    }
    if is_center(p.state) {
        // subtree root still attached to its center
        return check(c.wave != CertWave::Idle && l > 0 && levels[l - 1].maxw == env.tw(p.weight), line!());
    }
    if c.wave == CertWave::Bcast && l > 0 {
        let (mine, theirs) = (levels[l - 1], p.state.cert.label.levels[l - 1]);
        let expect = LevelRecord { num: theirs.num, maxw: theirs.maxw.max(env.tw(p.weight)), orient: orientation(me, pid) };
        if pc.wave != CertWave::Bcast || mine != expect {
            return Err(line!());
        }
    }
    if c.wave == CertWave::Idle && pc.wave != CertWave::Idle {
        return Err(line!());
    }
    Ok(())
}
