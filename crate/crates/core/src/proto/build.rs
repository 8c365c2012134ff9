//! Construction of the tree: a backbone spanning tree carries a traversal
//! token; the token holder runs Kruskal over milestone classes, each merge
//! renames the merged component with a four-state wave, and the final tree is
//! oriented and counted.

use crate::graph::NodeId;
use crate::sim::Neighbor;

use super::state::{CertWave, NodeState, Phase, Pif, View, Visit};
use super::{check, Check};

type Nb<'a> = Neighbor<'a, NodeState>;

/// The bit `nb` holds for the edge towards the viewing node.
pub(super) fn their_bit(v: &View<'_>, nb: &Nb<'_>) -> bool {
    let back = v.graph().neighbors(nb.index).binary_search_by_key(&v.id(), |a| a.id);
    back.ok().and_then(|p| nb.state.build.sel.get(p).copied()).unwrap_or(false)
}

pub(super) fn my_bit(v: &View<'_>, port: usize) -> bool {
    v.state().build.sel.get(port).copied().unwrap_or(false)
}

/// Neighbours with both bits of the connecting edge set.
pub(super) fn tree_neighbors<'a>(v: &'a View<'a>) -> impl Iterator<Item = Nb<'a>> + 'a {
    v.neighbors().enumerate().filter(move |(i, nb)| my_bit(v, *i) && their_bit(v, nb)).map(|(_, nb)| nb)
}

pub(super) fn stable_parent<'a>(v: &View<'a>) -> Option<Nb<'a>> {
    let me = &v.state().build;
    let p = v.neighbor(me.bb_parent?)?;
    (p.state.build.bb_root == me.bb_root && p.state.build.bb_dist + 1 == me.bb_dist).then_some(p)
}

pub(super) fn is_stable_child(v: &View<'_>, nb: &Nb<'_>) -> bool {
    let me = &v.state().build;
    let b = &nb.state.build;
    nb.state.phase == Phase::Build && b.bb_parent == Some(v.id()) && b.bb_root == me.bb_root && b.bb_dist == me.bb_dist + 1
}

pub(super) fn is_bb_root(v: &View<'_>) -> bool {
    let me = &v.state().build;
    me.bb_parent.is_none() && me.bb_root == v.id()
}

fn first_child_after<'a>(v: &View<'a>, after: Option<NodeId>) -> Option<Nb<'a>> {
    v.neighbors().filter(|nb| after.map_or(true, |a| nb.id > a)).find(|nb| is_stable_child(v, nb))
}

/// Every neighbour agrees on the backbone root.
fn bb_settled(v: &View<'_>) -> bool {
    let root = v.state().build.bb_root;
    v.neighbors().all(|nb| nb.state.build.bb_root == root)
}

fn fresh_tour(st: &mut NodeState) {
    st.build.visit = Visit::Here;
    st.build.count = 1;
    st.build.added = false;
    st.build.merged = true;
}

fn clear_tour(st: &mut NodeState) {
    st.build.count = 0;
    st.build.added = false;
    st.build.merged = false;
}

pub(super) fn bb_adopt(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.phase != Phase::Build {
        return None;
    }
    let n = v.env().n as u32;
    let best = v
        .neighbors()
        .filter(|nb| nb.state.phase == Phase::Build && nb.state.build.bb_dist + 1 < n)
        .min_by_key(|nb| (nb.state.build.bb_root, nb.id))?;
    if best.state.build.bb_root >= me.build.bb_root {
        return None;
    }
    let mut st = me.clone();
    st.build.bb_root = best.state.build.bb_root;
    st.build.bb_parent = Some(best.id);
    st.build.bb_dist = best.state.build.bb_dist + 1;
    st.build.visit = Visit::Idle;
    clear_tour(&mut st);
    Some(st)
}

pub(super) fn token_start(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.phase != Phase::Build || me.build.visit != Visit::Idle || !is_bb_root(v) || !bb_settled(v) {
        return None;
    }
    let mut st = me.clone();
    fresh_tour(&mut st);
    Some(st)
}

pub(super) fn token_enter(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.phase != Phase::Build || me.build.visit != Visit::Idle {
        return None;
    }
    let p = stable_parent(v)?;
    if p.state.build.visit != Visit::InChild(v.id()) {
        return None;
    }
    let mut st = me.clone();
    fresh_tour(&mut st);
    st.build.phase_w = p.state.build.phase_w;
    st.build.bb_ok = p.state.build.bb_ok;
    Some(st)
}

/// Outcome of moving the token on from the viewing node.
pub(super) enum TokenMove {
    Move(NodeState),
    /// The traversal ended in a state no clean execution reaches.
    Fault,
}

pub(super) fn token_move(v: &View<'_>) -> Option<TokenMove> {
    let me = v.state();
    if me.phase != Phase::Build || !bb_settled(v) {
        return None;
    }
    let mut st = me.clone();
    let after = match me.build.visit {
        Visit::Here => {
            if me.build.rn != Pif::Idle {
                return None;
            }
            None
        }
        Visit::InChild(c) => {
            let nb = v.neighbor(c);
            match nb {
                Some(nb) if is_stable_child(v, &nb) => {
                    if nb.state.build.visit != Visit::Done {
                        return None;
                    }
                    st.build.count = st.build.count.saturating_add(nb.state.build.count).min(v.env().n as u32 + 1);
                    st.build.added |= nb.state.build.added;
                    st.build.merged &= nb.state.build.merged;
                }
                _ => {}
            }
            Some(c)
        }
        _ => return None,
    };
    if let Some(next) = first_child_after(v, after) {
        if next.state.build.visit != Visit::Idle {
            return None;
        }
        st.build.visit = Visit::InChild(next.id);
        return Some(TokenMove::Move(st));
    }
    st.build.merged &= st.build.comp == st.build.bb_root;
    if !is_bb_root(v) {
        st.build.visit = Visit::Done;
        return Some(TokenMove::Move(st));
    }
    end_of_traversal(v, st)
}

fn end_of_traversal(v: &View<'_>, mut st: NodeState) -> Option<TokenMove> {
    let env = v.env();
    let b = &st.build;
    // every move of the tour saw a settled neighbourhood, so a short count is garbage
    if b.count as usize != env.n {
        return Some(TokenMove::Fault);
    }
    if !b.bb_ok {
        st.build.bb_ok = true;
        st.build.phase_w = 0;
    } else if b.merged {
        st.phase = Phase::Augment;
        st.build.visit = Visit::Idle;
        clear_tour(&mut st);
        st.build.bb_ok = false;
        st.build.phase_w = 0;
        st.build.depth = 0;
        st.cert.label.parent = None;
        st.cert.label.desc = 0;
        st.cert.label.total = 0;
        return Some(TokenMove::Move(st));
    } else if !b.added {
        if b.phase_w as usize + 1 >= env.ms.len() {
            return Some(TokenMove::Fault);
        }
        st.build.phase_w += 1;
    }
    fresh_tour(&mut st);
    Some(TokenMove::Move(st))
}

pub(super) fn token_step(v: &View<'_>) -> Option<NodeState> {
    match token_move(v)? {
        TokenMove::Move(st) => Some(st),
        TokenMove::Fault => None,
    }
}

pub(super) fn token_release(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.phase != Phase::Build || me.build.visit != Visit::Done || me.build.bb_parent.is_none() {
        return None;
    }
    if stable_parent(v).map_or(false, |p| p.state.build.visit == Visit::InChild(v.id())) {
        return None;
    }
    let mut st = me.clone();
    st.build.visit = Visit::Idle;
    clear_tour(&mut st);
    Some(st)
}

fn wave_idle_around(v: &View<'_>, except: Option<NodeId>) -> bool {
    v.neighbors().enumerate().all(|(i, nb)| !my_bit(v, i) || Some(nb.id) == except || nb.state.build.rn == Pif::Idle)
}

pub(super) fn add_edge(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    let b = &me.build;
    if me.phase != Phase::Build || b.visit != Visit::Here || !b.bb_ok || b.rn != Pif::Idle || !wave_idle_around(v, None) {
        return None;
    }
    let env = v.env();
    let (port, nb) = v
        .neighbors()
        .enumerate()
        .filter(|(i, nb)| {
            !my_bit(v, *i)
                && !their_bit(v, nb)
                && env.tw(nb.weight) == b.phase_w
                && nb.state.phase == Phase::Build
                && nb.state.build.rn == Pif::Idle
                && nb.state.build.comp != b.comp
        })
        .min_by_key(|(_, nb)| (nb.state.build.comp, nb.id))?;
    let mut st = me.clone();
    st.build.sel[port] = true;
    st.build.comp = b.comp.min(nb.state.build.comp);
    st.build.rn = Pif::Bcast;
    st.build.rn_parent = None;
    st.build.added = true;
    Some(st)
}

/// The endpoint of a freshly added edge joins the renaming wave.
pub(super) fn accept_edge(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.phase != Phase::Build || me.build.rn != Pif::Idle || !wave_idle_around(v, None) {
        return None;
    }
    let (port, u) = v.neighbors().enumerate().find(|(i, u)| {
        !my_bit(v, *i)
            && their_bit(v, u)
            && u.state.phase == Phase::Build
            && u.state.build.rn == Pif::Bcast
            && u.state.build.rn_parent.is_none()
            && u.state.build.visit == Visit::Here
    })?;
    let mut st = me.clone();
    st.build.sel[port] = true;
    st.build.rn = Pif::Bcast;
    st.build.rn_parent = Some(u.id);
    st.build.comp = u.state.build.comp;
    Some(st)
}

pub(super) fn rename_join(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.phase != Phase::Build || me.build.rn != Pif::Idle {
        return None;
    }
    let p = tree_neighbors(v).find(|nb| nb.state.build.rn == Pif::Bcast)?;
    if !wave_idle_around(v, Some(p.id)) {
        return None;
    }
    let mut st = me.clone();
    st.build.rn = Pif::Bcast;
    st.build.rn_parent = Some(p.id);
    st.build.comp = p.state.build.comp;
    Some(st)
}

fn children_in(v: &View<'_>, except: Option<NodeId>, rn: Pif) -> bool {
    v.neighbors().enumerate().all(|(i, nb)| {
        !my_bit(v, i) || Some(nb.id) == except || (nb.state.build.rn == rn && nb.state.build.rn_parent == Some(v.id()))
    })
}

pub(super) fn rename_feedback(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.phase != Phase::Build || me.build.rn != Pif::Bcast || !children_in(v, me.build.rn_parent, Pif::Fback) {
        return None;
    }
    let mut st = me.clone();
    st.build.rn = if me.build.rn_parent.is_none() { Pif::Clean } else { Pif::Fback };
    Some(st)
}

pub(super) fn rename_clean(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.phase != Phase::Build || me.build.rn != Pif::Fback {
        return None;
    }
    let p = v.neighbor(me.build.rn_parent?)?;
    if p.state.build.rn != Pif::Clean {
        return None;
    }
    let mut st = me.clone();
    st.build.rn = Pif::Clean;
    Some(st)
}

pub(super) fn rename_idle(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.phase != Phase::Build || me.build.rn != Pif::Clean || !wave_idle_around(v, me.build.rn_parent) {
        return None;
    }
    let mut st = me.clone();
    st.build.rn = Pif::Idle;
    st.build.rn_parent = None;
    Some(st)
}

pub(super) fn augment_join(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.phase != Phase::Build || me.build.visit != Visit::Idle || me.build.rn != Pif::Idle {
        return None;
    }
    let p = tree_neighbors(v).find(|nb| nb.state.phase == Phase::Augment && nb.state.cert.label.parent != Some(v.id()))?;
    let mut st = me.clone();
    st.phase = Phase::Augment;
    clear_tour(&mut st);
    st.build.bb_ok = false;
    st.build.phase_w = 0;
    st.build.depth = p.state.build.depth + 1;
    st.cert.label.parent = Some(p.id);
    st.cert.label.desc = 0;
    st.cert.label.total = 0;
    Some(st)
}

/// `1 + sum of children's counts` once every child reported, if it fits.
pub(super) fn desc_sum(v: &View<'_>) -> Option<u32> {
    let parent = v.state().cert.label.parent;
    let mut sum = 1u64;
    for nb in tree_neighbors(v) {
        if Some(nb.id) == parent {
            continue;
        }
        let l = &nb.state.cert.label;
        if nb.state.phase < Phase::Augment || l.parent != Some(v.id()) || l.desc == 0 {
            return None;
        }
        sum += l.desc as u64;
    }
    Some(sum as u32).filter(|&s| s as usize <= v.env().n).or(Some(u32::MAX))
}

pub(super) fn augment_count(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    if me.phase != Phase::Augment || me.cert.label.desc != 0 {
        return None;
    }
    let sum = desc_sum(v).filter(|&s| s != u32::MAX)?;
    let mut st = me.clone();
    st.cert.label.desc = sum;
    if me.cert.label.parent.is_none() {
        st.cert.label.total = sum;
    }
    Some(st)
}

pub(super) fn augment_total(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    let l = &me.cert.label;
    if me.phase != Phase::Augment || l.total != 0 || l.desc == 0 {
        return None;
    }
    let p = v.neighbor(l.parent?)?;
    if p.state.cert.label.total == 0 {
        return None;
    }
    let mut st = me.clone();
    st.cert.label.total = p.state.cert.label.total;
    Some(st)
}

pub(super) fn enter_certify(v: &View<'_>) -> Option<NodeState> {
    let me = v.state();
    let l = &me.cert.label;
    if me.phase != Phase::Augment || l.total == 0 || l.desc == 0 {
        return None;
    }
    if let Some(p) = l.parent {
        if v.neighbor(p)?.state.phase < Phase::Certify {
            return None;
        }
    }
    if v.neighbors().any(|nb| nb.state.phase < Phase::Augment) {
        return None;
    }
    let mut st = me.clone();
    st.phase = Phase::Certify;
    st.cert.clear_working();
    st.cert.w_parent = l.parent;
    st.cert.w_desc = l.desc;
    st.cert.wave = CertWave::Idle;
    Some(st)
}

/// Checks of the build and augmentation variables; neighbours are active.
pub(super) fn consistent(v: &View<'_>) -> Check {
    let me = v.state();
    let env = v.env();
    let n = env.n as u32;
    let b = &me.build;
    let id = v.id();
    if b.sel.len() != v.degree() || b.bb_dist >= n || b.count > n || b.depth >= n {
        return Err(line!());
    }
    if b.phase_w as usize >= env.ms.len() || b.comp > id || b.bb_root > id {
        return Err(line!());
    }
    match b.bb_parent {
        None => {
            if b.bb_root != id || b.bb_dist != 0 {
                return Err(line!());
            }
        }
        Some(p) => {
            let Some(p) = v.neighbor(p) else { return Err(line!()) };
            let pb = &p.state.build;
            if b.bb_root == id || pb.bb_root > b.bb_root || (pb.bb_root == b.bb_root && pb.bb_dist + 1 != b.bb_dist) {
                return Err(line!());
            }
        }
    }
    if me.phase == Phase::Build {
        build_consistent(v)
    } else {
        augment_consistent(v)
    }
}

fn build_consistent(v: &View<'_>) -> Check {
    let me = v.state();
    let b = &me.build;
    let id = v.id();
    let root = is_bb_root(v);
    if root && b.visit == Visit::Done {
        return Err(line!());
    }
    if let Visit::InChild(c) = b.visit {
        if v.neighbor(c).is_none() {
            return Err(line!());
        }
    }
    if matches!(b.visit, Visit::Here | Visit::InChild(_)) && !root {
        if let Some(p) = stable_parent(v) {
            if p.state.build.visit != Visit::InChild(id) {
                return Err(line!());
            }
        }
    }
    let wave_root = b.rn_parent.is_none() && b.rn != Pif::Idle;
    if wave_root && (b.visit != Visit::Here || b.rn == Pif::Fback || !b.bb_ok) {
        return Err(line!());
    }
    if b.rn == Pif::Idle && b.rn_parent.is_some() {
        return Err(line!());
    }
    let mut busy_selected = 0;
    for (i, nb) in v.neighbors().enumerate() {
        let nbb = &nb.state.build;
        if is_stable_child(v, &nb) && matches!(nbb.visit, Visit::Here | Visit::InChild(_)) && b.visit != Visit::InChild(nb.id) {
            return Err(line!());
        }
        let (mine, theirs) = (my_bit(v, i), their_bit(v, &nb));
        if nb.state.phase >= Phase::Augment {
            if mine != theirs {
                return Err(line!());
            }
            continue;
        }
        if mine && !theirs && !(wave_root && b.rn == Pif::Bcast && nbb.rn == Pif::Idle) {
            return Err(line!());
        }
        if !mine && theirs {
            let pending = nbb.rn == Pif::Bcast && nbb.rn_parent.is_none() && nbb.visit == Visit::Here && b.rn == Pif::Idle;
            if !pending {
                return Err(line!());
            }
        }
        if mine && theirs && b.rn == Pif::Idle && nbb.rn == Pif::Idle && b.comp != nbb.comp {
            return Err(line!());
        }
        if !mine {
            if nbb.rn_parent == Some(id) && nbb.rn != Pif::Idle {
                return Err(line!());
            }
            continue;
        }
        // selected edge: wave relations
        let is_parent = b.rn_parent == Some(nb.id);
        let points_here = nbb.rn_parent == Some(id);
        if nbb.rn != Pif::Idle {
            busy_selected += 1;
        }
        let ok = if is_parent {
            match b.rn {
                Pif::Bcast => nbb.rn == Pif::Bcast,
                Pif::Fback => nbb.rn != Pif::Idle,
                Pif::Clean => nbb.rn == Pif::Clean,
                Pif::Idle => true,
            }
        } else {
            match b.rn {
                Pif::Idle => nbb.rn == Pif::Idle || (!points_here && nbb.rn != Pif::Fback),
                Pif::Bcast => nbb.rn == Pif::Idle || (points_here && matches!(nbb.rn, Pif::Bcast | Pif::Fback)),
                Pif::Fback => points_here && nbb.rn == Pif::Fback,
                Pif::Clean => nbb.rn == Pif::Idle || (points_here && matches!(nbb.rn, Pif::Fback | Pif::Clean)),
            }
        };
        if !ok {
            return Err(line!());
        }
    }
    if let Some(p) = b.rn_parent {
        let Some(i) = v.port_of(p) else { return Err(line!()) };
        if !my_bit(v, i) {
            return Err(line!());
        }
    }
    check(!(b.rn == Pif::Idle && busy_selected > 1), line!())
}

fn augment_consistent(v: &View<'_>) -> Check {
    let me = v.state();
    let b = &me.build;
    let l = &me.cert.label;
    let n = v.env().n as u32;
    let id = v.id();
    if b.visit != Visit::Idle || b.rn != Pif::Idle || b.rn_parent.is_some() {
        return Err(line!());
    }
    if l.desc > n || (l.total != 0 && l.total != n) || (l.total != 0 && l.desc == 0) {
        return Err(line!());
    }
    if me.phase >= Phase::Certify && (l.desc == 0 || l.total == 0) {
        return Err(line!());
    }
    match l.parent {
        None => {
            if b.bb_parent.is_some() || b.depth != 0 || (l.desc != 0 && l.total != l.desc) {
                return Err(line!());
            }
        }
        Some(p) => {
            let Some(port) = v.port_of(p) else { return Err(line!()) };
            let pn = v.neighbor(p).unwrap();
            if !my_bit(v, port) || !their_bit(v, &pn) || pn.state.phase < Phase::Augment {
                return Err(line!());
            }
            if pn.state.build.depth + 1 != b.depth || pn.state.cert.label.parent == Some(id) {
                return Err(line!());
            }
            if l.total != 0 && pn.state.cert.label.total != l.total {
                return Err(line!());
            }
            if me.phase >= Phase::Certify && pn.state.phase < Phase::Certify {
                return Err(line!());
            }
        }
    }
    for (i, nb) in v.neighbors().enumerate() {
        let (mine, theirs) = (my_bit(v, i), their_bit(v, &nb));
        if mine != theirs {
            return Err(line!());
        }
        if nb.state.phase == Phase::Build {
            if !matches!(nb.state.build.visit, Visit::Idle | Visit::Done) || nb.state.build.rn != Pif::Idle {
                return Err(line!());
            }
            continue;
        }
        if mine && (nb.state.cert.label.parent == Some(id)) == (l.parent == Some(nb.id)) {
            return Err(line!());
        }
    }
    if l.desc != 0 && desc_sum(v) != Some(l.desc) {
        return Err(line!());
    }
    Ok(())
}

/// Fault detection of the traversal, shared with the reset trigger.
pub(super) fn token_fault(v: &View<'_>) -> bool {
    matches!(token_move(v), Some(TokenMove::Fault))
}
