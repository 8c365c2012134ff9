//! State-model execution engine.
//!
//! A rule reads a [`LocalView`] (own state, neighbour states, own identifier,
//! incident weights and the static environment) and yields a new state. At
//! every step the scheduler picks a non-empty subset of enabled nodes; each
//! picked node applies its first enabled rule in declaration order, computed
//! against the pre-step configuration.
//!
//! Rounds follow the usual definition: a round ends once every node that was
//! enabled when it started has either stepped or become disabled.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NodeId, Weight, WeightedGraph};

/// What a node can see: itself, its neighbours and the static environment.
pub struct LocalView<'a, S, E> {
    graph: &'a WeightedGraph,
    index: usize,
    states: &'a [S],
    env: &'a E,
}

#[derive(Clone, Copy)]
pub struct Neighbor<'a, S> {
    pub index: usize,
    pub id: NodeId,
    pub weight: Weight,
    pub state: &'a S,
}

impl<'a, S, E> LocalView<'a, S, E> {
    pub fn new(graph: &'a WeightedGraph, index: usize, states: &'a [S], env: &'a E) -> Self {
        LocalView { graph, index, states, env }
    }

    pub fn id(&self) -> NodeId {
        self.graph.id(self.index)
    }

    pub fn graph(&self) -> &'a WeightedGraph {
        self.graph
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn state(&self) -> &'a S {
        &self.states[self.index]
    }

    pub fn env(&self) -> &'a E {
        self.env
    }

    pub fn degree(&self) -> usize {
        self.graph.degree(self.index)
    }

    /// Neighbours in increasing identifier order.
    pub fn neighbors(&self) -> impl Iterator<Item = Neighbor<'a, S>> + 'a {
        let states = self.states;
        self.graph
            .neighbors(self.index)
            .iter()
            .map(move |a| Neighbor { index: a.index, id: a.id, weight: a.weight, state: &states[a.index] })
    }

    pub fn neighbor(&self, id: NodeId) -> Option<Neighbor<'a, S>> {
        let adj = self.graph.neighbors(self.index);
        let pos = adj.binary_search_by_key(&id, |a| a.id).ok()?;
        let a = adj[pos];
        Some(Neighbor { index: a.index, id: a.id, weight: a.weight, state: &self.states[a.index] })
    }

    /// Position of `id` in the sorted adjacency list.
    pub fn port_of(&self, id: NodeId) -> Option<usize> {
        self.graph.neighbors(self.index).binary_search_by_key(&id, |a| a.id).ok()
    }
}

type RuleFn<S, E> = Box<dyn Fn(&LocalView<'_, S, E>) -> Option<S> + Send + Sync>;

/// A guarded action. Guards and actions must only read the view.
pub struct Rule<S, E> {
    name: &'static str,
    eval: RuleFn<S, E>,
}

impl<S, E> Rule<S, E> {
    pub fn new(
        name: &'static str,
        guard: impl Fn(&LocalView<'_, S, E>) -> bool + Send + Sync + 'static,
        action: impl Fn(&LocalView<'_, S, E>) -> S + Send + Sync + 'static,
    ) -> Self {
        Rule { name, eval: Box::new(move |v| if guard(v) { Some(action(v)) } else { None }) }
    }

    /// Rule whose guard holds exactly when `f` returns a state.
    pub fn from_fn(name: &'static str, f: impl Fn(&LocalView<'_, S, E>) -> Option<S> + Send + Sync + 'static) -> Self {
        Rule { name, eval: Box::new(f) }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn guard(&self, view: &LocalView<'_, S, E>) -> bool {
        (self.eval)(view).is_some()
    }

    pub fn fire(&self, view: &LocalView<'_, S, E>) -> Option<S> {
        (self.eval)(view)
    }
}

impl<S, E> fmt::Debug for Rule<S, E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rule").field("name", &self.name).finish()
    }
}

/// Tuple of all node states, indexed like the host graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration<S> {
    pub states: Vec<S>,
}

impl<S> Configuration<S> {
    pub fn new(states: Vec<S>) -> Self {
        Configuration { states }
    }
}

/// Names of the rules applicable at node `index`, in priority order.
pub fn enabled<S, E>(graph: &WeightedGraph, env: &E, cfg: &Configuration<S>, index: usize, rules: &[Rule<S, E>]) -> Vec<&'static str> {
    let view = LocalView::new(graph, index, &cfg.states, env);
    rules.iter().filter(|r| r.guard(&view)).map(|r| r.name()).collect()
}

fn first_enabled<S, E>(graph: &WeightedGraph, env: &E, states: &[S], index: usize, rules: &[Rule<S, E>]) -> Option<(usize, S)> {
    let view = LocalView::new(graph, index, states, env);
    rules.iter().enumerate().find_map(|(i, r)| r.fire(&view).map(|s| (i, s)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    AllEnabled,
    SingleRandom,
    RandomSubset,
    /// Keeps activating the same single node while it stays enabled, then
    /// falls back to the smallest enabled identifier.
    AdversarialStubborn,
    /// Never activates one seed-chosen victim unless it is the only enabled node.
    AdversarialStarveOne,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 5] = [
        SchedulerKind::AllEnabled,
        SchedulerKind::SingleRandom,
        SchedulerKind::RandomSubset,
        SchedulerKind::AdversarialStubborn,
        SchedulerKind::AdversarialStarveOne,
    ];
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchedulerKind::AllEnabled => "all_enabled",
            SchedulerKind::SingleRandom => "single_random",
            SchedulerKind::RandomSubset => "random_subset",
            SchedulerKind::AdversarialStubborn => "adversarial_stubborn",
            SchedulerKind::AdversarialStarveOne => "adversarial_starve_one",
        };
        f.write_str(s)
    }
}

impl FromStr for SchedulerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchedulerKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| format!("unknown scheduler `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerPolicy {
    pub kind: SchedulerKind,
    pub seed: u64,
}

impl SchedulerPolicy {
    pub fn new(kind: SchedulerKind, seed: u64) -> Self {
        SchedulerPolicy { kind, seed }
    }
}

/// Stateful realization of a [`SchedulerPolicy`].
pub struct Scheduler {
    kind: SchedulerKind,
    rng: ChaCha8Rng,
    last: Option<usize>,
    victim: Option<usize>,
}

impl Scheduler {
    pub fn new(policy: SchedulerPolicy, n: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
        let victim = (n > 0).then(|| rng.gen_range(0..n));
        Scheduler { kind: policy.kind, rng, last: None, victim }
    }

    /// Picks a non-empty subset of `enabled` (sorted node indices).
    pub fn select(&mut self, enabled: &[usize]) -> Vec<usize> {
        debug_assert!(!enabled.is_empty());
        let chosen = match self.kind {
            SchedulerKind::AllEnabled => enabled.to_vec(),
            SchedulerKind::SingleRandom => vec![*enabled.choose(&mut self.rng).unwrap()],
            SchedulerKind::RandomSubset => {
                let mut pick: Vec<usize> = enabled.iter().copied().filter(|_| self.rng.gen_bool(0.5)).collect();
                if pick.is_empty() {
                    pick.push(*enabled.choose(&mut self.rng).unwrap());
                }
                pick
            }
            SchedulerKind::AdversarialStubborn => match self.last {
                Some(l) if enabled.binary_search(&l).is_ok() => vec![l],
                _ => vec![enabled[0]],
            },
            SchedulerKind::AdversarialStarveOne => {
                let others: Vec<usize> = enabled.iter().copied().filter(|&i| Some(i) != self.victim).collect();
                if others.is_empty() {
                    enabled.to_vec()
                } else {
                    others
                }
            }
        };
        if chosen.len() == 1 {
            self.last = Some(chosen[0]);
        }
        chosen
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("step requested but no node is enabled")]
    NothingEnabled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Silent,
    RoundBudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub activated: Vec<NodeId>,
    pub round: u64,
    pub enabled_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionTrace<S> {
    pub initial: Configuration<S>,
    /// Per-step log; empty unless recording was requested.
    pub steps: Vec<StepRecord>,
    pub final_config: Configuration<S>,
    pub rounds: u64,
    pub step_count: u64,
    /// Highest metered size of a state written by a rule at each node (the
    /// initial configuration is not counted).
    pub peak_bits: Vec<u64>,
    /// Activations per rule, indexed like the rule list.
    pub rule_fires: Vec<u64>,
    pub cause: Termination,
}

#[derive(Clone, Copy, Debug)]
pub struct RunLimits {
    pub max_rounds: u64,
    /// Guard against executions where some round never closes.
    pub max_steps: u64,
    pub record_steps: bool,
}

impl RunLimits {
    pub fn rounds(max_rounds: u64) -> Self {
        RunLimits { max_rounds, max_steps: max_rounds.saturating_mul(1000).max(1_000_000), record_steps: false }
    }
}

/// Incremental executor holding the live configuration.
pub struct Simulator<'a, S, E> {
    graph: &'a WeightedGraph,
    env: &'a E,
    rules: &'a [Rule<S, E>],
    states: Vec<S>,
    pending: Vec<Option<(usize, S)>>,
    enabled_list_dirty: bool,
    enabled_list: Vec<usize>,
    round_pending: Vec<bool>,
    round_pending_count: usize,
    pub rounds: u64,
    pub steps: u64,
    pub rule_fires: Vec<u64>,
}

impl<'a, S: Clone, E> Simulator<'a, S, E> {
    pub fn new(graph: &'a WeightedGraph, env: &'a E, rules: &'a [Rule<S, E>], cfg: Configuration<S>) -> Self {
        assert_eq!(cfg.states.len(), graph.n(), "one state per node");
        let states = cfg.states;
        let pending: Vec<_> = (0..graph.n()).map(|i| first_enabled(graph, env, &states, i, rules)).collect();
        let mut sim = Simulator {
            graph,
            env,
            rules,
            states,
            pending,
            enabled_list_dirty: true,
            enabled_list: Vec::new(),
            round_pending: vec![false; graph.n()],
            round_pending_count: 0,
            rounds: 0,
            steps: 0,
            rule_fires: vec![0; rules.len()],
        };
        sim.open_round();
        sim
    }

    fn open_round(&mut self) {
        self.round_pending_count = 0;
        for i in 0..self.states.len() {
            self.round_pending[i] = self.pending[i].is_some();
            self.round_pending_count += self.round_pending[i] as usize;
        }
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn configuration(&self) -> Configuration<S> {
        Configuration::new(self.states.clone())
    }

    pub fn is_silent(&self) -> bool {
        self.pending.iter().all(Option::is_none)
    }

    /// Sorted indices of the enabled nodes.
    pub fn enabled_nodes(&mut self) -> &[usize] {
        if self.enabled_list_dirty {
            self.enabled_list = (0..self.states.len()).filter(|&i| self.pending[i].is_some()).collect();
            self.enabled_list_dirty = false;
        }
        &self.enabled_list
    }

    /// Name of the rule node `index` would apply, if any.
    pub fn enabled_rule(&self, index: usize) -> Option<&'static str> {
        self.pending[index].as_ref().map(|(r, _)| self.rules[*r].name())
    }

    /// Applies the pending actions of `selected` simultaneously.
    pub fn apply(&mut self, selected: &[usize]) -> Result<(), SimError> {
        if selected.is_empty() || selected.iter().any(|&i| self.pending[i].is_none()) {
            return Err(SimError::NothingEnabled);
        }
        let mut touched = Vec::with_capacity(selected.len() * 4);
        for &i in selected {
            let (rule, next) = self.pending[i].take().unwrap();
            self.rule_fires[rule] += 1;
            self.states[i] = next;
            touched.push(i);
            touched.extend(self.graph.neighbors(i).iter().map(|a| a.index));
            if self.round_pending[i] {
                self.round_pending[i] = false;
                self.round_pending_count -= 1;
            }
        }
        touched.sort_unstable();
        touched.dedup();
        for i in touched {
            self.pending[i] = first_enabled(self.graph, self.env, &self.states, i, self.rules);
            if self.pending[i].is_none() && self.round_pending[i] {
                self.round_pending[i] = false;
                self.round_pending_count -= 1;
            }
        }
        self.enabled_list_dirty = true;
        self.steps += 1;
        if self.round_pending_count == 0 {
            self.rounds += 1;
            self.open_round();
        }
        Ok(())
    }

    pub fn step(&mut self, scheduler: &mut Scheduler) -> Result<Vec<usize>, SimError> {
        let enabled = self.enabled_nodes();
        if enabled.is_empty() {
            return Err(SimError::NothingEnabled);
        }
        let enabled = enabled.to_vec();
        let chosen = scheduler.select(&enabled);
        self.apply(&chosen)?;
        Ok(chosen)
    }

    pub fn into_configuration(self) -> Configuration<S> {
        Configuration::new(self.states)
    }
}

/// One scheduler step from `cfg`; errors if no node is enabled.
pub fn step<S: Clone, E>(
    graph: &WeightedGraph,
    env: &E,
    cfg: &Configuration<S>,
    rules: &[Rule<S, E>],
    scheduler: &mut Scheduler,
) -> Result<Configuration<S>, SimError> {
    let mut sim = Simulator::new(graph, env, rules, cfg.clone());
    sim.step(scheduler)?;
    Ok(sim.into_configuration())
}

/// Runs until no node is enabled or a budget is exhausted. `meter` gives the
/// metered size of a state (used for peak tracking).
pub fn run_until_silent<S: Clone, E>(
    graph: &WeightedGraph,
    env: &E,
    cfg: Configuration<S>,
    rules: &[Rule<S, E>],
    policy: SchedulerPolicy,
    limits: RunLimits,
    meter: &dyn Fn(&S, &E) -> u64,
) -> ExecutionTrace<S> {
    let initial = cfg.clone();
    let mut peak_bits = vec![0u64; graph.n()];
    let mut sim = Simulator::new(graph, env, rules, cfg);
    let mut scheduler = Scheduler::new(policy, graph.n());
    let mut steps = Vec::new();
    let mut cause = Termination::Silent;
    loop {
        if sim.is_silent() {
            break;
        }
        if sim.rounds >= limits.max_rounds || sim.steps >= limits.max_steps {
            cause = Termination::RoundBudgetExhausted;
            break;
        }
        let enabled_count = sim.enabled_nodes().len();
        let round = sim.rounds;
        let chosen = sim.step(&mut scheduler).expect("not silent");
        for &i in &chosen {
            let b = meter(&sim.states[i], env);
            if b > peak_bits[i] {
                peak_bits[i] = b;
            }
        }
        if limits.record_steps {
            steps.push(StepRecord {
                step: sim.steps - 1,
                activated: chosen.iter().map(|&i| graph.id(i)).collect(),
                round,
                enabled_count,
            });
        }
    }
    ExecutionTrace {
        initial,
        steps,
        rounds: sim.rounds,
        step_count: sim.steps,
        peak_bits,
        rule_fires: sim.rule_fires.clone(),
        cause,
        final_config: sim.into_configuration(),
    }
}

/// JSON-lines dump of a recorded trace.
pub fn trace_to_jsonl(steps: &[StepRecord]) -> String {
    let mut out = String::new();
    for s in steps {
        out.push_str(&serde_json::to_string(s).expect("plain record"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind, WeightDist};

    type Cfg = Configuration<u32>;

    /// Each node copies the maximum of its closed neighbourhood.
    fn max_rules() -> Vec<Rule<u32, ()>> {
        vec![Rule::from_fn("adopt_max", |v: &LocalView<'_, u32, ()>| {
            let m = v.neighbors().map(|n| *n.state).max().unwrap_or(0);
            (m > *v.state()).then_some(m)
        })]
    }

    fn path(n: usize) -> WeightedGraph {
        generate(GraphKind::Path, n, WeightDist::AllEqual, 0).unwrap()
    }

    #[test]
    fn empty_rule_set_is_silent() {
        let g = path(3);
        let rules: Vec<Rule<u32, ()>> = Vec::new();
        let t = run_until_silent(&g, &(), Cfg::new(vec![1, 2, 3]), &rules, SchedulerPolicy::new(SchedulerKind::AllEnabled, 0), RunLimits::rounds(10), &|_, _| 0);
        assert_eq!(t.cause, Termination::Silent);
        assert_eq!(t.rounds, 0);
        assert_eq!(t.step_count, 0);
    }

    #[test]
    fn single_enabled_node_steps() {
        let g = path(2);
        let rules = max_rules();
        let cfg = Cfg::new(vec![1, 5]);
        assert_eq!(enabled(&g, &(), &cfg, 0, &rules), vec!["adopt_max"]);
        assert!(enabled(&g, &(), &cfg, 1, &rules).is_empty());
        let mut s = Scheduler::new(SchedulerPolicy::new(SchedulerKind::AllEnabled, 0), 2);
        let next = step(&g, &(), &cfg, &rules, &mut s).unwrap();
        assert_eq!(next.states, vec![5, 5]);
        assert_eq!(step(&g, &(), &next, &rules, &mut s), Err(SimError::NothingEnabled));
    }

    #[test]
    fn single_random_is_reproducible() {
        let g = path(3);
        let rules = max_rules();
        let cfg = Cfg::new(vec![1, 9, 1]);
        let run = |seed| {
            let mut s = Scheduler::new(SchedulerPolicy::new(SchedulerKind::SingleRandom, seed), 3);
            step(&g, &(), &cfg, &rules, &mut s).unwrap()
        };
        let a = run(11);
        assert_eq!(a, run(11));
        let changed = a.states.iter().zip(&cfg.states).filter(|(x, y)| x != y).count();
        assert_eq!(changed, 1);
    }

    #[test]
    fn simultaneous_activation_reads_pre_step_states() {
        // Disjoint neighbourhoods: 0-1 and 2-3 in a path of 4 only touch at 1-2.
        let g = path(4);
        let rules = max_rules();
        let cfg = Cfg::new(vec![1, 4, 1, 1]);
        let mut all = Scheduler::new(SchedulerPolicy::new(SchedulerKind::AllEnabled, 0), 4);
        let together = step(&g, &(), &cfg, &rules, &mut all).unwrap();
        assert_eq!(together.states, vec![4, 4, 4, 1]);
        // Node 3 only sees node 2, which had 1 before the step.
        let mut sim = Simulator::new(&g, &(), &rules, cfg.clone());
        sim.apply(&[0]).unwrap();
        sim.apply(&[2]).unwrap();
        assert_eq!(sim.states(), together.states.as_slice());
    }

    #[test]
    fn rounds_on_a_path() {
        // The maximum travels one hop per round under the synchronous scheduler.
        let g = path(5);
        let rules = max_rules();
        let t = run_until_silent(&g, &(), Cfg::new(vec![7, 0, 0, 0, 0]), &rules, SchedulerPolicy::new(SchedulerKind::AllEnabled, 0), RunLimits::rounds(100), &|_, _| 0);
        assert_eq!(t.cause, Termination::Silent);
        assert_eq!(t.rounds, 4);
        assert_eq!(t.final_config.states, vec![7; 5]);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let g = path(2);
        let rules: Vec<Rule<u32, ()>> = vec![Rule::new("flip", |_| true, |v: &LocalView<'_, u32, ()>| v.state() ^ 1)];
        let t = run_until_silent(&g, &(), Cfg::new(vec![0, 0]), &rules, SchedulerPolicy::new(SchedulerKind::AllEnabled, 0), RunLimits::rounds(3), &|_, _| 0);
        assert_eq!(t.cause, Termination::RoundBudgetExhausted);
        assert_eq!(t.rounds, 3);
    }

    #[test]
    fn starve_one_skips_victim_when_possible() {
        let mut s = Scheduler::new(SchedulerPolicy::new(SchedulerKind::AdversarialStarveOne, 4), 6);
        let victim = s.victim.unwrap();
        let all: Vec<usize> = (0..6).collect();
        assert!(!s.select(&all).contains(&victim));
        assert_eq!(s.select(&[victim]), vec![victim]);
    }

    #[test]
    fn stubborn_repeats_last_node() {
        let mut s = Scheduler::new(SchedulerPolicy::new(SchedulerKind::AdversarialStubborn, 0), 6);
        assert_eq!(s.select(&[2, 4]), vec![2]);
        assert_eq!(s.select(&[1, 2]), vec![2]);
        assert_eq!(s.select(&[1, 3]), vec![1]);
    }
}
