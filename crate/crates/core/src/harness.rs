//! Experiment runner: single trials, fleets of trials, and calibration of the
//! space constant and the round budget.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{generate, parse_graph, GraphKind, WeightDist, WeightedGraph};
use crate::oracle::kruskal;
use crate::proto::corrupt::{corrupt, Corruption};
use crate::proto::{self, clean_configuration, selected_tree, verify_all, Env, NodeState, TRIGGER_RULE};
use crate::quant::{approximation_bound, ceil_log2, k_range, MilestoneSet};
use crate::sim::{Configuration, Scheduler, SchedulerKind, SchedulerPolicy, SimError, Simulator, Termination};

/// Space constant, measured by `calibrate` plus 25%: every metered state stays within
/// `alpha * max(1, ceil(log2 n)) * s` bits.
pub const ALPHA: u64 = 50;

/// Round budget constant, measured by `calibrate` plus 25%: trials get
/// `BUDGET_C * n^3` rounds.
pub const BUDGET_C: u64 = 2;

pub const DEFAULT_MAX_ROUNDS: u64 = 1_000_000;

/// Scheduler invocations used to check that a silent configuration stays put.
pub const CLOSURE_PROBES: usize = 100;

pub fn budget(n: usize) -> u64 {
    BUDGET_C * (n as u64).pow(3)
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad graph descriptor `{0}`: expected gen:<kind>:<n>:<dist>[:<seed>] or a file path")]
    Descriptor(String),
    #[error("graph: {0}")]
    Graph(String),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("fleet spec: {0}")]
    Spec(String),
}

/// Where a graph comes from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Gen { kind: GraphKind, n: usize, dist: WeightDist, #[serde(default)] seed: u64 },
    File(PathBuf),
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::Gen { kind, n, dist, seed } => write!(f, "gen:{kind}:{n}:{dist}:{seed}"),
            GraphSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for GraphSource {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let Some(rest) = s.strip_prefix("gen:") else {
            return Ok(GraphSource::File(PathBuf::from(s)));
        };
        let bad = || HarnessError::Descriptor(s.to_string());
        let parts: Vec<&str> = rest.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        Ok(GraphSource::Gen {
            kind: parts[0].parse().map_err(|_| bad())?,
            n: parts[1].parse().map_err(|_| bad())?,
            dist: parts[2].parse().map_err(|_| bad())?,
            seed: parts.get(3).map_or(Ok(0), |p| p.parse()).map_err(|_| bad())?,
        })
    }
}

impl GraphSource {
    pub fn load(&self) -> Result<WeightedGraph, HarnessError> {
        match self {
            GraphSource::Gen { kind, n, dist, seed } => {
                generate(*kind, *n, *dist, *seed).map_err(|e| HarnessError::Graph(e.to_string()))
            }
            GraphSource::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| HarnessError::Io { path: p.clone(), source })?;
                parse_graph(&text).map_err(|e| HarnessError::Graph(e.to_string()))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub k: i32,
    pub scheduler: SchedulerKind,
    pub corruption: Corruption,
    pub seed: u64,
    pub max_rounds: u64,
    pub alpha: u64,
}

impl TrialConfig {
    pub fn new(k: i32, scheduler: SchedulerKind, corruption: Corruption, seed: u64) -> Self {
        TrialConfig { k, scheduler, corruption, seed, max_rounds: DEFAULT_MAX_ROUNDS, alpha: ALPHA }
    }
}

/// One measured execution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub graph: String,
    pub n: usize,
    pub m: usize,
    pub k: i32,
    pub scheduler: SchedulerKind,
    pub seed: u64,
    pub corruption: Corruption,
    pub max_rounds: u64,
    pub rounds_to_silence: u64,
    pub steps: u64,
    pub cause: Termination,
    /// Original weight of the selected tree.
    pub tree_weight: Option<u64>,
    pub optimum: u64,
    /// `tree_weight / optimum` as `p/q`.
    pub ratio: Option<String>,
    pub bound: String,
    pub within_bound: bool,
    pub verified: bool,
    pub legitimate: bool,
    pub closure_ok: bool,
    /// Largest metered state written by any node.
    pub peak_bits: u64,
    pub cap_bits: u64,
    /// Most level records held by any node at any time.
    pub max_levels: usize,
    pub reset_count: u64,
    pub trigger_fires: u64,
    pub error: Option<String>,
}

impl TrialResult {
    /// Every checked property of a silent run holds.
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.cause == Termination::Silent
            && self.within_bound
            && self.verified
            && self.legitimate
            && self.closure_ok
            && self.peak_bits <= self.cap_bits
    }
}

fn fmt_ratio(r: Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// The configuration a clean run settles in, used as the starting point of
/// corruption policies that perturb a legitimate configuration.
pub fn stabilized(g: &WeightedGraph, env: &Env, max_rounds: u64) -> Option<Configuration<NodeState>> {
    let rules = proto::rules();
    let mut sim = Simulator::new(g, env, &rules, clean_configuration(g));
    let mut sch = Scheduler::new(SchedulerPolicy::new(SchedulerKind::AllEnabled, 0), g.n());
    while !sim.is_silent() {
        if sim.rounds >= max_rounds {
            return None;
        }
        sim.step(&mut sch).ok()?;
    }
    Some(sim.into_configuration())
}

fn failed(graph: String, g: Option<&WeightedGraph>, cfg: &TrialConfig, error: String) -> TrialResult {
    TrialResult {
        graph,
        n: g.map_or(0, |g| g.n()),
        m: g.map_or(0, |g| g.m()),
        k: cfg.k,
        scheduler: cfg.scheduler,
        seed: cfg.seed,
        corruption: cfg.corruption,
        max_rounds: cfg.max_rounds,
        rounds_to_silence: 0,
        steps: 0,
        cause: Termination::RoundBudgetExhausted,
        tree_weight: None,
        optimum: 0,
        ratio: None,
        bound: String::new(),
        within_bound: false,
        verified: false,
        legitimate: false,
        closure_ok: false,
        peak_bits: 0,
        cap_bits: 0,
        max_levels: 0,
        reset_count: 0,
        trigger_fires: 0,
        error: Some(error),
    }
}

/// Runs one trial. `stable` is the stabilized configuration for `(g, k)`,
/// computed on demand when the policy needs it and none is given.
pub fn run_trial(
    g: &WeightedGraph,
    graph: &str,
    cfg: &TrialConfig,
    stable: Option<&Configuration<NodeState>>,
) -> TrialResult {
    run_trial_keep(g, graph, cfg, stable).0
}

/// Like [`run_trial`], also returning the final configuration.
pub fn run_trial_keep(
    g: &WeightedGraph,
    graph: &str,
    cfg: &TrialConfig,
    stable: Option<&Configuration<NodeState>>,
) -> (TrialResult, Option<Configuration<NodeState>>) {
    let n = g.n();
    let ms = match MilestoneSet::new(n as u64, cfg.k) {
        Ok(ms) => ms,
        Err(e) => return (failed(graph.to_string(), Some(g), cfg, e.to_string()), None),
    };
    let env = Env::new(g, ms.clone(), Ratio::from_integer(cfg.alpha));
    let rules = proto::rules();
    let trig = rules.iter().position(|r| r.name() == TRIGGER_RULE).expect("trigger rule present");

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = if cfg.corruption.needs_stable() {
        let owned;
        let base = match stable {
            Some(s) => s,
            None => match stabilized(g, &env, cfg.max_rounds) {
                Some(s) => {
                    owned = s;
                    &owned
                }
                None => return (failed(graph.to_string(), Some(g), cfg, "clean run did not stabilize".into()), None),
            },
        };
        corrupt(g, &env, base, &mut rng, cfg.corruption)
    } else {
        corrupt(g, &env, &clean_configuration(g), &mut rng, cfg.corruption)
    };

    let mut sim = Simulator::new(g, &env, &rules, start);
    let mut sch = Scheduler::new(SchedulerPolicy::new(cfg.scheduler, cfg.seed), n);
    let mut peak_bits = 0u64;
    let mut max_levels = sim.states().iter().map(|s| s.cert.label.levels.len()).max().unwrap_or(0);
    let mut reset_count = 0u64;
    let mut counted = false;
    let mut cause = Termination::Silent;
    let max_steps = cfg.max_rounds.saturating_mul(1000).max(1_000_000);
    loop {
        if sim.is_silent() {
            break;
        }
        if sim.rounds >= cfg.max_rounds || sim.steps >= max_steps {
            cause = Termination::RoundBudgetExhausted;
            break;
        }
        let before = sim.rule_fires[trig];
        let chosen = sim.step(&mut sch).expect("not silent");
        for &i in &chosen {
            let st = &sim.states()[i];
            peak_bits = peak_bits.max(proto::meter(st, &env));
            max_levels = max_levels.max(st.cert.label.levels.len());
        }
        // a reset is one wave, however many nodes initiate it
        if sim.rule_fires[trig] > before && !counted {
            reset_count += 1;
            counted = true;
        }
        if counted && !sim.states().iter().any(NodeState::in_reset) {
            counted = false;
        }
    }

    let rounds = sim.rounds;
    let steps = sim.steps;
    let trigger_fires = sim.rule_fires[trig];
    let closure_ok = cause == Termination::Silent && {
        let before = sim.configuration();
        (0..CLOSURE_PROBES).all(|_| matches!(sim.step(&mut sch), Err(SimError::NothingEnabled)))
            && sim.configuration() == before
    };
    let fin = sim.into_configuration();

    let optimum = kruskal(g, |w| w).weight;
    let bound = ms.approximation_bound();
    let tree_weight = selected_tree(g, &fin).ok().and_then(|t| {
        (t.len() + 1 == n && crate::oracle::is_spanning_tree(g, &t)).then(|| t.total_weight(g, |w| w)).flatten()
    });
    let ratio = tree_weight.map(|w| Ratio::new(w, optimum.max(1)));
    let result = TrialResult {
        graph: graph.to_string(),
        n,
        m: g.m(),
        k: cfg.k,
        scheduler: cfg.scheduler,
        seed: cfg.seed,
        corruption: cfg.corruption,
        max_rounds: cfg.max_rounds,
        rounds_to_silence: rounds,
        steps,
        cause,
        tree_weight,
        optimum,
        ratio: ratio.map(fmt_ratio),
        bound: fmt_ratio(bound),
        within_bound: ratio.map_or(false, |r| r <= bound),
        verified: cause == Termination::Silent && verify_all(g, &env, &fin).is_empty(),
        legitimate: proto::is_legitimate(g, &env, &fin),
        closure_ok,
        peak_bits,
        cap_bits: env.cap_bits,
        max_levels,
        reset_count,
        trigger_fires,
        error: None,
    };
    (result, Some(fin))
}

/// A value of the trade-off parameter in a fleet spec: an integer, or one of
/// `min`, `max`, `all` resolved against each graph's valid range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KSpec {
    Value(i32),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphEntry {
    Descriptor(String),
    Source(GraphSource),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    List(Vec<u64>),
    Count { count: u64, #[serde(default)] start: u64 },
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::List(vec![0])
    }
}

impl Seeds {
    pub fn values(&self) -> Vec<u64> {
        match self {
            Seeds::List(v) => v.clone(),
            Seeds::Count { count, start } => (*start..start + count).collect(),
        }
    }
}

/// Cartesian product of graphs, k values, schedulers, corruptions and seeds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetSpec {
    #[serde(default)]
    pub graphs: Vec<GraphEntry>,
    #[serde(default)]
    pub k: Vec<KSpec>,
    #[serde(default)]
    pub schedulers: Vec<SchedulerKind>,
    #[serde(default)]
    pub corruptions: Vec<Corruption>,
    #[serde(default)]
    pub seeds: Seeds,
    /// Fixed round budget; the calibrated `BUDGET_C * n^3` when absent.
    pub max_rounds: Option<u64>,
    pub alpha: Option<u64>,
    pub jobs: Option<usize>,
}

impl FleetSpec {
    pub fn parse(text: &str, path: &Path) -> Result<Self, HarnessError> {
        let json = path.extension().map_or(false, |e| e == "json");
        if json {
            serde_json::from_str(text).map_err(|e| HarnessError::Spec(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| HarnessError::Spec(e.to_string()))
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
        Self::parse(&text, path)
    }
}

/// Resolves `ks` against the valid range for `n`, dropping duplicates and
/// integers outside the range.
pub fn resolve_k(ks: &[KSpec], n: usize) -> Result<Vec<i32>, HarnessError> {
    let (lo, hi) = k_range(n as u64);
    let mut out = Vec::new();
    for k in ks {
        match k {
            KSpec::Value(v) => out.push(*v),
            KSpec::Named(s) => match s.as_str() {
                "min" => out.push(lo),
                "max" => out.push(hi),
                "all" => out.extend(lo..=hi),
                _ => return Err(HarnessError::Spec(format!("unknown k `{s}`"))),
            },
        }
    }
    let mut seen = Vec::new();
    out.retain(|k| {
        let fresh = (lo..=hi).contains(k) && !seen.contains(k);
        seen.push(*k);
        fresh
    });
    Ok(out)
}

struct Planned {
    graph: usize,
    cfg: TrialConfig,
}

/// Runs the fleet with `jobs` worker threads. Results come back in the
/// order of the Cartesian product regardless of `jobs`.
pub fn run_fleet(spec: &FleetSpec, jobs: usize) -> Result<Vec<TrialResult>, HarnessError> {
    let mut graphs = Vec::new();
    for entry in &spec.graphs {
        let src = match entry {
            GraphEntry::Descriptor(s) => s.parse()?,
            GraphEntry::Source(s) => s.clone(),
        };
        let g = src.load();
        graphs.push((src.to_string(), g));
    }
    let seeds = spec.seeds.values();
    let alpha = spec.alpha.unwrap_or(ALPHA);
    let mut plan = Vec::new();
    let mut broken = HashMap::new();
    for (gi, (desc, g)) in graphs.iter().enumerate() {
        let g = match g {
            Ok(g) => g,
            Err(e) => {
                broken.insert(gi, failed(desc.clone(), None, &TrialConfig::new(0, SchedulerKind::AllEnabled, Corruption::None, 0), e.to_string()));
                plan.push(Planned { graph: gi, cfg: TrialConfig::new(0, SchedulerKind::AllEnabled, Corruption::None, 0) });
                continue;
            }
        };
        let max_rounds = spec.max_rounds.unwrap_or_else(|| budget(g.n()));
        for k in resolve_k(&spec.k, g.n())? {
            for &scheduler in &spec.schedulers {
                for &corruption in &spec.corruptions {
                    for &seed in &seeds {
                        plan.push(Planned { graph: gi, cfg: TrialConfig { k, scheduler, corruption, seed, max_rounds, alpha } });
                    }
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| HarnessError::Spec(e.to_string()))?;
    Ok(pool.install(|| {
        // stabilized starting points, one per (graph, k)
        let mut needed: Vec<(usize, i32, u64)> = plan
            .iter()
            .filter(|p| p.cfg.corruption.needs_stable() && !broken.contains_key(&p.graph))
            .map(|p| (p.graph, p.cfg.k, p.cfg.max_rounds))
            .collect();
        needed.sort_unstable();
        needed.dedup_by_key(|t| (t.0, t.1));
        let stable: HashMap<(usize, i32), Option<Configuration<NodeState>>> = needed
            .par_iter()
            .map(|&(gi, k, rounds)| {
                let g = graphs[gi].1.as_ref().unwrap();
                let cfg = MilestoneSet::new(g.n() as u64, k).ok().and_then(|ms| {
                    let env = Env::new(g, ms, Ratio::from_integer(alpha));
                    stabilized(g, &env, rounds)
                });
                ((gi, k), cfg)
            })
            .collect();
        plan.par_iter()
            .map(|p| {
                if let Some(r) = broken.get(&p.graph) {
                    return r.clone();
                }
                let (desc, g) = &graphs[p.graph];
                let g = g.as_ref().unwrap();
                let base = stable.get(&(p.graph, p.cfg.k)).and_then(Option::as_ref);
                if p.cfg.corruption.needs_stable() && base.is_none() && MilestoneSet::new(g.n() as u64, p.cfg.k).is_ok() {
                    return failed(desc.clone(), Some(g), &p.cfg, "clean run did not stabilize".into());
                }
                run_trial(g, desc, &p.cfg, base)
            })
            .collect()
    }))
}

pub fn to_jsonl(results: &[TrialResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&serde_json::to_string(r).expect("plain record"));
        out.push('\n');
    }
    out
}

pub fn to_csv(results: &[TrialResult]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in results {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Aggregates printed after a fleet.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub exhausted: usize,
    /// `(k, max ratio, trials above their bound)`.
    pub max_ratio_per_k: Vec<(i32, String, usize)>,
    /// `(n, k, max peak bits, cap)`.
    pub max_bits: Vec<(usize, i32, u64, u64)>,
    pub max_rounds: u64,
    pub max_resets: u64,
}

fn parse_ratio(s: &str) -> Option<Ratio<u64>> {
    let (a, b) = s.split_once('/')?;
    Some(Ratio::new(a.parse().ok()?, b.parse().ok()?))
}

pub fn summarize(results: &[TrialResult]) -> Summary {
    let mut per_k: BTreeMap<i32, (Ratio<u64>, usize)> = BTreeMap::new();
    let mut bits: BTreeMap<(usize, i32), (u64, u64)> = BTreeMap::new();
    let mut s = Summary { trials: results.len(), ..Default::default() };
    for r in results {
        if r.passed() {
            s.passed += 1;
        } else {
            s.failed += 1;
        }
        if r.error.is_some() {
            continue;
        }
        if r.cause == Termination::RoundBudgetExhausted {
            s.exhausted += 1;
        }
        s.max_rounds = s.max_rounds.max(r.rounds_to_silence);
        s.max_resets = s.max_resets.max(r.reset_count);
        if let Some(q) = r.ratio.as_deref().and_then(parse_ratio) {
            let e = per_k.entry(r.k).or_insert((q, 0));
            e.0 = e.0.max(q);
            e.1 += usize::from(!r.within_bound);
        }
        let e = bits.entry((r.n, r.k)).or_insert((0, r.cap_bits));
        e.0 = e.0.max(r.peak_bits);
    }
    s.max_ratio_per_k = per_k.into_iter().map(|(k, (q, over))| (k, fmt_ratio(q), over)).collect();
    s.max_bits = bits.into_iter().map(|((n, k), (b, c))| (n, k, b, c)).collect();
    s
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trials {}  passed {}  failed {}  exhausted {}", self.trials, self.passed, self.failed, self.exhausted)?;
        writeln!(f, "max rounds {}  max resets {}", self.max_rounds, self.max_resets)?;
        writeln!(f, "{:>4}  {:>12}  {:>11}", "k", "max ratio", "over bound")?;
        for (k, q, over) in &self.max_ratio_per_k {
            writeln!(f, "{k:>4}  {q:>12}  {over:>11}")?;
        }
        writeln!(f, "{:>5}  {:>4}  {:>9}  {:>6}", "n", "k", "max bits", "cap")?;
        for (n, k, b, c) in &self.max_bits {
            writeln!(f, "{n:>5}  {k:>4}  {b:>9}  {c:>6}")?;
        }
        Ok(())
    }
}

/// Measured constants of a calibration fleet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    /// Largest `peak_bits / (max(1, ceil(log2 n)) * s)` observed, as `p/q`.
    pub alpha_needed: String,
    /// Largest `rounds / n^3` observed, as `p/q`.
    pub c_needed: String,
    /// Frozen values with a 25% margin, rounded up.
    pub alpha: u64,
    pub c: u64,
}

/// Derives the constants from results obtained with generous limits.
pub fn calibrate(results: &[TrialResult]) -> Calibration {
    let mut alpha_needed = Ratio::from_integer(0u64);
    let mut c_needed = Ratio::from_integer(0u64);
    for r in results.iter().filter(|r| r.error.is_none() && r.cause == Termination::Silent) {
        let s = MilestoneSet::new(r.n as u64, r.k).map(|ms| ms.code_length() as u64).unwrap_or(1).max(1);
        let logn = (ceil_log2(r.n as u64) as u64).max(1);
        alpha_needed = alpha_needed.max(Ratio::new(r.peak_bits, logn * s));
        c_needed = c_needed.max(Ratio::new(r.rounds_to_silence, (r.n as u64).pow(3).max(1)));
    }
    let margin = |x: Ratio<u64>| (x * Ratio::new(5, 4)).ceil().to_integer().max(1);
    Calibration {
        alpha_needed: fmt_ratio(alpha_needed),
        c_needed: fmt_ratio(c_needed),
        alpha: margin(alpha_needed),
        c: margin(c_needed),
    }
}

/// Whether `k` is valid for `n`.
pub fn valid_k(n: usize, k: i32) -> bool {
    approximation_bound(k, n as u64).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_round_trip() {
        let src: GraphSource = "gen:path:8:uniform_1_to_n:3".parse().unwrap();
        assert_eq!(src, GraphSource::Gen { kind: GraphKind::Path, n: 8, dist: WeightDist::Uniform1ToN, seed: 3 });
        assert_eq!(src.to_string().parse::<GraphSource>().unwrap(), src);
        assert!("gen:path:x:uniform".parse::<GraphSource>().is_err());
        assert_eq!("g.txt".parse::<GraphSource>().unwrap(), GraphSource::File("g.txt".into()));
    }

    #[test]
    fn named_k_values() {
        let ks = [KSpec::Named("min".into()), KSpec::Value(0), KSpec::Named("max".into()), KSpec::Value(0)];
        assert_eq!(resolve_k(&ks, 16).unwrap(), vec![-2, 0, 3]);
        let ks = [KSpec::Named("min".into()), KSpec::Value(0), KSpec::Value(2), KSpec::Named("max".into())];
        assert_eq!(resolve_k(&ks, 4).unwrap(), vec![-1, 0, 1]);
    }

    #[test]
    fn path_has_ratio_one() {
        let g = generate(GraphKind::Path, 8, WeightDist::Uniform1ToN, 0).unwrap();
        let r = run_trial(&g, "path", &TrialConfig::new(2, SchedulerKind::AllEnabled, Corruption::None, 0), None);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.ratio.as_deref(), Some("1/1"));
        assert_eq!(r.reset_count, 0);
    }
}
