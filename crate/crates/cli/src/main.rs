use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use ssmst::cert::{dump_labels, parse_labels, verify_labels};
use ssmst::harness::{self, FleetSpec, GraphSource, TrialConfig};
use ssmst::proto::corrupt::Corruption;
use ssmst::quant::MilestoneSet;
use ssmst::sim::SchedulerKind;

#[derive(Parser)]
#[command(name = "ssmst", version, about = "Self-stabilizing approximate MST simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one trial and print its result as JSON.
    Simulate {
        /// Graph file, or gen:<kind>:<n>:<dist>[:<seed>].
        #[arg(long)]
        graph: String,
        #[arg(long, allow_hyphen_values = true)]
        k: i32,
        #[arg(long, default_value = "all_enabled")]
        scheduler: SchedulerKind,
        #[arg(long = "corrupt", default_value = "none")]
        corruption: Corruption,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = harness::DEFAULT_MAX_ROUNDS)]
        max_rounds: u64,
        #[arg(long, default_value_t = harness::ALPHA)]
        alpha: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dump the final labels, one JSON object per node.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Print the milestone set for (n, k) as JSON.
    Milestones {
        #[arg(long)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        k: i32,
    },
    /// Run a fleet spec (TOML, or JSON by extension) and write JSON lines.
    Fleet {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Also write a flattened CSV table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check dumped labels against a graph.
    Verify {
        #[arg(long)]
        labels: PathBuf,
        /// Graph file, or gen:<kind>:<n>:<dist>[:<seed>].
        #[arg(long)]
        graph: String,
        /// Trade-off parameter the labels were built for.
        #[arg(long, allow_hyphen_values = true)]
        k: Option<i32>,
    },
    /// Run a fleet with generous limits and derive alpha and C.
    Calibrate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn jobs(spec: &FleetSpec, flag: Option<usize>) -> usize {
    flag.or(spec.jobs).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Simulate { graph, k, scheduler, corruption, seed, max_rounds, alpha, out, labels } => {
            let src: GraphSource = graph.parse()?;
            let g = src.load()?;
            let cfg = TrialConfig { k, scheduler, corruption, seed, max_rounds, alpha };
            let (r, fin) = harness::run_trial_keep(&g, &src.to_string(), &cfg, None);
            if let (Some(p), Some(fin)) = (labels, fin) {
                write(&p, &dump_labels(&g, &ssmst::proto::labels(&fin)))?;
            }
            let text = serde_json::to_string_pretty(&r)?;
            match out {
                Some(p) => write(&p, &(text + "\n"))?,
                None => println!("{text}"),
            }
            if let Some(e) = &r.error {
                eprintln!("error: {e}");
            }
            Ok(r.passed())
        }
        Cmd::Milestones { n, k } => {
            let ms = MilestoneSet::new(n, k)?;
            let bound = ms.approximation_bound();
            let out = json!({
                "n": n,
                "k": k,
                "milestones": ms.milestones(),
                "size": ms.len(),
                "code_length": ms.code_length(),
                "bound": format!("{}/{}", bound.numer(), bound.denom()),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Cmd::Fleet { spec, jobs: j, out, csv } => {
            let spec = FleetSpec::load(&spec)?;
            let results = harness::run_fleet(&spec, jobs(&spec, j))?;
            write(&out, &harness::to_jsonl(&results))?;
            if let Some(p) = csv {
                write(&p, &harness::to_csv(&results)?)?;
            }
            let summary = harness::summarize(&results);
            print!("{summary}");
            Ok(summary.failed == 0)
        }
        Cmd::Verify { labels, graph, k } => {
            let g = graph.parse::<GraphSource>()?.load()?;
            let labels = parse_labels(&g, &read(&labels)?)?;
            let k = match k {
                Some(k) => k,
                None => ssmst::quant::k_range(g.n() as u64).1,
            };
            let ms = MilestoneSet::new(g.n() as u64, k)?;
            let rejecting = verify_labels(&g, &labels, &ms);
            let ids: Vec<u32> = rejecting.iter().map(|id| id.get()).collect();
            println!("{}", serde_json::to_string(&json!({ "k": k, "rejecting": ids }))?);
            Ok(rejecting.is_empty())
        }
        Cmd::Calibrate { spec, jobs: j } => {
            let spec = FleetSpec::load(&spec)?;
            if spec.alpha.is_none() || spec.max_rounds.is_none() {
                bail!("calibration specs must set alpha and max_rounds explicitly");
            }
            let results = harness::run_fleet(&spec, jobs(&spec, j))?;
            print!("{}", harness::summarize(&results));
            println!("{}", serde_json::to_string_pretty(&harness::calibrate(&results))?);
            Ok(results.iter().all(|r| r.passed()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
