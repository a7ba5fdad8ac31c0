//! `gdg`: run gathering experiments on dynamic rings.
//!
//! Exit status: 0 when the expected variant holds (or the adversary kept its
//! targets apart), 1 when it does not, 2 for invalid input.

mod batch;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gdg_core::adversary::{adaptive_ac_adversary, generate, random_placement, AdversaryTargets, GeneratorSpec};
use gdg_core::protocol::{Gdg, RobotId};
use gdg_core::ring::{right_neighbor, DynClass, NodeId, MIN_RING_SIZE};
use serde_json::json;

use config::{explicit_placement, parse_class, placement_rng, validate_ids, ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "gdg", version, about = "Gracefully degrading gathering on dynamic rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run and check the variant expected for its class.
    Run(RunArgs),
    /// Play the adaptive always-connected adversary against the protocol.
    Adversary(AdversaryArgs),
    /// Run a JSON array of run configs and summarize verdicts per class.
    Batch(BatchArgs),
    /// Write a generated ring schedule.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Ring size (taken from the schedule when one is given).
    #[arg(long)]
    n: Option<usize>,
    /// Number of robots; must match --ids.
    #[arg(long = "r")]
    r: Option<usize>,
    /// Distinct positive robot ids.
    #[arg(long, value_delimiter = ',')]
    ids: Option<Vec<RobotId>>,
    /// Dynamics class: cot, ac, re, bre (with --delta, or bre:D), st.
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    delta: Option<u32>,
    /// Ring schedule file to use instead of generating one.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Start node of each robot, in --ids order. Seeded random when absent.
    #[arg(long, value_delimiter = ',')]
    placement: Option<Vec<usize>>,
    #[arg(long, env = "GDG_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Write the JSON-lines trace here.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Write the verdict JSON here.
    #[arg(long)]
    verdict_out: Option<PathBuf>,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "r")]
    r: Option<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    ids: Vec<RobotId>,
    #[arg(long, value_delimiter = ',')]
    placement: Option<Vec<usize>>,
    #[arg(long, env = "GDG_SEED")]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    horizon: u64,
    /// First target robot (default: second largest id).
    #[arg(long)]
    r1: Option<RobotId>,
    /// Second target robot (default: largest id).
    #[arg(long)]
    r2: Option<RobotId>,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Write the emitted schedule here.
    #[arg(long)]
    schedule_out: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    /// JSON file holding an array of run configs.
    spec: PathBuf,
    /// Write the full JSON report here.
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    class: String,
    #[arg(long)]
    delta: Option<u32>,
    #[arg(long)]
    n: usize,
    #[arg(long, env = "GDG_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(ConfigError),
    Io(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_run(args: RunArgs) -> Result<bool, Failure> {
    let cfg = RunConfig {
        n: args.n,
        r: args.r,
        ids: args.ids,
        class: args.class,
        delta: args.delta,
        schedule: args.schedule,
        placement: args.placement,
        seed: args.seed,
        horizon: args.horizon,
    };
    let report = config::simulate(cfg.resolve()?);
    if let Some(path) = &args.trace_out {
        write_file(path, &report.trace.to_jsonl())?;
    }
    let verdict = report.to_json().to_string();
    if let Some(path) = &args.verdict_out {
        write_file(path, &format!("{verdict}\n"))?;
    }
    println!("{verdict}");
    Ok(report.ok())
}

fn cmd_adversary(args: AdversaryArgs) -> Result<bool, Failure> {
    let usage = |m: String| Failure::Config(ConfigError::Usage(m));
    if args.horizon == 0 {
        return Err(usage("horizon must be positive".into()));
    }
    if args.n < MIN_RING_SIZE {
        return Err(usage(format!("ring size must be at least {MIN_RING_SIZE}, got {}", args.n)));
    }
    validate_ids(&args.ids)?;
    if args.r.is_some_and(|r| r != args.ids.len()) {
        return Err(usage(format!("R does not match the {} ids given", args.ids.len())));
    }
    let default = AdversaryTargets::largest(&args.ids).expect("validated at least four ids");
    let targets = AdversaryTargets { r1: args.r1.unwrap_or(default.r1), r2: args.r2.unwrap_or(default.r2) };
    for t in [targets.r1, targets.r2] {
        if !args.ids.contains(&t) {
            return Err(usage(format!("target {t} is not one of the ids")));
        }
    }
    if targets.r1 == targets.r2 {
        return Err(usage("--r1 and --r2 must differ".into()));
    }
    let seed = args.seed.unwrap_or(0);
    let placement: Vec<(RobotId, NodeId)> = match &args.placement {
        Some(nodes) => explicit_placement(&args.ids, nodes, args.n)?,
        None => {
            // Random start, with the second target nudged off the first.
            let mut p = random_placement(&args.ids, args.n, &mut placement_rng(seed));
            let at = |p: &[(RobotId, NodeId)], id| p.iter().find(|x| x.0 == id).map(|x| x.1);
            let first = at(&p, targets.r1).expect("target placed");
            if at(&p, targets.r2) == Some(first) {
                for slot in p.iter_mut().filter(|x| x.0 == targets.r2) {
                    slot.1 = right_neighbor(first, args.n);
                }
            }
            p
        }
    };
    let out = adaptive_ac_adversary(&Gdg, args.n, &placement, &targets, args.horizon)
        .map_err(|e| usage(e.to_string()))?;
    if let Some(path) = &args.trace_out {
        write_file(path, &out.trace.to_jsonl())?;
    }
    if let Some(path) = &args.schedule_out {
        write_file(path, &format!("{}\n", out.ring.to_json()))?;
    }
    let summary = json!({
        "n": args.n,
        "ids": args.ids,
        "r1": targets.r1,
        "r2": targets.r2,
        "horizon": args.horizon,
        "rounds": out.trace.events.len(),
        "ac_verified": out.ring.verify_class(DynClass::Ac),
        "defeated_at": out.defeated_at,
    });
    println!("{summary}");
    if let Some(t) = out.defeated_at {
        eprintln!("adversary defeated: robots {} and {} co-located at round {t}", targets.r1, targets.r2);
    }
    Ok(out.defeated_at.is_none())
}

fn cmd_batch(args: BatchArgs) -> Result<bool, Failure> {
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| ConfigError::Usage(format!("cannot read {}: {e}", args.spec.display())))?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| ConfigError::Usage(format!("{}: {e}", args.spec.display())))?;
    let base = args.spec.parent().unwrap_or(Path::new("."));
    let report = batch::run_batch(&doc, base).map_err(ConfigError::Usage)?;
    let body = serde_json::to_string_pretty(&report).context("serializing report")?;
    if let Some(path) = &args.report_out {
        write_file(path, &format!("{body}\n"))?;
    }
    if args.json {
        println!("{body}");
    } else {
        print!("{}", report.table());
    }
    Ok(report.failed() == 0)
}

fn cmd_generate(args: GenerateArgs) -> Result<bool, Failure> {
    let class = parse_class(&args.class, args.delta)?;
    let ring = generate(&GeneratorSpec::new(class, args.n, args.seed))
        .map_err(|e| ConfigError::Usage(e.to_string()))?;
    let text = format!("{}\n", ring.to_json());
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Adversary(a) => cmd_adversary(a),
        Command::Batch(a) => cmd_batch(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
