//! Command-line entry point.
//!
//! Every subcommand accepts `--config FILE` (JSON, see [`RunConfig`]);
//! explicit flags override file values. `LC_ARENA_SEED` is consulted only
//! when neither a flag nor the config sets a seed.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::agents::{AgentConfig, DdqnConfig, MetaTrainOutcome};
use crate::curvestore::{load_metadataset, save_metadataset, CurveKind, MetaDataset};
use crate::env::RevealMode;
use crate::error::{ArenaError, Result};
use crate::harness::{
    analyze_trajectory, compare_reports, read_report_json, read_trajectory_jsonl, run_ablation,
    run_meta_test, run_meta_train, write_comparison, write_run_outputs, AblationKind,
    HarnessConfig, Phase, DEFAULT_SEEDS,
};
use crate::synthgen::{generate, GenSpec, Scenario};

pub const CONFIG_SCHEMA: u32 = 1;
pub const SEED_ENV: &str = "LC_ARENA_SEED";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// Contents of a `--config` file. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema: Option<u32>,
    pub manifest: Option<PathBuf>,
    /// Agent name plus parameters, e.g. `{"name": "ddqn", "episodes": 50}`.
    pub agent: Option<Value>,
    pub sigma: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub reveal: Option<RevealMode>,
    pub phase: Option<Phase>,
    pub workers: Option<usize>,
    pub ablation: Option<AblationKind>,
    pub generate: Option<GenSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| ArenaError::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| ArenaError::Config(format!("{}: {e}", path.display())))?;
        match cfg.schema {
            Some(CONFIG_SCHEMA) => Ok(cfg),
            Some(v) => Err(ArenaError::Config(format!(
                "{}: unsupported config schema {v} (expected {CONFIG_SCHEMA})",
                path.display()
            ))),
            None => Err(ArenaError::Config(format!(
                "{}: missing `schema` field",
                path.display()
            ))),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lc-arena", version, about = "Algorithm selection over pre-recorded learning curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic meta-dataset.
    Generate(GenerateArgs),
    /// Meta-train an agent and write its checkpoint.
    Train(RunArgs),
    /// Evaluate an agent on the meta-test datasets.
    Evaluate(RunArgs),
    /// Compare full DDQN against an ablated variant.
    Ablate(RunArgs),
    /// Build comparison tables from evaluation reports.
    Report(ReportArgs),
    /// Summarize algorithm switches in a trajectory file.
    InspectTrajectory(InspectArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; receives manifest.json and curves/.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub datasets: Option<usize>,
    #[arg(long)]
    pub algorithms: Option<usize>,
    #[arg(long)]
    pub anchors: Option<usize>,
    #[arg(long)]
    pub budget: Option<f64>,
    /// time_indexed or size_indexed.
    #[arg(long)]
    pub kind: Option<String>,
    /// generic, non_crossing or frequent_crossing.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long)]
    pub meta_train_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Manifest file, or a directory containing manifest.json.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// ddqn, freeze_thaw, avg_rank, bos or rand_search.
    #[arg(long)]
    pub agent: Option<String>,
    /// Agent parameter override as KEY=VALUE; VALUE is parsed as JSON when
    /// possible. Repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Comma-separated evaluation seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Meta-training seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Checkpoint to load (evaluate) or write (train); defaults to
    /// OUT/checkpoint.json.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// full_curve or last_point_only.
    #[arg(long)]
    pub reveal: Option<String>,
    /// Evaluate on the held-back final half of the meta-test split.
    #[arg(long, conflicts_with = "feedback")]
    pub r#final: bool,
    /// Evaluate on the feedback half of the meta-test split.
    #[arg(long)]
    pub feedback: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    /// no_meta_train or last_point_only (ablate only).
    #[arg(long)]
    pub kind: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// report.json files or directories containing one.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub trajectory: PathBuf,
    /// Manifest used to label algorithm families.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_value(Value::String(s.to_string()))
        .map_err(|_| ArenaError::Config(format!("unknown {what} `{s}`")))
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ArenaError::Config(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    path.as_deref().map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
}

fn manifest_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(MANIFEST_FILE)
    } else {
        p.to_path_buf()
    }
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| ArenaError::Config(format!("missing required option --{flag}")))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| ArenaError::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| ArenaError::io(path, e))
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<PathBuf> {
    let file = load_config(&args.config)?;
    let mut spec = file.generate.clone().unwrap_or_default();
    if let Some(seed) = args.seed.or(file.seed).or(env_seed()?) {
        spec.seed = seed;
    }
    if let Some(v) = args.datasets {
        spec.n_datasets = v;
    }
    if let Some(v) = args.algorithms {
        spec.n_algorithms = v;
    }
    if let Some(v) = args.anchors {
        spec.anchors_per_curve = v;
    }
    if let Some(v) = args.budget {
        spec.total_budget = v;
    }
    if let Some(v) = &args.kind {
        spec.curve_kind = parse_enum::<CurveKind>("curve kind", v)?;
    }
    if let Some(v) = &args.scenario {
        spec.scenario = v.parse::<Scenario>().map_err(ArenaError::Config)?;
    }
    if let Some(v) = args.noise_sd {
        spec.noise_sd = v;
    }
    if let Some(v) = args.meta_train_fraction {
        spec.meta_train_fraction = v;
    }
    let out = require(args.out.clone().or(file.out), "out")?;
    let md = generate(&spec)?;
    let path = out.join(MANIFEST_FILE);
    fs::create_dir_all(&out).map_err(|e| ArenaError::io(&out, e))?;
    save_metadataset(&md, &path)?;
    Ok(path)
}

/// Flags and config file merged into one run description.
#[derive(Clone, Debug)]
pub struct ResolvedRun {
    pub manifest: PathBuf,
    pub agent: AgentConfig,
    pub harness: HarnessConfig,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub checkpoint: PathBuf,
    pub ablation: Option<AblationKind>,
}

fn resolve_agent(base: Option<Value>, name: Option<&str>, params: &[String]) -> Result<AgentConfig> {
    let mut obj = match base {
        Some(Value::Object(m)) => m,
        Some(Value::String(s)) => Map::from_iter([("name".to_string(), Value::String(s))]),
        Some(other) => return Err(ArenaError::Config(format!("agent must be an object, got {other}"))),
        None => Map::new(),
    };
    if let Some(name) = name {
        if obj.get("name").and_then(Value::as_str) != Some(name) {
            obj.clear();
        }
        obj.insert("name".into(), Value::String(name.to_string()));
    }
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| ArenaError::Config(format!("--param `{p}` is not KEY=VALUE")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        obj.insert(k.to_string(), value);
    }
    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| ArenaError::Config("missing required option --agent".into()))?
        .to_string();
    if AgentConfig::from_name(&name).is_none() {
        return Err(ArenaError::Config(format!(
            "unknown agent `{name}` (expected one of {})",
            AgentConfig::NAMES.join(", ")
        )));
    }
    // Unit variants carry no fields; serde wants just the tag.
    serde_json::from_value(Value::Object(obj))
        .map_err(|e| ArenaError::Config(format!("agent `{name}`: {e}")))
}

pub fn resolve_run(args: &RunArgs, need_agent: bool) -> Result<ResolvedRun> {
    let file = load_config(&args.config)?;
    let manifest = manifest_path(&require(args.manifest.clone().or(file.manifest), "manifest")?);
    let agent = if need_agent || args.agent.is_some() || file.agent.is_some() {
        resolve_agent(file.agent, args.agent.as_deref(), &args.params)?
    } else {
        let mut obj = Map::new();
        for p in &args.params {
            if let Some((k, v)) = p.split_once('=') {
                obj.insert(k.into(), serde_json::from_str(v).unwrap_or(Value::String(v.into())));
            }
        }
        obj.insert("name".into(), "ddqn".into());
        serde_json::from_value(Value::Object(obj)).map_err(|e| ArenaError::Config(e.to_string()))?
    };
    let sigma = args.sigma.or(file.sigma);
    if let Some(s) = sigma {
        if !(s > 0.0) {
            return Err(ArenaError::Config(format!("sigma must be positive, got {s}")));
        }
    }
    let reveal = match &args.reveal {
        Some(r) => parse_enum::<RevealMode>("reveal mode", r)?,
        None => file.reveal.unwrap_or_default(),
    };
    let phase = if args.r#final {
        Phase::Final
    } else if args.feedback {
        Phase::Feedback
    } else {
        file.phase.unwrap_or_default()
    };
    let workers = args.workers.or(file.workers).unwrap_or(1).max(1);
    let train_seed = args.seed.or(file.seed).or(env_seed()?).unwrap_or(0);
    let seeds = args
        .seeds
        .clone()
        .or(file.seeds)
        .unwrap_or_else(|| DEFAULT_SEEDS.to_vec());
    if seeds.is_empty() {
        return Err(ArenaError::Config("at least one evaluation seed is required".into()));
    }
    let out = require(args.out.clone().or(file.out), "out")?;
    let checkpoint = args
        .checkpoint
        .clone()
        .or(file.checkpoint)
        .unwrap_or_else(|| out.join(CHECKPOINT_FILE));
    let ablation = match &args.kind {
        Some(k) => Some(k.parse::<AblationKind>()?),
        None => file.ablation,
    };
    Ok(ResolvedRun {
        manifest,
        agent,
        harness: HarnessConfig {
            sigma,
            reveal,
            phase,
            workers,
            train_seed,
            ..HarnessConfig::default()
        },
        seeds,
        out,
        checkpoint,
        ablation,
    })
}

/// On-disk form of a trained agent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckpointFile {
    pub schema: u32,
    pub agent: String,
    pub meta_trained: bool,
    pub train_seed: u64,
    pub outcome: MetaTrainOutcome,
    pub state: Option<Value>,
}

fn load_manifest(path: &Path) -> Result<MetaDataset> {
    load_metadataset(path)
}

pub fn cmd_train(args: &RunArgs) -> Result<PathBuf> {
    let run = resolve_run(args, true)?;
    let md = load_manifest(&run.manifest)?;
    let mut agent = run.agent.build();
    let outcome = run_meta_train(agent.as_mut(), &md, &run.harness)?;
    let file = CheckpointFile {
        schema: CONFIG_SCHEMA,
        agent: agent.name().to_string(),
        meta_trained: outcome.meta_trained,
        train_seed: run.harness.train_seed,
        outcome,
        state: agent.checkpoint(),
    };
    write_json(&run.checkpoint, &file)?;
    Ok(run.checkpoint)
}

pub fn cmd_evaluate(args: &RunArgs) -> Result<PathBuf> {
    let run = resolve_run(args, true)?;
    let md = load_manifest(&run.manifest)?;
    let mut agent = run.agent.build();
    if run.checkpoint.exists() {
        let text = fs::read_to_string(&run.checkpoint).map_err(|e| ArenaError::io(&run.checkpoint, e))?;
        let ck: CheckpointFile = serde_json::from_str(&text)?;
        if ck.agent != agent.name() {
            return Err(ArenaError::Config(format!(
                "checkpoint {} belongs to `{}`, not `{}`",
                run.checkpoint.display(),
                ck.agent,
                agent.name()
            )));
        }
        if let Some(state) = &ck.state {
            agent.load_checkpoint(state)?;
        }
    } else if agent.requires_meta_train() {
        let what = match agent.name() {
            "avg_rank" => "average-rank ranking; run `train --agent avg_rank` first".to_string(),
            other => format!("{other} checkpoint; run `train --agent {other}` first"),
        };
        return Err(ArenaError::MissingArtifact {
            path: run.checkpoint.clone(),
            what,
        });
    }
    let report = run_meta_test(agent.as_ref(), &md, &run.harness, &run.seeds)?;
    write_run_outputs(&report, &run.out)?;
    Ok(run.out.join("report.json"))
}

pub fn cmd_ablate(args: &RunArgs) -> Result<PathBuf> {
    let run = resolve_run(args, false)?;
    let kind = require(run.ablation, "kind")?;
    let ddqn: DdqnConfig = match run.agent {
        AgentConfig::Ddqn(c) => c,
        other => {
            return Err(ArenaError::Config(format!(
                "ablations are defined for ddqn, not `{}`",
                other.name()
            )))
        }
    };
    let md = load_manifest(&run.manifest)?;
    let report = run_ablation(kind, &ddqn, &md, &run.harness, &run.seeds)?;
    write_run_outputs(&report.full, &run.out.join("full"))?;
    write_run_outputs(&report.ablated, &run.out.join("ablated"))?;
    let summary = serde_json::json!({
        "kind": report.kind,
        "paired_margin": report.paired_margin(),
        "full_mean_alc": report.full.mean_alc(),
        "ablated_mean_alc": report.ablated.mean_alc(),
        "seeds": run.seeds,
        "schedule": report.full.schedule(),
    });
    let path = run.out.join("ablation.json");
    write_json(&path, &summary)?;
    Ok(path)
}

pub fn cmd_report(args: &ReportArgs) -> Result<PathBuf> {
    let reports = args
        .reports
        .iter()
        .map(|p| {
            let p = if p.is_dir() { p.join("report.json") } else { p.clone() };
            read_report_json(&p)
        })
        .collect::<Result<Vec<_>>>()?;
    let table = compare_reports(&reports)?;
    write_comparison(&table, &args.out)?;
    Ok(args.out.join("comparison.json"))
}

pub fn cmd_inspect(args: &InspectArgs) -> Result<String> {
    let trajs = read_trajectory_jsonl(&args.trajectory)?;
    let families: Vec<String> = match &args.manifest {
        Some(m) => load_manifest(&manifest_path(m))?
            .algorithms()
            .iter()
            .map(|a| a.family.clone())
            .collect(),
        None => Vec::new(),
    };
    let summaries: Vec<Value> = trajs
        .iter()
        .map(|t| {
            serde_json::json!({
                "agent": t.agent,
                "dataset": t.dataset,
                "seed": t.seed,
                "repeat": t.repeat,
                "alc": t.alc,
                "fixed_time": t.fixed_time,
                "summary": analyze_trajectory(t, &families),
            })
        })
        .collect();
    let text = serde_json::to_string_pretty(&summaries)?;
    if let Some(out) = &args.out {
        write_json(out, &summaries)?;
    }
    Ok(text)
}

/// Runs a parsed command; the returned string is printed on success.
pub fn run(cli: Cli) -> Result<String> {
    let shown = |p: PathBuf| p.display().to_string();
    match cli.command {
        Command::Generate(a) => cmd_generate(&a).map(shown),
        Command::Train(a) => cmd_train(&a).map(shown),
        Command::Evaluate(a) => cmd_evaluate(&a).map(shown),
        Command::Ablate(a) => cmd_ablate(&a).map(shown),
        Command::Report(a) => cmd_report(&a).map(shown),
        Command::InspectTrajectory(a) => cmd_inspect(&a),
    }
}

/// Single-line JSON error for stderr.
pub fn error_line(e: &ArenaError) -> String {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}
