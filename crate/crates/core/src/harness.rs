//! Meta-train / meta-test orchestration and scoring.
//!
//! Every episode yields two scores: the any-time score (summed reward, i.e.
//! the area under the agent's learning curve over normalized time) and the
//! fixed-time score (best predicted-best test performance reached). Reports
//! aggregate them per seed and keep the worst seed, with the spread across
//! datasets for that seed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{Agent, DdqnAgent, DdqnConfig, MetaTrainOutcome, MetaTrainView};
use crate::curvestore::MetaDataset;
use crate::env::{Env, RevealMode, RewardConfig};
use crate::error::{ArenaError, Result};

/// Which part of the meta-test split to evaluate on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    All,
    /// First half of the meta-test datasets.
    Feedback,
    /// Second half; only touched on explicit request.
    Final,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    /// `None` means a tenth of each dataset's budget.
    pub sigma: Option<f64>,
    pub reveal: RevealMode,
    pub phase: Phase,
    pub workers: usize,
    pub train_seed: u64,
    /// Safety stop for agents that never exhaust the budget.
    pub max_steps: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            sigma: None,
            reveal: RevealMode::FullCurve,
            phase: Phase::All,
            workers: 1,
            train_seed: 0,
            max_steps: 100_000,
        }
    }
}

pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];

pub fn phase_datasets(md: &MetaDataset, phase: Phase) -> Vec<usize> {
    let test = &md.split().meta_test;
    let half = test.len().div_ceil(2);
    match phase {
        Phase::All => test.clone(),
        Phase::Feedback => test[..half].to_vec(),
        Phase::Final => test[half..].to_vec(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub t: usize,
    pub algo: usize,
    pub delta: f64,
    pub charged: f64,
    pub t_tilde: f64,
    pub reward: f64,
    pub revealed_train: f64,
    pub revealed_valid: f64,
    pub predicted_best: usize,
    pub predicted_test: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrajectory {
    pub agent: String,
    pub dataset: usize,
    pub seed: u64,
    pub repeat: usize,
    pub baseline_score: f64,
    pub total_budget: f64,
    pub steps: Vec<TrajectoryStep>,
    pub alc: f64,
    pub fixed_time: f64,
}

impl EpisodeTrajectory {
    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    pub fn total_charged(&self) -> f64 {
        self.steps.iter().map(|s| s.charged).sum()
    }
}

/// Area under the predicted-best test curve over normalized time, minus the
/// baseline, integrated as vertical rectangles between step times.
pub fn step_function_alc(traj: &EpisodeTrajectory) -> f64 {
    let mut area = 0.0;
    for (k, s) in traj.steps.iter().enumerate() {
        let end = traj.steps.get(k + 1).map_or(1.0, |n| n.t_tilde);
        area += (s.predicted_test - traj.baseline_score) * (end - s.t_tilde);
    }
    area
}

fn mix_seed(seed: u64, dataset: usize, repeat: usize) -> u64 {
    let mut x = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((dataset as u64) << 20)
        .wrapping_add(repeat as u64);
    x ^= x >> 33;
    x = x.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    x ^ (x >> 33)
}

/// Plays one episode to the end.
pub fn run_episode(
    agent: &mut dyn Agent,
    md: &MetaDataset,
    dataset: usize,
    cfg: &HarnessConfig,
    seed: u64,
    repeat: usize,
) -> Result<EpisodeTrajectory> {
    let reward_cfg = RewardConfig::for_dataset(md, dataset, cfg.sigma)?;
    let mut env = Env::new(md, dataset, reward_cfg, cfg.reveal)?;
    let mut obs = env.reset();
    agent.reset(&obs, mix_seed(seed, dataset, repeat))?;
    while !env.is_done() {
        if env.records().len() >= cfg.max_steps {
            return Err(ArenaError::Invariant(format!(
                "agent `{}` did not exhaust the budget within {} steps on dataset {dataset}",
                agent.name(),
                cfg.max_steps
            )));
        }
        let action = agent.act(&obs)?;
        obs = env.step(action)?.observation;
    }
    let steps: Vec<TrajectoryStep> = env
        .records()
        .iter()
        .zip(env.predicted_test_trace())
        .map(|(r, &test)| TrajectoryStep {
            t: r.t,
            algo: r.algo,
            delta: r.delta,
            charged: r.charged,
            t_tilde: r.t_tilde,
            reward: r.reward,
            revealed_train: r.revealed_train,
            revealed_valid: r.revealed_valid,
            predicted_best: r.predicted_best,
            predicted_test: test,
        })
        .collect();
    let alc = crate::env::accumulated_alc(&steps.iter().map(|s| s.reward).collect::<Vec<_>>());
    let fixed_time = steps
        .iter()
        .map(|s| s.predicted_test)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(EpisodeTrajectory {
        agent: agent.name().to_string(),
        dataset,
        seed,
        repeat,
        baseline_score: reward_cfg.baseline_score,
        total_budget: md.dataset(dataset)?.total_budget,
        steps,
        alc,
        fixed_time,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub agent: String,
    pub dataset: usize,
    pub seed: u64,
    pub alc: f64,
    pub fixed_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub mean_alc: f64,
    pub mean_fixed_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    /// Lowest per-seed mean over datasets.
    pub worst_mean: f64,
    pub worst_seed: u64,
    /// Standard deviation across datasets for the worst seed.
    pub std_across_datasets: f64,
    /// Mean over every (dataset, seed) entry.
    pub overall_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub per_seed: Vec<SeedSummary>,
    pub alc: MetricSummary,
    pub fixed_time: MetricSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub agent: String,
    pub meta_trained: bool,
    pub reveal: RevealMode,
    pub phase: Phase,
    pub entries: Vec<ReportEntry>,
    pub aggregate: Aggregate,
    #[serde(skip)]
    pub trajectories: Vec<EpisodeTrajectory>,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_std(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn summarize(entries: &[ReportEntry], seeds: &[u64], metric: fn(&ReportEntry) -> f64) -> MetricSummary {
    let mut worst: Option<(u64, f64, Vec<f64>)> = None;
    for &seed in seeds {
        let vals: Vec<f64> = entries.iter().filter(|e| e.seed == seed).map(metric).collect();
        let m = mean(&vals);
        if worst.as_ref().is_none_or(|w| m < w.1) {
            worst = Some((seed, m, vals));
        }
    }
    let (worst_seed, worst_mean, vals) = worst.unwrap_or((0, 0.0, Vec::new()));
    MetricSummary {
        worst_mean,
        worst_seed,
        std_across_datasets: population_std(&vals),
        overall_mean: mean(&entries.iter().map(metric).collect::<Vec<_>>()),
    }
}

/// Recomputes every aggregate from raw entries.
pub fn aggregate(entries: &[ReportEntry]) -> Aggregate {
    let seeds: Vec<u64> = entries
        .iter()
        .map(|e| e.seed)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let per_seed = seeds
        .iter()
        .map(|&seed| {
            let of_seed: Vec<&ReportEntry> = entries.iter().filter(|e| e.seed == seed).collect();
            SeedSummary {
                seed,
                mean_alc: mean(&of_seed.iter().map(|e| e.alc).collect::<Vec<_>>()),
                mean_fixed_time: mean(&of_seed.iter().map(|e| e.fixed_time).collect::<Vec<_>>()),
            }
        })
        .collect();
    Aggregate {
        per_seed,
        alc: summarize(entries, &seeds, |e| e.alc),
        fixed_time: summarize(entries, &seeds, |e| e.fixed_time),
    }
}

impl RunReport {
    fn from_parts(
        agent: &str,
        meta_trained: bool,
        cfg: &HarnessConfig,
        entries: Vec<ReportEntry>,
        trajectories: Vec<EpisodeTrajectory>,
    ) -> Self {
        RunReport {
            agent: agent.to_string(),
            meta_trained,
            reveal: cfg.reveal,
            phase: cfg.phase,
            aggregate: aggregate(&entries),
            entries,
            trajectories,
        }
    }

    /// Concatenates reports of the same agent, e.g. one per seed.
    pub fn merge(reports: Vec<RunReport>) -> Result<RunReport> {
        let mut it = reports.into_iter();
        let mut out = it
            .next()
            .ok_or_else(|| ArenaError::Config("nothing to merge".into()))?;
        for r in it {
            if r.agent != out.agent {
                return Err(ArenaError::Config(format!(
                    "cannot merge reports of `{}` and `{}`",
                    out.agent, r.agent
                )));
            }
            out.meta_trained &= r.meta_trained;
            out.entries.extend(r.entries);
            out.trajectories.extend(r.trajectories);
        }
        out.aggregate = aggregate(&out.entries);
        Ok(out)
    }

    /// The (dataset, seed) pairs in evaluation order.
    pub fn schedule(&self) -> Vec<(usize, u64)> {
        self.entries.iter().map(|e| (e.dataset, e.seed)).collect()
    }

    pub fn mean_alc(&self) -> f64 {
        mean(&self.entries.iter().map(|e| e.alc).collect::<Vec<_>>())
    }
}

/// One episode per (meta-test dataset, seed); agents with internal repeats
/// are averaged over their repeats.
pub fn run_meta_test(
    agent: &dyn Agent,
    md: &MetaDataset,
    cfg: &HarnessConfig,
    seeds: &[u64],
) -> Result<RunReport> {
    if agent.requires_meta_train() && !agent.is_meta_trained() {
        return Err(ArenaError::NotMetaTrained(agent.name().to_string()));
    }
    let datasets = phase_datasets(md, cfg.phase);
    let repeats = agent.internal_repeats();
    let jobs: Vec<(usize, u64, Box<dyn Agent>)> = datasets
        .iter()
        .flat_map(|&d| seeds.iter().map(move |&s| (d, s)))
        .map(|(d, s)| (d, s, agent.clone_box()))
        .collect();

    let run = |(d, s, mut a): (usize, u64, Box<dyn Agent>)| -> Result<Vec<EpisodeTrajectory>> {
        (0..repeats)
            .map(|r| run_episode(a.as_mut(), md, d, cfg, s, r))
            .collect()
    };
    let results: Vec<Result<Vec<EpisodeTrajectory>>> = if cfg.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| ArenaError::Config(e.to_string()))?;
        pool.install(|| jobs.into_par_iter().map(run).collect())
    } else {
        jobs.into_iter().map(run).collect()
    };

    let mut entries = Vec::new();
    let mut trajectories = Vec::new();
    for res in results {
        let trajs = res?;
        let first = &trajs[0];
        entries.push(ReportEntry {
            agent: agent.name().to_string(),
            dataset: first.dataset,
            seed: first.seed,
            alc: mean(&trajs.iter().map(|t| t.alc).collect::<Vec<_>>()),
            fixed_time: mean(&trajs.iter().map(|t| t.fixed_time).collect::<Vec<_>>()),
        });
        trajectories.extend(trajs);
    }
    Ok(RunReport::from_parts(
        agent.name(),
        agent.is_meta_trained(),
        cfg,
        entries,
        trajectories,
    ))
}

/// Meta-trains on the meta-training split only.
pub fn run_meta_train(
    agent: &mut dyn Agent,
    md: &MetaDataset,
    cfg: &HarnessConfig,
) -> Result<MetaTrainOutcome> {
    let datasets = &md.split().meta_train;
    if datasets.is_empty() {
        return Err(ArenaError::Config("meta-train split is empty".into()));
    }
    agent.meta_train(&MetaTrainView {
        md,
        datasets,
        sigma: cfg.sigma,
        reveal: cfg.reveal,
        seed: cfg.train_seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationKind {
    /// Randomly initialized networks, no meta-training.
    NoMetaTrain,
    /// Observations carry only the final anchor of each curve.
    LastPointOnly,
}

impl std::str::FromStr for AblationKind {
    type Err = ArenaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no_meta_train" => Ok(AblationKind::NoMetaTrain),
            "last_point_only" => Ok(AblationKind::LastPointOnly),
            other => Err(ArenaError::Config(format!("unknown ablation kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub kind: AblationKind,
    pub full: RunReport,
    pub ablated: RunReport,
    pub full_training: MetaTrainOutcome,
    pub ablated_training: MetaTrainOutcome,
}

impl AblationReport {
    /// Mean of per-episode (full - ablated) ALC differences.
    pub fn paired_margin(&self) -> f64 {
        let diffs: Vec<f64> = self
            .full
            .entries
            .iter()
            .zip(&self.ablated.entries)
            .map(|(f, a)| f.alc - a.alc)
            .collect();
        mean(&diffs)
    }
}

/// Full DDQN against one ablated variant on identical (dataset, seed)
/// schedules.
pub fn run_ablation(
    kind: AblationKind,
    ddqn: &DdqnConfig,
    md: &MetaDataset,
    cfg: &HarnessConfig,
    seeds: &[u64],
) -> Result<AblationReport> {
    let full_cfg = HarnessConfig {
        reveal: RevealMode::FullCurve,
        ..cfg.clone()
    };
    let mut full_agent = DdqnAgent::new(ddqn.clone());
    let full_training = run_meta_train(&mut full_agent, md, &full_cfg)?;
    let full = run_meta_test(&full_agent, md, &full_cfg, seeds)?;

    let (ablated, ablated_training) = match kind {
        AblationKind::NoMetaTrain => {
            let per_seed = seeds
                .iter()
                .map(|&s| {
                    let fresh = DdqnAgent::new(DdqnConfig {
                        seed: s,
                        ..ddqn.clone()
                    });
                    run_meta_test(&fresh, md, &full_cfg, &[s])
                })
                .collect::<Result<Vec<_>>>()?;
            // restore dataset-major order to match the full run
            let mut merged = RunReport::merge(per_seed)?;
            let order: Vec<(usize, u64)> = full.schedule();
            merged.entries.sort_by_key(|e| {
                order
                    .iter()
                    .position(|&(d, s)| d == e.dataset && s == e.seed)
                    .unwrap_or(usize::MAX)
            });
            (merged, MetaTrainOutcome::default())
        }
        AblationKind::LastPointOnly => {
            let lp_cfg = HarnessConfig {
                reveal: RevealMode::LastPointOnly,
                ..cfg.clone()
            };
            let mut agent = DdqnAgent::new(ddqn.clone());
            let training = run_meta_train(&mut agent, md, &lp_cfg)?;
            (run_meta_test(&agent, md, &lp_cfg, seeds)?, training)
        }
    };
    Ok(AblationReport {
        kind,
        full,
        ablated,
        full_training,
        ablated_training,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub step: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionSummary {
    pub transitions: Vec<Transition>,
    pub family_occupancy: BTreeMap<String, usize>,
    pub switch_count: usize,
}

/// Changes of the trained algorithm between consecutive steps, plus how many
/// steps each algorithm family was trained. `families[j]` labels algorithm
/// `j`; missing labels count as "unknown".
pub fn analyze_trajectory(traj: &EpisodeTrajectory, families: &[String]) -> TransitionSummary {
    let transitions: Vec<Transition> = traj
        .steps
        .windows(2)
        .filter(|w| w[0].algo != w[1].algo)
        .map(|w| Transition {
            step: w[1].t,
            from: w[0].algo,
            to: w[1].algo,
        })
        .collect();
    let mut family_occupancy = BTreeMap::new();
    for s in &traj.steps {
        let fam = families
            .get(s.algo)
            .cloned()
            .unwrap_or_else(|| "unknown".to_string());
        *family_occupancy.entry(fam).or_insert(0) += 1;
    }
    TransitionSummary {
        switch_count: transitions.len(),
        transitions,
        family_occupancy,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub agent: String,
    pub meta_trained: bool,
    pub alc_worst_mean: f64,
    pub alc_std: f64,
    pub fixed_time_worst_mean: f64,
    pub fixed_time_std: f64,
    pub alc_overall_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinCount {
    pub agent: String,
    pub opponent: String,
    /// Datasets where `agent`'s seed-averaged ALC is strictly higher.
    pub wins: usize,
    pub datasets: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub wins: Vec<WinCount>,
}

fn per_dataset_alc(report: &RunReport) -> BTreeMap<usize, f64> {
    let mut acc: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for e in &report.entries {
        acc.entry(e.dataset).or_default().push(e.alc);
    }
    acc.into_iter().map(|(d, v)| (d, mean(&v))).collect()
}

pub fn compare_reports(reports: &[RunReport]) -> Result<ComparisonTable> {
    if reports.is_empty() {
        return Err(ArenaError::Config("no reports to compare".into()));
    }
    let per_agent: Vec<BTreeMap<usize, f64>> = reports.iter().map(per_dataset_alc).collect();
    let reference: BTreeSet<usize> = per_agent[0].keys().copied().collect();
    for (r, m) in reports.iter().zip(&per_agent) {
        let ds: BTreeSet<usize> = m.keys().copied().collect();
        if ds != reference {
            return Err(ArenaError::Config(format!(
                "report for `{}` covers datasets {ds:?}, expected {reference:?}",
                r.agent
            )));
        }
    }
    let rows = reports
        .iter()
        .map(|r| ComparisonRow {
            agent: r.agent.clone(),
            meta_trained: r.meta_trained,
            alc_worst_mean: r.aggregate.alc.worst_mean,
            alc_std: r.aggregate.alc.std_across_datasets,
            fixed_time_worst_mean: r.aggregate.fixed_time.worst_mean,
            fixed_time_std: r.aggregate.fixed_time.std_across_datasets,
            alc_overall_mean: r.aggregate.alc.overall_mean,
        })
        .collect();
    let mut wins = Vec::new();
    for (i, a) in reports.iter().enumerate() {
        for (j, b) in reports.iter().enumerate() {
            if i == j {
                continue;
            }
            let w = reference
                .iter()
                .filter(|d| per_agent[i][d] > per_agent[j][d])
                .count();
            wins.push(WinCount {
                agent: a.agent.clone(),
                opponent: b.agent.clone(),
                wins: w,
                datasets: reference.len(),
            });
        }
    }
    Ok(ComparisonTable { rows, wins })
}

// ---------------------------------------------------------------------------
// Output files

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| ArenaError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| ArenaError::io(path, e))
}

#[derive(Serialize, Deserialize)]
struct TrajectoryLine {
    agent: String,
    dataset: usize,
    seed: u64,
    repeat: usize,
    baseline_score: f64,
    total_budget: f64,
    #[serde(flatten)]
    step: TrajectoryStep,
}

pub fn write_trajectory_jsonl<W: Write>(trajs: &[&EpisodeTrajectory], mut out: W) -> Result<()> {
    for traj in trajs {
        for step in &traj.steps {
            let line = TrajectoryLine {
                agent: traj.agent.clone(),
                dataset: traj.dataset,
                seed: traj.seed,
                repeat: traj.repeat,
                baseline_score: traj.baseline_score,
                total_budget: traj.total_budget,
                step: step.clone(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")
                .map_err(|e| ArenaError::io("<trajectory>", e))?;
        }
    }
    Ok(())
}

/// Rebuilds trajectories from a JSONL file, one per (agent, dataset, seed,
/// repeat) in file order.
pub fn read_trajectory_jsonl(path: &Path) -> Result<Vec<EpisodeTrajectory>> {
    let file = fs::File::open(path).map_err(|e| ArenaError::io(path, e))?;
    let mut out: Vec<EpisodeTrajectory> = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| ArenaError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let l: TrajectoryLine = serde_json::from_str(&line)?;
        let same = out.last().is_some_and(|t| {
            t.agent == l.agent && t.dataset == l.dataset && t.seed == l.seed && t.repeat == l.repeat
        });
        if !same {
            out.push(EpisodeTrajectory {
                agent: l.agent,
                dataset: l.dataset,
                seed: l.seed,
                repeat: l.repeat,
                baseline_score: l.baseline_score,
                total_budget: l.total_budget,
                steps: Vec::new(),
                alc: 0.0,
                fixed_time: f64::NEG_INFINITY,
            });
        }
        let t = out.last_mut().expect("pushed above");
        t.alc += l.step.reward;
        t.fixed_time = t.fixed_time.max(l.step.predicted_test);
        t.steps.push(l.step);
    }
    Ok(out)
}

/// Writes `report.csv`, `report.json`, `trajectories/*.jsonl` and
/// `plots/*.csv` under `out`.
pub fn write_run_outputs(report: &RunReport, out: &Path) -> Result<()> {
    create_dir(out)?;
    let mut csv = String::from("agent,dataset,seed,alc,fixed_time\n");
    for e in &report.entries {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            e.agent, e.dataset, e.seed, e.alc, e.fixed_time
        ));
    }
    write_text(&out.join("report.csv"), &csv)?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    write_text(&out.join("report.json"), &json)?;

    let traj_dir = out.join("trajectories");
    let plot_dir = out.join("plots");
    create_dir(&traj_dir)?;
    create_dir(&plot_dir)?;
    let mut grouped: BTreeMap<(usize, u64), Vec<&EpisodeTrajectory>> = BTreeMap::new();
    for t in &report.trajectories {
        grouped.entry((t.dataset, t.seed)).or_default().push(t);
    }
    for ((d, s), trajs) in &grouped {
        let path = traj_dir.join(format!("{}_d{d}_s{s}.jsonl", report.agent));
        let file = fs::File::create(&path).map_err(|e| ArenaError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        write_trajectory_jsonl(trajs, &mut w)?;
        w.flush().map_err(|e| ArenaError::io(&path, e))?;

        let first = trajs[0];
        let mut series = String::from("x,y\n");
        series.push_str(&format!("0,{}\n", first.baseline_score));
        for step in &first.steps {
            series.push_str(&format!("{},{}\n", step.t_tilde, step.predicted_test));
        }
        write_text(
            &plot_dir.join(format!("anytime_{}_d{d}_s{s}.csv", report.agent)),
            &series,
        )?;
    }
    let mut bars = String::from("x,y\n");
    for (d, v) in per_dataset_alc(report) {
        bars.push_str(&format!("{d},{v}\n"));
    }
    write_text(&plot_dir.join(format!("alc_by_dataset_{}.csv", report.agent)), &bars)
}

pub fn read_report_json(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path).map_err(|e| ArenaError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_comparison(table: &ComparisonTable, out: &Path) -> Result<()> {
    create_dir(out)?;
    let plot_dir = out.join("plots");
    create_dir(&plot_dir)?;
    let mut csv = String::from(
        "agent,meta_trained,alc_worst_mean,alc_std,fixed_time_worst_mean,fixed_time_std,alc_overall_mean\n",
    );
    let mut bar_alc = String::from("x,y\n");
    let mut bar_fixed = String::from("x,y\n");
    for r in &table.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.agent,
            r.meta_trained,
            r.alc_worst_mean,
            r.alc_std,
            r.fixed_time_worst_mean,
            r.fixed_time_std,
            r.alc_overall_mean
        ));
        bar_alc.push_str(&format!("{},{}\n", r.agent, r.alc_worst_mean));
        bar_fixed.push_str(&format!("{},{}\n", r.agent, r.fixed_time_worst_mean));
    }
    write_text(&out.join("comparison.csv"), &csv)?;
    let mut wins = String::from("agent,opponent,wins,datasets\n");
    for w in &table.wins {
        wins.push_str(&format!("{},{},{},{}\n", w.agent, w.opponent, w.wins, w.datasets));
    }
    write_text(&out.join("wins.csv"), &wins)?;
    let mut json = serde_json::to_string_pretty(table)?;
    json.push('\n');
    write_text(&out.join("comparison.json"), &json)?;
    write_text(&plot_dir.join("bar_alc.csv"), &bar_alc)?;
    write_text(&plot_dir.join("bar_fixed_time.csv"), &bar_fixed)
}
