//! The reveal-game environment.
//!
//! An episode runs on one dataset. Each step the agent names an algorithm,
//! a budget increment, and the algorithm it currently believes is best. The
//! environment charges the budget, reveals the train/valid scores of the
//! trained algorithm at its new cumulative cost, and pays a reward equal to
//! the test improvement of the predicted-best algorithm weighted by the
//! normalized remaining budget. Test curves never leave this module except
//! through the reward and the harness-only [`Env::predicted_test_trace`].

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::curvestore::{AlgorithmSpec, CurveKind, MetaDataset, Split};
use crate::error::{ArenaError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub algo: usize,
    pub delta: f64,
    pub predicted_best: usize,
}

impl Action {
    pub fn new(algo: usize, delta: f64, predicted_best: usize) -> Self {
        Action {
            algo,
            delta,
            predicted_best,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub sigma: f64,
    /// Reference test performance before anything has been trained.
    pub baseline_score: f64,
}

impl RewardConfig {
    pub fn new(sigma: f64, baseline_score: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(ArenaError::Config(format!("sigma must be positive, got {sigma}")));
        }
        Ok(RewardConfig {
            sigma,
            baseline_score,
        })
    }

    /// Reward settings for one dataset; `sigma = None` means a tenth of the
    /// dataset's total budget.
    pub fn for_dataset(md: &MetaDataset, dataset: usize, sigma: Option<f64>) -> Result<Self> {
        let total = md.dataset(dataset)?.total_budget;
        Self::new(sigma.unwrap_or(total / 10.0), md.baseline_score())
    }
}

/// What a trained algorithm reveals to the agent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevealMode {
    /// Scores at the algorithm's current cumulative cost.
    #[default]
    FullCurve,
    /// Only the final anchor of each train/valid curve, whatever was paid.
    LastPointOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevealedPoint {
    pub cost: f64,
    pub train: f64,
    pub valid: f64,
}

/// Everything an agent may see. Holds no value derived from a test curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observation {
    pub dataset_name: String,
    pub meta_features: BTreeMap<String, f64>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub curve_kind: CurveKind,
    pub baseline_score: f64,
    pub total_budget: f64,
    pub remaining_budget: f64,
    pub t_tilde: f64,
    pub step: usize,
    /// Cumulative budget spent on each algorithm.
    pub spent: Vec<f64>,
    /// Per algorithm, the points revealed so far in query order.
    pub revealed: Vec<Vec<RevealedPoint>>,
    pub last_action: Option<Action>,
}

impl Observation {
    pub fn n_algorithms(&self) -> usize {
        self.algorithms.len()
    }

    pub fn latest_valid(&self, algo: usize) -> Option<f64> {
        self.revealed[algo].last().map(|p| p.valid)
    }

    pub fn best_valid(&self, algo: usize) -> Option<f64> {
        self.revealed[algo]
            .iter()
            .map(|p| p.valid)
            .reduce(f64::max)
    }

    pub fn total_spent(&self) -> f64 {
        self.total_budget - self.remaining_budget
    }

    /// Algorithm with the highest validation score at its current cost,
    /// lowest index on ties, 0 when nothing has been revealed.
    pub fn best_revealed_valid(&self) -> usize {
        let mut best: Option<(usize, f64)> = None;
        for algo in 0..self.n_algorithms() {
            if let Some(v) = self.latest_valid(algo) {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((algo, v));
                }
            }
        }
        best.map_or(0, |(a, _)| a)
    }
}

/// One line of the per-step episode log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub algo: usize,
    pub delta: f64,
    pub charged: f64,
    pub t_tilde: f64,
    pub reward: f64,
    pub revealed_train: f64,
    pub revealed_valid: f64,
    pub predicted_best: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub charged: f64,
}

/// Log-scaled fraction of the budget spent:
/// `ln(1 + spent/sigma) / ln(1 + total/sigma)`.
pub fn normalized_time(spent: f64, total: f64, sigma: f64) -> f64 {
    (spent / sigma).ln_1p() / (total / sigma).ln_1p()
}

/// Test improvement of the predicted best, weighted by remaining normalized
/// time. Negative when the prediction got worse.
pub fn reward(prev_best_test: f64, new_best_test: f64, t_tilde: f64) -> f64 {
    (new_best_test - prev_best_test) * (1.0 - t_tilde)
}

/// Area under the agent's any-time learning curve: the episode's summed reward.
pub fn accumulated_alc(rewards: &[f64]) -> f64 {
    rewards.iter().sum()
}

pub struct Env<'a> {
    md: &'a MetaDataset,
    dataset: usize,
    cfg: RewardConfig,
    mode: RevealMode,
    total: f64,
    remaining: f64,
    prev_best_test: f64,
    done: bool,
    obs: Observation,
    records: Vec<StepRecord>,
    predicted_test: Vec<f64>,
}

impl<'a> Env<'a> {
    pub fn new(
        md: &'a MetaDataset,
        dataset: usize,
        cfg: RewardConfig,
        mode: RevealMode,
    ) -> Result<Self> {
        let spec = md.dataset(dataset)?;
        let n = md.n_algorithms();
        let obs = Observation {
            dataset_name: spec.name.clone(),
            meta_features: spec.meta_features.clone(),
            algorithms: md.algorithms().to_vec(),
            curve_kind: md.curve_kind(),
            baseline_score: md.baseline_score(),
            total_budget: spec.total_budget,
            remaining_budget: spec.total_budget,
            t_tilde: 0.0,
            step: 0,
            spent: vec![0.0; n],
            revealed: vec![Vec::new(); n],
            last_action: None,
        };
        Ok(Env {
            md,
            dataset,
            cfg,
            mode,
            total: spec.total_budget,
            remaining: spec.total_budget,
            prev_best_test: cfg.baseline_score,
            done: false,
            obs,
            records: Vec::new(),
            predicted_test: Vec::new(),
        })
    }

    /// Restarts the episode and returns the initial observation.
    pub fn reset(&mut self) -> Observation {
        let n = self.md.n_algorithms();
        self.remaining = self.total;
        self.prev_best_test = self.cfg.baseline_score;
        self.done = false;
        self.records.clear();
        self.predicted_test.clear();
        self.obs.remaining_budget = self.total;
        self.obs.t_tilde = 0.0;
        self.obs.step = 0;
        self.obs.spent = vec![0.0; n];
        self.obs.revealed = vec![Vec::new(); n];
        self.obs.last_action = None;
        self.obs.clone()
    }

    pub fn observation(&self) -> &Observation {
        &self.obs
    }

    pub fn dataset(&self) -> usize {
        self.dataset
    }

    pub fn reward_config(&self) -> RewardConfig {
        self.cfg
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    /// Test score of the predicted-best algorithm after each step. Only the
    /// harness reads this; agents never see it.
    pub fn predicted_test_trace(&self) -> &[f64] {
        &self.predicted_test
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.done {
            return Err(ArenaError::EpisodeDone);
        }
        let n = self.md.n_algorithms();
        if action.algo >= n || action.predicted_best >= n {
            return Err(ArenaError::InvalidAction(format!(
                "algorithm indices ({}, {}) out of range for {n} algorithms",
                action.algo, action.predicted_best
            )));
        }
        if !(action.delta > 0.0) || !action.delta.is_finite() {
            return Err(ArenaError::InvalidAction(format!(
                "budget increment must be positive and finite, got {}",
                action.delta
            )));
        }

        let j = action.algo;
        let before = self.obs.spent[j];
        let mut charged = action.delta.min(self.remaining);
        let mut after = before + charged;
        if self.md.curve_kind() == CurveKind::SizeIndexed {
            // Snap down onto the anchor grid while still inside it; below
            // one grid step the request is charged as-is.
            let grid = self.md.curve(self.dataset, j, Split::Valid).anchors();
            let last = grid[grid.len() - 1].cost;
            if after < last {
                let idx = grid.partition_point(|a| a.cost <= after);
                if idx > 0 && grid[idx - 1].cost > before {
                    after = grid[idx - 1].cost;
                    charged = after - before;
                }
            }
        }

        if charged >= self.remaining {
            charged = self.remaining;
            self.remaining = 0.0;
        } else {
            // Report the exact drop in remaining budget so that the charges
            // of an episode telescope to the total without rounding.
            let left = self.remaining - charged;
            charged = self.remaining - left;
            self.remaining = left;
        }
        self.obs.spent[j] = after;
        self.done = self.remaining == 0.0;

        let baseline = self.cfg.baseline_score;
        let (train, valid) = match self.mode {
            RevealMode::FullCurve => (
                self.md.curve(self.dataset, j, Split::Train).query(after, baseline),
                self.md.curve(self.dataset, j, Split::Valid).query(after, baseline),
            ),
            RevealMode::LastPointOnly => (
                self.md.curve(self.dataset, j, Split::Train).last().score,
                self.md.curve(self.dataset, j, Split::Valid).last().score,
            ),
        };
        self.obs.revealed[j].push(RevealedPoint {
            cost: after,
            train,
            valid,
        });

        let spent_total = if self.done {
            self.total
        } else {
            self.total - self.remaining
        };
        let t_tilde = normalized_time(spent_total, self.total, self.cfg.sigma);
        let p = action.predicted_best;
        let new_best_test = self
            .md
            .curve(self.dataset, p, Split::Test)
            .query(self.obs.spent[p], baseline);
        let r = reward(self.prev_best_test, new_best_test, t_tilde);
        self.prev_best_test = new_best_test;

        self.obs.remaining_budget = self.remaining;
        self.obs.t_tilde = t_tilde;
        self.obs.step += 1;
        self.obs.last_action = Some(action);

        self.records.push(StepRecord {
            t: self.obs.step,
            algo: j,
            delta: action.delta,
            charged,
            t_tilde,
            reward: r,
            revealed_train: train,
            revealed_valid: valid,
            predicted_best: p,
        });
        self.predicted_test.push(new_best_test);

        Ok(StepResult {
            observation: self.obs.clone(),
            reward: r,
            done: self.done,
            charged,
        })
    }
}

/// Writes one JSON object per step.
pub fn write_step_log<W: Write>(records: &[StepRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
