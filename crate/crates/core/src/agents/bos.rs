//! Best-on-samples: probe every algorithm with the same small budget, then
//! spend everything left on the one that scored best on validation.

use serde::{Deserialize, Serialize};

use super::{argmax, Agent};
use crate::env::{Action, Observation};
use crate::error::{ArenaError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BosConfig {
    /// Probe budget per algorithm; `None` means `T / (5 * n_algorithms)`.
    pub alpha: Option<f64>,
}

impl BosConfig {
    pub fn alpha_for(&self, obs: &Observation) -> f64 {
        self.alpha
            .unwrap_or(obs.total_budget / (5.0 * obs.n_algorithms() as f64))
    }
}

/// Stateless policy: the phase is read off the observation.
pub fn bos_act(obs: &Observation, alpha: f64) -> Result<Action> {
    let n = obs.n_algorithms();
    if !(alpha > 0.0) || alpha * n as f64 >= obs.total_budget {
        return Err(ArenaError::Config(format!(
            "probe budget {alpha} x {n} algorithms must be positive and below the total budget {}",
            obs.total_budget
        )));
    }
    let predicted = obs.best_revealed_valid();
    if let Some(next) = (0..n).find(|&j| obs.revealed[j].is_empty()) {
        return Ok(Action::new(next, alpha, predicted));
    }
    let probe_scores: Vec<f64> = (0..n).map(|j| obs.revealed[j][0].valid).collect();
    let pick = argmax(&probe_scores);
    Ok(Action::new(pick, obs.remaining_budget, predicted))
}

#[derive(Clone, Debug)]
pub struct BosAgent {
    cfg: BosConfig,
}

impl BosAgent {
    pub fn new(cfg: BosConfig) -> Self {
        BosAgent { cfg }
    }
}

impl Agent for BosAgent {
    fn name(&self) -> &'static str {
        "bos"
    }

    fn reset(&mut self, first: &Observation, _seed: u64) -> Result<()> {
        let alpha = self.cfg.alpha_for(first);
        if alpha * first.n_algorithms() as f64 >= first.total_budget {
            return Err(ArenaError::Config(format!(
                "probing {} algorithms with {alpha} would exhaust the budget {}",
                first.n_algorithms(),
                first.total_budget
            )));
        }
        Ok(())
    }

    fn act(&mut self, obs: &Observation) -> Result<Action> {
        bos_act(obs, self.cfg.alpha_for(obs))
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}
