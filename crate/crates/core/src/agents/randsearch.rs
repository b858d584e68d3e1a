use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Agent;
use crate::env::{Action, Observation};
use crate::error::{ArenaError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandSearchConfig {
    /// Smallest increment as a fraction of the dataset budget.
    pub delta_min_frac: f64,
    pub delta_max_frac: f64,
    /// Runs averaged per (dataset, seed) by the harness.
    pub repeats: usize,
}

impl Default for RandSearchConfig {
    fn default() -> Self {
        RandSearchConfig {
            delta_min_frac: 1.0 / 50.0,
            delta_max_frac: 1.0 / 5.0,
            repeats: 5,
        }
    }
}

/// Uniform algorithm, uniform increment in `[delta_min, delta_max]`.
pub fn randsearch_act<R: Rng>(
    obs: &Observation,
    rng: &mut R,
    delta_min: f64,
    delta_max: f64,
) -> Result<Action> {
    if !(delta_min > 0.0) || !(delta_min <= delta_max) {
        return Err(ArenaError::Config(format!(
            "need 0 < delta_min <= delta_max, got [{delta_min}, {delta_max}]"
        )));
    }
    let algo = rng.random_range(0..obs.n_algorithms());
    let delta = if delta_min == delta_max {
        delta_min
    } else {
        rng.random_range(delta_min..=delta_max)
    };
    Ok(Action::new(algo, delta, obs.best_revealed_valid()))
}

#[derive(Clone, Debug)]
pub struct RandSearchAgent {
    cfg: RandSearchConfig,
    rng: ChaCha8Rng,
}

impl RandSearchAgent {
    pub fn new(cfg: RandSearchConfig) -> Self {
        RandSearchAgent {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }
}

impl Agent for RandSearchAgent {
    fn name(&self) -> &'static str {
        "rand_search"
    }

    fn reset(&mut self, _first: &Observation, seed: u64) -> Result<()> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(())
    }

    fn act(&mut self, obs: &Observation) -> Result<Action> {
        let t = obs.total_budget;
        randsearch_act(
            obs,
            &mut self.rng,
            t * self.cfg.delta_min_frac,
            t * self.cfg.delta_max_frac,
        )
    }

    fn internal_repeats(&self) -> usize {
        self.cfg.repeats.max(1)
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}
