//! Agent abstraction and the baseline policies.

use serde::{Deserialize, Serialize};

use crate::curvestore::MetaDataset;
use crate::env::{Action, Observation, RevealMode};
use crate::error::Result;

pub mod avgrank;
pub mod bos;
pub mod ddqn;
pub mod freezethaw;
pub mod randsearch;

pub use avgrank::AvgRankAgent;
pub use bos::{BosAgent, BosConfig};
pub use ddqn::{DdqnAgent, DdqnConfig};
pub use freezethaw::{FreezeThawAgent, FreezeThawConfig};
pub use randsearch::{RandSearchAgent, RandSearchConfig};

/// Full-curve access to the meta-training datasets plus the environment
/// settings a learning agent should train under.
#[derive(Clone, Copy, Debug)]
pub struct MetaTrainView<'a> {
    pub md: &'a MetaDataset,
    pub datasets: &'a [usize],
    /// `None` means a tenth of each dataset's budget.
    pub sigma: Option<f64>,
    pub reveal: RevealMode,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetaTrainOutcome {
    pub meta_trained: bool,
    pub episodes: usize,
    pub loss_trace: Vec<f64>,
}

pub trait Agent: Send {
    fn name(&self) -> &'static str;

    /// Whether `act` is meaningless before `meta_train`.
    fn requires_meta_train(&self) -> bool {
        false
    }

    fn is_meta_trained(&self) -> bool {
        false
    }

    /// Default is a no-op for agents that do not meta-learn.
    fn meta_train(&mut self, _view: &MetaTrainView<'_>) -> Result<MetaTrainOutcome> {
        Ok(MetaTrainOutcome::default())
    }

    /// Starts a new episode. `seed` drives any randomness in `act`.
    fn reset(&mut self, first: &Observation, seed: u64) -> Result<()>;

    fn act(&mut self, obs: &Observation) -> Result<Action>;

    /// Learned state, if any, as JSON.
    fn checkpoint(&self) -> Option<serde_json::Value> {
        None
    }

    fn load_checkpoint(&mut self, _value: &serde_json::Value) -> Result<()> {
        Ok(())
    }

    /// How many runs the harness averages per (dataset, seed).
    fn internal_repeats(&self) -> usize {
        1
    }

    fn clone_box(&self) -> Box<dyn Agent>;
}

impl Clone for Box<dyn Agent> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Serializable agent selection used by config files and the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AgentConfig {
    Ddqn(DdqnConfig),
    FreezeThaw(FreezeThawConfig),
    AvgRank,
    Bos(BosConfig),
    RandSearch(RandSearchConfig),
}

impl AgentConfig {
    pub const NAMES: [&'static str; 5] = ["ddqn", "freeze_thaw", "avg_rank", "bos", "rand_search"];

    /// Default configuration for a named agent.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "ddqn" => AgentConfig::Ddqn(DdqnConfig::default()),
            "freeze_thaw" => AgentConfig::FreezeThaw(FreezeThawConfig::default()),
            "avg_rank" => AgentConfig::AvgRank,
            "bos" => AgentConfig::Bos(BosConfig::default()),
            "rand_search" => AgentConfig::RandSearch(RandSearchConfig::default()),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            AgentConfig::Ddqn(_) => "ddqn",
            AgentConfig::FreezeThaw(_) => "freeze_thaw",
            AgentConfig::AvgRank => "avg_rank",
            AgentConfig::Bos(_) => "bos",
            AgentConfig::RandSearch(_) => "rand_search",
        }
    }

    pub fn build(&self) -> Box<dyn Agent> {
        match self {
            AgentConfig::Ddqn(c) => Box::new(DdqnAgent::new(c.clone())),
            AgentConfig::FreezeThaw(c) => Box::new(FreezeThawAgent::new(c.clone())),
            AgentConfig::AvgRank => Box::new(AvgRankAgent::new()),
            AgentConfig::Bos(c) => Box::new(BosAgent::new(c.clone())),
            AgentConfig::RandSearch(c) => Box::new(RandSearchAgent::new(c.clone())),
        }
    }
}

/// Lowest index among the maxima.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
