//! Average-rank meta-learner: ranks algorithms on every meta-training
//! dataset by their final validation score and always trains the best
//! average-ranked one with the whole budget.

use serde::{Deserialize, Serialize};

use super::{Agent, MetaTrainOutcome, MetaTrainView};
use crate::curvestore::{rank_scores, MetaDataset, Split};
use crate::env::{Action, Observation};
use crate::error::{ArenaError, Result};

/// Mean rank per algorithm over a table of per-dataset rank vectors.
pub fn average_ranks(table: &[Vec<usize>]) -> Vec<f64> {
    let n = table.first().map_or(0, Vec::len);
    let mut sums = vec![0.0; n];
    for ranks in table {
        for (s, &r) in sums.iter_mut().zip(ranks) {
            *s += r as f64;
        }
    }
    sums.iter().map(|s| s / table.len() as f64).collect()
}

/// Algorithm with the lowest average rank, lowest index on ties.
pub fn top_ranked(avg: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in avg.iter().enumerate() {
        if v < avg[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvgRanking {
    pub average_ranks: Vec<f64>,
    pub selected: usize,
}

pub fn avgrank_meta_train(md: &MetaDataset, datasets: &[usize]) -> Result<AvgRanking> {
    if datasets.is_empty() {
        return Err(ArenaError::Config("average ranking needs meta-training datasets".into()));
    }
    let table: Vec<Vec<usize>> = datasets
        .iter()
        .map(|&d| {
            md.dataset(d)?;
            let finals: Vec<f64> = (0..md.n_algorithms())
                .map(|a| md.curve(d, a, Split::Valid).last().score)
                .collect();
            Ok(rank_scores(&finals))
        })
        .collect::<Result<_>>()?;
    let average_ranks = average_ranks(&table);
    let selected = top_ranked(&average_ranks);
    Ok(AvgRanking {
        average_ranks,
        selected,
    })
}

pub fn avgrank_act(ranking: &AvgRanking, obs: &Observation) -> Action {
    Action::new(ranking.selected, obs.remaining_budget, ranking.selected)
}

#[derive(Clone, Debug, Default)]
pub struct AvgRankAgent {
    ranking: Option<AvgRanking>,
}

impl AvgRankAgent {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ranking(&self) -> Option<&AvgRanking> {
        self.ranking.as_ref()
    }
}

impl Agent for AvgRankAgent {
    fn name(&self) -> &'static str {
        "avg_rank"
    }

    fn requires_meta_train(&self) -> bool {
        true
    }

    fn is_meta_trained(&self) -> bool {
        self.ranking.is_some()
    }

    fn meta_train(&mut self, view: &MetaTrainView<'_>) -> Result<MetaTrainOutcome> {
        self.ranking = Some(avgrank_meta_train(view.md, view.datasets)?);
        Ok(MetaTrainOutcome {
            meta_trained: true,
            episodes: 0,
            loss_trace: Vec::new(),
        })
    }

    fn reset(&mut self, _first: &Observation, _seed: u64) -> Result<()> {
        if self.ranking.is_none() {
            return Err(ArenaError::NotMetaTrained("avg_rank".into()));
        }
        Ok(())
    }

    fn act(&mut self, obs: &Observation) -> Result<Action> {
        let ranking = self
            .ranking
            .as_ref()
            .ok_or_else(|| ArenaError::NotMetaTrained("avg_rank".into()))?;
        if ranking.average_ranks.len() != obs.n_algorithms() {
            return Err(ArenaError::Shape(format!(
                "ranking covers {} algorithms, episode has {}",
                ranking.average_ranks.len(),
                obs.n_algorithms()
            )));
        }
        Ok(avgrank_act(ranking, obs))
    }

    fn checkpoint(&self) -> Option<serde_json::Value> {
        self.ranking.as_ref().and_then(|r| serde_json::to_value(r).ok())
    }

    fn load_checkpoint(&mut self, value: &serde_json::Value) -> Result<()> {
        self.ranking = Some(serde_json::from_value(value.clone())?);
        Ok(())
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}
