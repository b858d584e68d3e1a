//! Double deep Q-network baseline.
//!
//! The network only picks which algorithm to train. Budget follows a fixed
//! doubling rule (a fresh algorithm gets `initial_budget_frac * T`, a
//! resumed one gets as much again as it has already consumed) and the
//! predicted best is the algorithm with the highest current validation
//! score.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, Agent, MetaTrainOutcome, MetaTrainView};
use crate::env::{Action, Env, Observation, RewardConfig};
use crate::error::{ArenaError, Result};
use crate::valuenet::{copy_params, opt_step, Adam, Gradients, Mlp, MlpCheckpoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DdqnConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Optimizer steps between target-network syncs.
    pub target_sync: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of training episodes over which epsilon decays linearly.
    pub epsilon_decay_frac: f64,
    /// Exploration rate while evaluating.
    pub eval_epsilon: f64,
    /// Budget for an algorithm's first slice, as a fraction of `T`.
    pub initial_budget_frac: f64,
    pub episodes: usize,
    pub learning_rate: f64,
    /// Seeds network initialization and the meta-training loop.
    pub seed: u64,
}

impl Default for DdqnConfig {
    fn default() -> Self {
        DdqnConfig {
            hidden: vec![64, 64],
            gamma: 0.99,
            replay_capacity: 10_000,
            batch_size: 32,
            target_sync: 100,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_frac: 0.5,
            eval_epsilon: 0.05,
            initial_budget_frac: 0.01,
            episodes: 300,
            learning_rate: 1e-3,
            seed: 0,
        }
    }
}

impl DdqnConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(ArenaError::Config(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return Err(ArenaError::Config(format!(
                "replay capacity {} must be at least the batch size {} (> 0)",
                self.replay_capacity, self.batch_size
            )));
        }
        if self.target_sync == 0 {
            return Err(ArenaError::Config("target_sync must be positive".into()));
        }
        if !(self.initial_budget_frac > 0.0) {
            return Err(ArenaError::Config("initial_budget_frac must be positive".into()));
        }
        Ok(())
    }

    pub fn layer_sizes(&self, n_algorithms: usize) -> Vec<usize> {
        let mut sizes = vec![state_size(n_algorithms)];
        sizes.extend(&self.hidden);
        sizes.push(n_algorithms);
        sizes
    }

    /// Linear decay from `epsilon_start` to `epsilon_end` over the first
    /// `epsilon_decay_frac` of `episodes`.
    pub fn epsilon_at(&self, episode: usize) -> f64 {
        let horizon = (self.episodes as f64 * self.epsilon_decay_frac).max(1.0);
        let frac = (episode as f64 / horizon).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

pub fn state_size(n_algorithms: usize) -> usize {
    4 * n_algorithms + 2
}

/// Per algorithm: latest valid score, best valid score, spent / T, trained
/// flag; then normalized time and remaining / T. Untrained algorithms
/// report the baseline score.
pub fn ddqn_encode(obs: &Observation) -> Vec<f64> {
    let n = obs.n_algorithms();
    let t = obs.total_budget;
    let mut v = Vec::with_capacity(state_size(n));
    for j in 0..n {
        let last = obs.latest_valid(j);
        v.push(last.unwrap_or(obs.baseline_score));
        v.push(obs.best_valid(j).unwrap_or(obs.baseline_score));
        v.push(obs.spent[j] / t);
        v.push(if last.is_some() { 1.0 } else { 0.0 });
    }
    v.push(obs.t_tilde);
    v.push(obs.remaining_budget / t);
    v
}

/// Epsilon-greedy algorithm choice over the network's Q-values.
pub fn ddqn_choose<R: Rng>(net: &Mlp, state: &[f64], epsilon: f64, rng: &mut R) -> Result<usize> {
    let n = net.output_size();
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        return Ok(rng.random_range(0..n));
    }
    Ok(argmax(&net.forward(state)?))
}

/// Budget that doubles the algorithm's cumulative spend, or `initial` for a
/// fresh algorithm.
pub fn doubling_delta(spent: f64, initial: f64) -> f64 {
    if spent > 0.0 {
        spent
    } else {
        initial
    }
}

pub fn ddqn_act<R: Rng>(
    net: &Mlp,
    obs: &Observation,
    epsilon: f64,
    rng: &mut R,
    initial_budget: f64,
) -> Result<Action> {
    if net.output_size() != obs.n_algorithms() {
        return Err(ArenaError::Shape(format!(
            "network scores {} algorithms, episode has {}",
            net.output_size(),
            obs.n_algorithms()
        )));
    }
    let algo = ddqn_choose(net, &ddqn_encode(obs), epsilon, rng)?;
    Ok(Action::new(
        algo,
        doubling_delta(obs.spent[algo], initial_budget),
        obs.best_revealed_valid(),
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    buffer: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            buffer: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Uniform sampling with replacement.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<Transition> {
        (0..n)
            .map(|_| self.buffer[rng.random_range(0..self.buffer.len())].clone())
            .collect()
    }
}

/// `y = r + gamma * Q(s', argmax_a Q(s', a; online); target)`, or `r` for
/// terminal transitions.
pub fn ddqn_targets(online: &Mlp, target: &Mlp, batch: &[Transition], gamma: f64) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|t| {
            if t.done {
                return Ok(t.reward);
            }
            let a_star = argmax(&online.forward(&t.next_state)?);
            Ok(t.reward + gamma * target.forward(&t.next_state)?[a_star])
        })
        .collect()
}

/// One optimizer step on the batch mean of `(y - Q(s, a))^2`. Returns the
/// loss before the update.
pub fn ddqn_train_step(
    online: &mut Mlp,
    target: &Mlp,
    batch: &[Transition],
    gamma: f64,
    opt: &mut Adam,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(ArenaError::Shape("empty replay batch".into()));
    }
    let ys = ddqn_targets(online, target, batch, gamma)?;
    let mut grads = Gradients::zeros_like(online);
    let mut loss = 0.0;
    for (t, y) in batch.iter().zip(&ys) {
        let (l, g) = online.backward(&t.state, t.action, *y)?;
        loss += l;
        grads.add_assign(&g);
    }
    let k = 1.0 / batch.len() as f64;
    grads.scale(k);
    opt_step(online, &grads, opt)?;
    Ok(loss * k)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DdqnCheckpoint {
    config: DdqnConfig,
    network: MlpCheckpoint,
}

#[derive(Clone, Debug)]
pub struct DdqnAgent {
    cfg: DdqnConfig,
    online: Option<Mlp>,
    trained: bool,
    rng: ChaCha8Rng,
}

impl DdqnAgent {
    pub fn new(cfg: DdqnConfig) -> Self {
        DdqnAgent {
            cfg,
            online: None,
            trained: false,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn config(&self) -> &DdqnConfig {
        &self.cfg
    }

    pub fn network(&self) -> Option<&Mlp> {
        self.online.as_ref()
    }

    fn fresh_net(&self, n_algorithms: usize) -> Result<Mlp> {
        Mlp::new(&self.cfg.layer_sizes(n_algorithms), self.cfg.seed)
    }
}

impl Agent for DdqnAgent {
    fn name(&self) -> &'static str {
        "ddqn"
    }

    fn is_meta_trained(&self) -> bool {
        self.trained
    }

    fn meta_train(&mut self, view: &MetaTrainView<'_>) -> Result<MetaTrainOutcome> {
        self.cfg.validate()?;
        if view.datasets.is_empty() {
            return Err(ArenaError::Config("DDQN meta-training needs datasets".into()));
        }
        let md = view.md;
        let n = md.n_algorithms();
        let mut online = self.fresh_net(n)?;
        let mut target = copy_params(&online);
        let mut opt = Adam::new(&online, self.cfg.learning_rate);
        let mut buffer = ReplayBuffer::new(self.cfg.replay_capacity);
        let mut rng = ChaCha8Rng::seed_from_u64(view.seed ^ 0xD00D);
        let mut loss_trace = Vec::new();
        let mut updates = 0usize;

        for episode in 0..self.cfg.episodes {
            let d = view.datasets[rng.random_range(0..view.datasets.len())];
            let reward_cfg = RewardConfig::for_dataset(md, d, view.sigma)?;
            let mut env = Env::new(md, d, reward_cfg, view.reveal)?;
            let mut obs = env.reset();
            let mut state = ddqn_encode(&obs);
            let epsilon = self.cfg.epsilon_at(episode);
            let initial = obs.total_budget * self.cfg.initial_budget_frac;
            loop {
                let action = ddqn_act(&online, &obs, epsilon, &mut rng, initial)?;
                let step = env.step(action)?;
                let next_state = ddqn_encode(&step.observation);
                buffer.push(Transition {
                    state,
                    action: action.algo,
                    reward: step.reward,
                    next_state: next_state.clone(),
                    done: step.done,
                });
                if buffer.len() >= self.cfg.batch_size {
                    let batch = buffer.sample(self.cfg.batch_size, &mut rng);
                    let loss = ddqn_train_step(&mut online, &target, &batch, self.cfg.gamma, &mut opt)?;
                    loss_trace.push(loss);
                    updates += 1;
                    if updates % self.cfg.target_sync == 0 {
                        target = copy_params(&online);
                    }
                }
                if step.done {
                    break;
                }
                state = next_state;
                obs = step.observation;
            }
        }

        self.online = Some(online);
        self.trained = true;
        Ok(MetaTrainOutcome {
            meta_trained: true,
            episodes: self.cfg.episodes,
            loss_trace,
        })
    }

    fn reset(&mut self, first: &Observation, seed: u64) -> Result<()> {
        self.cfg.validate()?;
        if self.online.is_none() {
            self.online = Some(self.fresh_net(first.n_algorithms())?);
        }
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(())
    }

    fn act(&mut self, obs: &Observation) -> Result<Action> {
        let net = match &self.online {
            Some(net) => net,
            None => {
                self.online = Some(self.fresh_net(obs.n_algorithms())?);
                self.online.as_ref().expect("just set")
            }
        };
        let initial = obs.total_budget * self.cfg.initial_budget_frac;
        ddqn_act(net, obs, self.cfg.eval_epsilon, &mut self.rng, initial)
    }

    fn checkpoint(&self) -> Option<serde_json::Value> {
        let net = self.online.as_ref()?;
        serde_json::to_value(DdqnCheckpoint {
            config: self.cfg.clone(),
            network: MlpCheckpoint::from_net(net),
        })
        .ok()
    }

    fn load_checkpoint(&mut self, value: &serde_json::Value) -> Result<()> {
        let ck: DdqnCheckpoint = serde_json::from_value(value.clone())?;
        self.online = Some(ck.network.to_net()?);
        self.cfg = ck.config;
        self.trained = true;
        Ok(())
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}
