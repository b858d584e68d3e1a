//! Freeze-thaw style scheduling with an entropy-search acquisition.
//!
//! Each arm's revealed validation points are fitted with the saturating
//! power-law family, giving a Gaussian predictive of its score after one
//! more fixed increment. The next arm to train is the one whose observation
//! is expected to shrink the entropy of the distribution over which arm is
//! best (`P_max`) the most:
//!
//! `f_acq(j) = H(P_max) - E_y[H(P_max | arm j yields y)]`
//!
//! `P_max` is estimated from Monte Carlo draws of all arms; the inner
//! expectation runs over a midpoint quantile grid of arm `j`'s predictive,
//! reusing the same draws for the other arms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::Agent;
use crate::env::{Action, Observation, RevealedPoint};
use crate::error::{ArenaError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FreezeThawConfig {
    /// Fixed increment as a fraction of the dataset budget.
    pub delta_frac: f64,
    pub mc_samples: usize,
    pub quantiles: usize,
    /// Predictive variance of an arm with no revealed points.
    pub prior_var: f64,
    /// Acquisition values this close to the maximum count as ties.
    pub tie_tolerance: f64,
}

impl Default for FreezeThawConfig {
    fn default() -> Self {
        FreezeThawConfig {
            delta_frac: 1.0 / 20.0,
            mc_samples: 1000,
            quantiles: 32,
            prior_var: 0.04,
            tie_tolerance: 0.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmPosterior {
    pub mean: f64,
    pub var: f64,
}

impl ArmPosterior {
    pub fn new(mean: f64, var: f64) -> Self {
        ArmPosterior {
            mean,
            var: var.max(0.0),
        }
    }
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

// Highest and second-highest entries of a row (value, index), lowest index
// winning ties.
fn top_two(row: &[f64]) -> ((f64, usize), (f64, usize)) {
    let mut first = (f64::NEG_INFINITY, usize::MAX);
    let mut second = (f64::NEG_INFINITY, usize::MAX);
    for (i, &v) in row.iter().enumerate() {
        if v > first.0 {
            second = first;
            first = (v, i);
        } else if v > second.0 {
            second = (v, i);
        }
    }
    (first, second)
}

/// Monte Carlo entropy-search acquisition for every arm.
pub fn entropy_search<R: Rng>(
    arms: &[ArmPosterior],
    samples: usize,
    quantiles: usize,
    rng: &mut R,
) -> Vec<f64> {
    let n = arms.len();
    if n == 0 || samples == 0 {
        return vec![0.0; n];
    }
    let draws: Vec<f64> = (0..samples * n)
        .map(|k| {
            let arm = arms[k % n];
            let z: f64 = rng.sample(StandardNormal);
            arm.mean + arm.var.sqrt() * z
        })
        .collect();
    let tops: Vec<_> = draws.chunks_exact(n).map(top_two).collect();

    let mut counts = vec![0usize; n];
    for (first, _) in &tops {
        counts[first.1] += 1;
    }
    let to_probs = |counts: &[usize]| -> Vec<f64> {
        counts.iter().map(|&c| c as f64 / samples as f64).collect()
    };
    let h0 = entropy(&to_probs(&counts));

    let std_normal = Normal::new(0.0, 1.0).expect("standard normal");
    let k = quantiles.max(1);
    let grid: Vec<f64> = (0..k)
        .map(|i| std_normal.inverse_cdf((i as f64 + 0.5) / k as f64))
        .collect();

    (0..n)
        .map(|j| {
            let arm = arms[j];
            let sd = arm.var.sqrt();
            let ys: Vec<f64> = if sd == 0.0 {
                vec![arm.mean]
            } else {
                grid.iter().map(|z| arm.mean + sd * z).collect()
            };
            let mut expected_h = 0.0;
            for &y in &ys {
                let mut c = vec![0usize; n];
                for (first, second) in &tops {
                    let other = if first.1 == j { *second } else { *first };
                    let winner = if other.1 == usize::MAX || y > other.0 || (y == other.0 && j < other.1) {
                        j
                    } else {
                        other.1
                    };
                    c[winner] += 1;
                }
                expected_h += entropy(&to_probs(&c));
            }
            h0 - expected_h / ys.len() as f64
        })
        .collect()
}

/// Lowest index whose value is within `tol` of the maximum.
pub fn argmax_with_tolerance(values: &[f64], tol: f64) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v >= max - tol).unwrap_or(0)
}

const SCALE_GRID: [f64; 7] = [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0];
const RATE_GRID: [f64; 5] = [0.3, 0.6, 1.0, 1.5, 2.5];
const VAR_FLOOR: f64 = 1e-6;

/// Gaussian predictive of an arm's validation score at `next_cost`.
///
/// With three or more points the curve family is fitted by least squares
/// over `(p0, pmax)` on a grid of `(scale, rate)`; the variance combines the
/// residual variance with an extrapolation term that shrinks as the next
/// cost approaches the last observed one.
pub fn fit_arm(
    points: &[RevealedPoint],
    next_cost: f64,
    total_budget: f64,
    baseline: f64,
    prior_var: f64,
) -> ArmPosterior {
    let n = points.len();
    match n {
        0 => return ArmPosterior::new(baseline, prior_var),
        1 | 2 => {
            return ArmPosterior::new(points[n - 1].valid, prior_var / (n as f64 + 1.0));
        }
        _ => {}
    }
    let mut best: Option<(f64, f64, f64, f64, f64)> = None; // sse, p0, pmax, s, k
    for &sf in &SCALE_GRID {
        let s = sf * total_budget;
        for &k in &RATE_GRID {
            // y = pmax * (1 - g) + p0 * g
            let (mut aa, mut ab, mut bb, mut ay, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for p in points {
                let g = (1.0 + p.cost / s).powf(-k);
                let a = 1.0 - g;
                aa += a * a;
                ab += a * g;
                bb += g * g;
                ay += a * p.valid;
                by += g * p.valid;
            }
            let ridge = 1e-9;
            let det = (aa + ridge) * (bb + ridge) - ab * ab;
            if det.abs() < 1e-15 {
                continue;
            }
            let pmax = (ay * (bb + ridge) - by * ab) / det;
            let p0 = ((aa + ridge) * by - ab * ay) / det;
            let sse: f64 = points
                .iter()
                .map(|p| {
                    let g = (1.0 + p.cost / s).powf(-k);
                    let r = p.valid - (pmax * (1.0 - g) + p0 * g);
                    r * r
                })
                .sum();
            if best.is_none_or(|b| sse < b.0) {
                best = Some((sse, p0, pmax, s, k));
            }
        }
    }
    let last = points[n - 1];
    let Some((sse, p0, pmax, s, k)) = best else {
        return ArmPosterior::new(last.valid, prior_var / (n as f64 + 1.0));
    };
    let g = (1.0 + next_cost / s).powf(-k);
    let mean = pmax * (1.0 - g) + p0 * g;
    let resid_var = sse / (n as f64 - 2.0).max(1.0);
    let reach = ((next_cost - last.cost) / next_cost).clamp(0.0, 1.0);
    let var = resid_var + prior_var * reach * reach / n as f64 + VAR_FLOOR;
    ArmPosterior::new(mean, var)
}

#[derive(Clone, Debug)]
pub struct FreezeThawAgent {
    cfg: FreezeThawConfig,
    rng: ChaCha8Rng,
    last_posteriors: Vec<ArmPosterior>,
}

impl FreezeThawAgent {
    pub fn new(cfg: FreezeThawConfig) -> Self {
        FreezeThawAgent {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(0),
            last_posteriors: Vec::new(),
        }
    }

    pub fn posteriors(&self) -> &[ArmPosterior] {
        &self.last_posteriors
    }
}

pub fn freezethaw_act<R: Rng>(
    cfg: &FreezeThawConfig,
    obs: &Observation,
    rng: &mut R,
) -> Result<(Action, Vec<ArmPosterior>)> {
    if !(cfg.delta_frac > 0.0) {
        return Err(ArenaError::Config("freeze-thaw increment must be positive".into()));
    }
    let delta = obs.total_budget * cfg.delta_frac;
    let posteriors: Vec<ArmPosterior> = (0..obs.n_algorithms())
        .map(|j| {
            fit_arm(
                &obs.revealed[j],
                obs.spent[j] + delta,
                obs.total_budget,
                obs.baseline_score,
                cfg.prior_var,
            )
        })
        .collect();
    let acq = entropy_search(&posteriors, cfg.mc_samples, cfg.quantiles, rng);
    let algo = argmax_with_tolerance(&acq, cfg.tie_tolerance);
    Ok((Action::new(algo, delta, obs.best_revealed_valid()), posteriors))
}

impl Agent for FreezeThawAgent {
    fn name(&self) -> &'static str {
        "freeze_thaw"
    }

    fn reset(&mut self, _first: &Observation, seed: u64) -> Result<()> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.last_posteriors.clear();
        Ok(())
    }

    fn act(&mut self, obs: &Observation) -> Result<Action> {
        let (action, post) = freezethaw_act(&self.cfg, obs, &mut self.rng)?;
        self.last_posteriors = post;
        Ok(action)
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}
