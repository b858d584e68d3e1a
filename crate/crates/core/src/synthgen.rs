//! Seeded synthetic meta-datasets.
//!
//! Each curve follows a saturating power law
//! `pmax - (pmax - p0) * (1 + cost / s)^(-k)` with per-anchor truncated
//! Gaussian noise. An algorithm's hyperparameters drive its curve
//! parameters on every dataset, so algorithms that look alike behave alike
//! and a meta-learner has something to learn from.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::curvestore::{
    Anchor, AlgorithmSpec, CurveKey, CurveKind, DatasetSpec, HyperValue, LearningCurve,
    MetaDataset, MetaDatasetParts, MetaSplit, Split,
};
use crate::error::{ArenaError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Generic,
    /// Test curves on each dataset are vertically shifted copies of one
    /// shape, so their order never changes.
    NonCrossing,
    /// Fast starters plateau low, slow starters end high.
    FrequentCrossing,
}

impl std::str::FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "generic" => Ok(Scenario::Generic),
            "non_crossing" => Ok(Scenario::NonCrossing),
            "frequent_crossing" => Ok(Scenario::FrequentCrossing),
            other => Err(format!("unknown scenario `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFamilyParams {
    pub p0: f64,
    pub pmax: f64,
    pub rate: f64,
    pub scale: f64,
    pub noise_sd: f64,
    pub crossing: bool,
}

impl CurveFamilyParams {
    pub fn score(&self, cost: f64) -> f64 {
        self.pmax - (self.pmax - self.p0) * (1.0 + cost / self.scale).powf(-self.rate)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenSpec {
    pub n_datasets: usize,
    pub n_algorithms: usize,
    pub curve_kind: CurveKind,
    pub anchors_per_curve: usize,
    pub total_budget: f64,
    pub seed: u64,
    pub scenario: Scenario,
    pub noise_sd: f64,
    pub meta_train_fraction: f64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            n_datasets: 10,
            n_algorithms: 10,
            curve_kind: CurveKind::TimeIndexed,
            anchors_per_curve: 10,
            total_budget: 100.0,
            seed: 0,
            scenario: Scenario::Generic,
            noise_sd: 0.01,
            meta_train_fraction: 0.5,
        }
    }
}

impl GenSpec {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ArenaError::Config(m.to_string()));
        if self.n_datasets == 0 || self.n_algorithms == 0 || self.anchors_per_curve == 0 {
            return bad("dataset, algorithm and anchor counts must all be at least 1");
        }
        if !(self.total_budget > 0.0) || !self.total_budget.is_finite() {
            return bad("total budget must be positive");
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return bad("noise_sd must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.meta_train_fraction) {
            return bad("meta_train_fraction must lie in [0, 1]");
        }
        Ok(())
    }
}

const SCORE_MIN: f64 = 0.0;
const SCORE_MAX: f64 = 1.0;
const TRAIN_GAP: f64 = 0.05;
const FAMILIES: [&str; 4] = ["sgd", "adaboost", "knn", "mlp"];

// Stream tags keep per-entity random substreams independent of generation
// order.
const TAG_ALGO: u64 = 1;
const TAG_DATASET: u64 = 2;
const TAG_CURVE: u64 = 3;
const TAG_SPLIT: u64 = 4;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn substream(seed: u64, tag: u64, a: u64, b: u64) -> ChaCha8Rng {
    let s = splitmix(splitmix(splitmix(splitmix(seed) ^ tag) ^ a) ^ b);
    ChaCha8Rng::seed_from_u64(s)
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

/// Latent traits read back from an algorithm's hyperparameters.
#[derive(Clone, Copy, Debug)]
struct AlgoTraits {
    capacity: f64,
    speed: f64,
    regularization: f64,
}

fn make_algorithm(spec: &GenSpec, id: usize) -> (AlgorithmSpec, AlgoTraits) {
    let mut rng = substream(spec.seed, TAG_ALGO, id as u64, 0);
    let family = FAMILIES[rng.random_range(0..FAMILIES.len())];
    let capacity: f64 = rng.random();
    let regularization: f64 = rng.random();
    let speed = match spec.scenario {
        Scenario::FrequentCrossing => {
            (1.0 - capacity + rng.random_range(-0.1..0.1)).clamp(0.0, 1.0)
        }
        _ => rng.random(),
    };
    let mut hp = BTreeMap::new();
    hp.insert("capacity".to_string(), HyperValue::Real(capacity));
    hp.insert(
        "learning_rate".to_string(),
        HyperValue::Real(10f64.powf(-4.0 + 3.0 * speed)),
    );
    hp.insert("regularization".to_string(), HyperValue::Real(regularization));
    match family {
        "mlp" => {
            let units = 16.0 * 2f64.powi((capacity * 4.0).round() as i32);
            hp.insert("hidden_units".to_string(), HyperValue::Real(units));
        }
        "adaboost" => {
            let n = (10.0 + capacity * 490.0).round();
            hp.insert("n_estimators".to_string(), HyperValue::Real(n));
        }
        _ => {}
    }
    (
        AlgorithmSpec {
            id,
            family: family.to_string(),
            hyperparameters: hp,
        },
        AlgoTraits {
            capacity,
            speed,
            regularization,
        },
    )
}

/// Dataset spec plus its base difficulty (asymptote of an average algorithm).
fn make_dataset(spec: &GenSpec, id: usize) -> (DatasetSpec, f64) {
    let mut rng = substream(spec.seed, TAG_DATASET, id as u64, 0);
    let n_examples = log_uniform(&mut rng, 1e3, 1e6).round();
    let n_features = log_uniform(&mut rng, 10.0, 1e4).round();
    let n_classes = rng.random_range(2..=100u32) as f64;
    let sparsity: f64 = rng.random();
    let jitter: f64 = rng.random_range(-0.05..0.05);
    // more classes, harder problem
    let base = 0.62 - 0.22 * n_classes.ln() / 100f64.ln() + jitter;
    let mut mf = BTreeMap::new();
    mf.insert("n_examples".to_string(), n_examples);
    mf.insert("n_features".to_string(), n_features);
    mf.insert("n_classes".to_string(), n_classes);
    mf.insert("sparsity".to_string(), sparsity);
    (
        DatasetSpec {
            id,
            name: format!("synth_{id:03}"),
            total_budget: spec.total_budget,
            meta_features: mf,
        },
        base,
    )
}

fn time_grid(rng: &mut impl Rng, n: usize, total: f64) -> Vec<f64> {
    if n == 1 {
        return vec![total / 2.0];
    }
    let lo = (total / 500.0).ln();
    let hi = total.ln();
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| {
            let jitter = if k == 0 {
                rng.random_range(0.0..0.4)
            } else if k == n - 1 {
                rng.random_range(-0.4..=0.0)
            } else {
                rng.random_range(-0.4..0.4)
            };
            (lo + (k as f64 + jitter) * step).exp()
        })
        .collect()
}

fn size_fractions(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| if k == n { 1.0 } else { k as f64 / n as f64 })
        .collect()
}

fn cost_grid(spec: &GenSpec, rng: &mut impl Rng) -> Vec<f64> {
    match spec.curve_kind {
        CurveKind::TimeIndexed => time_grid(rng, spec.anchors_per_curve, spec.total_budget),
        CurveKind::SizeIndexed => {
            let full = spec.total_budget * rng.random_range(0.1..0.5);
            size_fractions(spec.anchors_per_curve)
                .into_iter()
                .map(|f| f * full)
                .collect()
        }
    }
}

fn truncated_noise(rng: &mut impl Rng, sd: f64) -> f64 {
    if sd == 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, sd).expect("finite sd");
    loop {
        let x: f64 = normal.sample(rng);
        if x.abs() <= 3.0 * sd {
            return x;
        }
    }
}

fn build_curves(
    rng: &mut impl Rng,
    costs: &[f64],
    params: &CurveFamilyParams,
    kind: CurveKind,
) -> [LearningCurve; 3] {
    let mut out = Vec::with_capacity(3);
    for split in Split::ALL {
        let anchors = costs
            .iter()
            .map(|&c| {
                let clean = params.score(c);
                let shifted = match split {
                    Split::Train => clean + TRAIN_GAP,
                    _ => clean,
                };
                let s = shifted + truncated_noise(rng, params.noise_sd);
                Anchor::new(c, s.clamp(SCORE_MIN, SCORE_MAX))
            })
            .collect();
        out.push(LearningCurve::new(anchors, kind).expect("generated costs are increasing"));
    }
    out.try_into().expect("three splits")
}

fn generic_params(
    spec: &GenSpec,
    base: f64,
    t: AlgoTraits,
    rng: &mut impl Rng,
) -> CurveFamilyParams {
    let interaction: f64 = rng.random_range(-0.04..0.04);
    let pmax = (base + 0.3 * (t.capacity - 0.5) + interaction).clamp(0.1, 0.97);
    let p0 = (0.02 + 0.08 * t.regularization).min(pmax);
    let scale = spec.total_budget * 10f64.powf(-2.5 + 2.0 * (1.0 - t.speed));
    let rate = 0.6 + 0.8 * t.speed;
    CurveFamilyParams {
        p0,
        pmax,
        rate,
        scale,
        noise_sd: spec.noise_sd,
        crossing: true,
    }
}

pub fn generate(spec: &GenSpec) -> Result<MetaDataset> {
    spec.validate()?;
    let (algorithms, traits): (Vec<_>, Vec<_>) =
        (0..spec.n_algorithms).map(|a| make_algorithm(spec, a)).unzip();
    let (datasets, bases): (Vec<_>, Vec<_>) =
        (0..spec.n_datasets).map(|d| make_dataset(spec, d)).unzip();

    let mut curves = BTreeMap::new();
    for d in 0..spec.n_datasets {
        match spec.scenario {
            Scenario::NonCrossing => {
                non_crossing_dataset(spec, d, bases[d], &traits, &mut curves);
            }
            _ => {
                for a in 0..spec.n_algorithms {
                    let mut rng = substream(spec.seed, TAG_CURVE, d as u64, a as u64);
                    let params = generic_params(spec, bases[d], traits[a], &mut rng);
                    let costs = cost_grid(spec, &mut rng);
                    let [tr, va, te] = build_curves(&mut rng, &costs, &params, spec.curve_kind);
                    curves.insert(CurveKey::new(d, a, Split::Train), tr);
                    curves.insert(CurveKey::new(d, a, Split::Valid), va);
                    curves.insert(CurveKey::new(d, a, Split::Test), te);
                }
            }
        }
    }

    MetaDataset::from_parts(MetaDatasetParts {
        score_min: SCORE_MIN,
        score_max: SCORE_MAX,
        baseline_score: 0.0,
        curve_kind: spec.curve_kind,
        anchor_grid: match spec.curve_kind {
            CurveKind::SizeIndexed => Some(size_fractions(spec.anchors_per_curve)),
            CurveKind::TimeIndexed => None,
        },
        datasets,
        algorithms,
        split: make_split(spec),
        curves,
    })
}

fn non_crossing_dataset(
    spec: &GenSpec,
    d: usize,
    base: f64,
    traits: &[AlgoTraits],
    curves: &mut BTreeMap<CurveKey, LearningCurve>,
) {
    let n = spec.n_algorithms;
    let mut rng = substream(spec.seed, TAG_CURVE, d as u64, u64::MAX);
    let costs = cost_grid(spec, &mut rng);
    let shape = CurveFamilyParams {
        p0: 0.05,
        pmax: base.clamp(0.2, 0.6),
        rate: rng.random_range(0.6..1.4),
        scale: spec.total_budget * 10f64.powf(rng.random_range(-2.5..-0.5)),
        noise_sd: 0.0,
        crossing: false,
    };
    // Offsets follow capacity order; consecutive curves are `gap` apart and
    // noise stays below a quarter of it, so no pair can swap.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| traits[a].capacity.total_cmp(&traits[b].capacity).then(a.cmp(&b)));
    let gap = 0.3 / n as f64;
    let sd = spec.noise_sd.min(gap / 12.0);
    for (pos, &a) in order.iter().enumerate() {
        let offset = gap * (pos as f64 + 0.5);
        let params = CurveFamilyParams {
            p0: shape.p0 + offset,
            pmax: shape.pmax + offset,
            noise_sd: sd,
            ..shape
        };
        let mut arng = substream(spec.seed, TAG_CURVE, d as u64, a as u64);
        let [tr, va, te] = build_curves(&mut arng, &costs, &params, spec.curve_kind);
        curves.insert(CurveKey::new(d, a, Split::Train), tr);
        curves.insert(CurveKey::new(d, a, Split::Valid), va);
        curves.insert(CurveKey::new(d, a, Split::Test), te);
    }
}

fn make_split(spec: &GenSpec) -> MetaSplit {
    let n = spec.n_datasets;
    let mut ids: Vec<usize> = (0..n).collect();
    let mut rng = substream(spec.seed, TAG_SPLIT, 0, 0);
    ids.shuffle(&mut rng);
    let mut n_train = (n as f64 * spec.meta_train_fraction).round() as usize;
    if n >= 2 {
        n_train = n_train.clamp(1, n - 1);
    } else {
        n_train = 0;
    }
    let mut meta_train = ids[..n_train].to_vec();
    let mut meta_test = ids[n_train..].to_vec();
    meta_train.sort_unstable();
    meta_test.sort_unstable();
    MetaSplit {
        meta_train,
        meta_test,
    }
}

/// Sign changes of the score difference between two curves, evaluated at
/// the union of their anchor costs from the later of their first anchors on.
pub fn pair_crossings(a: &LearningCurve, b: &LearningCurve, baseline: f64) -> usize {
    let start = a.first().cost.max(b.first().cost);
    let mut costs: Vec<f64> = a
        .anchors()
        .iter()
        .chain(b.anchors())
        .map(|x| x.cost)
        .filter(|&c| c >= start)
        .collect();
    costs.sort_by(f64::total_cmp);
    costs.dedup();
    let mut prev_sign = 0.0;
    let mut count = 0;
    for c in costs {
        let diff = a.query(c, baseline) - b.query(c, baseline);
        if diff == 0.0 {
            continue;
        }
        let sign = diff.signum();
        if prev_sign != 0.0 && sign != prev_sign {
            count += 1;
        }
        prev_sign = sign;
    }
    count
}

/// Total crossings over all algorithm pairs on a dataset's test curves.
pub fn crossing_count(md: &MetaDataset, dataset: usize) -> Result<usize> {
    md.dataset(dataset)?;
    let n = md.n_algorithms();
    let baseline = md.baseline_score();
    let mut total = 0;
    for a in 0..n {
        for b in a + 1..n {
            total += pair_crossings(
                md.curve(dataset, a, Split::Test),
                md.curve(dataset, b, Split::Test),
                baseline,
            );
        }
    }
    Ok(total)
}
