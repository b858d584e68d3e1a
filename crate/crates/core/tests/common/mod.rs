#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use lc_arena::curvestore::{
    AlgorithmSpec, CurveKey, CurveKind, DatasetSpec, LearningCurve, MetaDataset, MetaDatasetParts,
    MetaSplit, Split,
};
use lc_arena::synthgen::{generate, GenSpec, Scenario};
use serde_json::Value;

pub fn curve(pairs: &[(f64, f64)]) -> LearningCurve {
    LearningCurve::from_pairs(pairs, CurveKind::TimeIndexed).unwrap()
}

/// Time-indexed meta-dataset from a closure giving each curve's anchors.
pub fn build_md(
    budgets: &[f64],
    n_algorithms: usize,
    split: MetaSplit,
    anchors: impl Fn(usize, usize, Split) -> Vec<(f64, f64)>,
) -> MetaDataset {
    let datasets = budgets
        .iter()
        .enumerate()
        .map(|(id, &t)| DatasetSpec {
            id,
            name: format!("ds{id}"),
            total_budget: t,
            meta_features: BTreeMap::from([("n_classes".to_string(), 2.0)]),
        })
        .collect();
    let algorithms = (0..n_algorithms)
        .map(|id| AlgorithmSpec {
            id,
            family: "sgd".into(),
            hyperparameters: BTreeMap::new(),
        })
        .collect();
    let mut curves = BTreeMap::new();
    for d in 0..budgets.len() {
        for a in 0..n_algorithms {
            for s in Split::ALL {
                curves.insert(CurveKey::new(d, a, s), curve(&anchors(d, a, s)));
            }
        }
    }
    MetaDataset::from_parts(MetaDatasetParts {
        datasets,
        algorithms,
        split,
        curves,
        ..Default::default()
    })
    .unwrap()
}

pub fn synthetic(n_datasets: usize, n_algorithms: usize, seed: u64, scenario: Scenario) -> MetaDataset {
    generate(&GenSpec {
        n_datasets,
        n_algorithms,
        seed,
        scenario,
        ..Default::default()
    })
    .unwrap()
}

/// Exact sum of floats (Shewchuk's partials), rounded once at the end.
pub fn exact_sum(xs: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for &x in xs {
        let mut x = x;
        let mut kept = Vec::new();
        for &p in &partials {
            let (mut hi, mut y) = (x, p);
            if hi.abs() < y.abs() {
                std::mem::swap(&mut hi, &mut y);
            }
            let sum = hi + y;
            let lo = y - (sum - hi);
            if lo != 0.0 {
                kept.push(lo);
            }
            x = sum;
        }
        kept.push(x);
        partials = kept;
    }
    partials.iter().rev().fold(0.0, |acc, p| acc + p)
}

/// Bit patterns of test-curve scores that never occur as a train/valid
/// score, an anchor cost, or the baseline; finding one of these in an
/// observation means a test value leaked.
pub fn test_only_values(md: &MetaDataset) -> HashSet<u64> {
    let mut other = HashSet::new();
    let mut test = HashSet::new();
    other.insert(md.baseline_score().to_bits());
    other.insert(0f64.to_bits());
    other.insert(1f64.to_bits());
    for d in 0..md.n_datasets() {
        for a in 0..md.n_algorithms() {
            for s in Split::ALL {
                for anc in md.curve(d, a, s).anchors() {
                    other.insert(anc.cost.to_bits());
                    if s == Split::Test {
                        test.insert(anc.score.to_bits());
                    } else {
                        other.insert(anc.score.to_bits());
                    }
                }
            }
        }
    }
    test.difference(&other).copied().collect()
}

/// Fails if any key mentions "test" or any number is a test-only value.
pub fn assert_no_test_leak(value: &Value, forbidden: &HashSet<u64>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                assert!(!k.to_lowercase().contains("test"), "observation key `{k}`");
                assert_no_test_leak(v, forbidden);
            }
        }
        Value::Array(xs) => xs.iter().for_each(|v| assert_no_test_leak(v, forbidden)),
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                assert!(!forbidden.contains(&x.to_bits()), "test score {x} leaked");
            }
        }
        _ => {}
    }
}
