//! Learning curves, meta-datasets, and their on-disk format.
//!
//! A meta-dataset holds one learning curve per (dataset, algorithm, split)
//! triple. Curves are sequences of `(cost, score)` anchors with strictly
//! increasing costs; between anchors a curve holds the value of the closest
//! previously recorded point.
//!
//! On disk a meta-dataset is a `manifest.json` plus a directory of
//! `d{did}_a{aid}_{split}.csv` files, each with a `cost,score` header.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }

    fn index(self) -> usize {
        match self {
            Split::Train => 0,
            Split::Valid => 1,
            Split::Test => 2,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Irregular anchors chosen by the learner (wall-clock style).
    TimeIndexed,
    /// Anchors on a fixed grid of training-set fractions.
    SizeIndexed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub cost: f64,
    pub score: f64,
}

impl Anchor {
    pub fn new(cost: f64, score: f64) -> Self {
        Anchor { cost, score }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearningCurve {
    anchors: Vec<Anchor>,
    kind: CurveKind,
}

impl LearningCurve {
    /// Builds a curve, checking that there is at least one anchor and that
    /// costs are finite, nonnegative and strictly increasing.
    pub fn new(anchors: Vec<Anchor>, kind: CurveKind) -> std::result::Result<Self, String> {
        if anchors.is_empty() {
            return Err("curve has no anchors".into());
        }
        for (i, a) in anchors.iter().enumerate() {
            if !a.cost.is_finite() || a.cost < 0.0 {
                return Err(format!("anchor {i} has invalid cost {}", a.cost));
            }
            if !a.score.is_finite() {
                return Err(format!("anchor {i} has non-finite score"));
            }
            if i > 0 && a.cost <= anchors[i - 1].cost {
                return Err(format!(
                    "anchor costs not strictly increasing at row {i} ({} after {})",
                    a.cost,
                    anchors[i - 1].cost
                ));
            }
        }
        Ok(LearningCurve { anchors, kind })
    }

    pub fn from_pairs(pairs: &[(f64, f64)], kind: CurveKind) -> std::result::Result<Self, String> {
        Self::new(pairs.iter().map(|&(c, s)| Anchor::new(c, s)).collect(), kind)
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn first(&self) -> Anchor {
        self.anchors[0]
    }

    pub fn last(&self) -> Anchor {
        self.anchors[self.anchors.len() - 1]
    }

    /// Left-hold lookup: score of the last anchor whose cost is `<= cost`,
    /// or `baseline` when `cost` precedes the first anchor.
    pub fn query(&self, cost: f64, baseline: f64) -> f64 {
        let idx = self.anchors.partition_point(|a| a.cost <= cost);
        if idx == 0 {
            baseline
        } else {
            self.anchors[idx - 1].score
        }
    }
}

/// Score of `curve` after spending `cost`, holding the closest previously
/// recorded point.
pub fn query_curve(curve: &LearningCurve, cost: f64, baseline: f64) -> f64 {
    curve.query(cost, baseline)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Real(f64),
    Categorical(String),
}

impl HyperValue {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            HyperValue::Real(v) => Some(*v),
            HyperValue::Categorical(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub id: usize,
    pub family: String,
    pub hyperparameters: BTreeMap<String, HyperValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub id: usize,
    pub name: String,
    pub total_budget: f64,
    pub meta_features: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaSplit {
    pub meta_train: Vec<usize>,
    pub meta_test: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveKey {
    pub dataset: usize,
    pub algorithm: usize,
    pub split: Split,
}

impl CurveKey {
    pub fn new(dataset: usize, algorithm: usize, split: Split) -> Self {
        CurveKey {
            dataset,
            algorithm,
            split,
        }
    }

    pub fn file_name(&self) -> String {
        format!("d{}_a{}_{}.csv", self.dataset, self.algorithm, self.split)
    }
}

/// Everything needed to assemble a [`MetaDataset`]; validated by
/// [`MetaDataset::from_parts`].
#[derive(Clone, Debug)]
pub struct MetaDatasetParts {
    pub score_min: f64,
    pub score_max: f64,
    pub baseline_score: f64,
    pub curve_kind: CurveKind,
    /// Fractions in (0, 1], ascending, ending at 1. Required for
    /// size-indexed meta-datasets.
    pub anchor_grid: Option<Vec<f64>>,
    pub datasets: Vec<DatasetSpec>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub split: MetaSplit,
    pub curves: BTreeMap<CurveKey, LearningCurve>,
}

impl Default for MetaDatasetParts {
    fn default() -> Self {
        MetaDatasetParts {
            score_min: 0.0,
            score_max: 1.0,
            baseline_score: 0.0,
            curve_kind: CurveKind::TimeIndexed,
            anchor_grid: None,
            datasets: Vec::new(),
            algorithms: Vec::new(),
            split: MetaSplit::default(),
            curves: BTreeMap::new(),
        }
    }
}

/// Immutable collection of learning curves over datasets and algorithms.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaDataset {
    score_min: f64,
    score_max: f64,
    baseline_score: f64,
    curve_kind: CurveKind,
    anchor_grid: Option<Vec<f64>>,
    datasets: Vec<DatasetSpec>,
    algorithms: Vec<AlgorithmSpec>,
    split: MetaSplit,
    // dense, indexed by (dataset * n_algorithms + algorithm) * 3 + split
    curves: Vec<LearningCurve>,
}

const GRID_REL_TOL: f64 = 1e-9;

impl MetaDataset {
    pub fn from_parts(mut parts: MetaDatasetParts) -> Result<Self> {
        if !(parts.score_min < parts.score_max) {
            return Err(ArenaError::Invariant(format!(
                "score range [{}, {}] is empty",
                parts.score_min, parts.score_max
            )));
        }
        if !parts.baseline_score.is_finite() {
            return Err(ArenaError::Invariant("baseline score is not finite".into()));
        }
        if parts.datasets.is_empty() || parts.algorithms.is_empty() {
            return Err(ArenaError::Invariant(
                "meta-dataset needs at least one dataset and one algorithm".into(),
            ));
        }
        for (i, d) in parts.datasets.iter().enumerate() {
            if d.id != i {
                return Err(ArenaError::Invariant(format!(
                    "dataset ids must be 0..{} in order; found {} at position {i}",
                    parts.datasets.len(),
                    d.id
                )));
            }
            if !(d.total_budget > 0.0) || !d.total_budget.is_finite() {
                return Err(ArenaError::Invariant(format!(
                    "dataset {i} has non-positive total budget {}",
                    d.total_budget
                )));
            }
            if let Some((name, v)) = d.meta_features.iter().find(|(_, v)| !v.is_finite()) {
                return Err(ArenaError::Invariant(format!(
                    "dataset {i} meta-feature `{name}` is not finite ({v})"
                )));
            }
        }
        for (i, a) in parts.algorithms.iter().enumerate() {
            if a.id != i {
                return Err(ArenaError::Invariant(format!(
                    "algorithm ids must be 0..{} in order; found {} at position {i}",
                    parts.algorithms.len(),
                    a.id
                )));
            }
        }
        let n_datasets = parts.datasets.len();
        for &d in parts.split.meta_train.iter().chain(&parts.split.meta_test) {
            if d >= n_datasets {
                return Err(ArenaError::Invariant(format!(
                    "split references unknown dataset {d}"
                )));
            }
        }
        if let Some(d) = parts
            .split
            .meta_train
            .iter()
            .find(|d| parts.split.meta_test.contains(d))
        {
            return Err(ArenaError::Invariant(format!(
                "dataset {d} is in both meta_train and meta_test"
            )));
        }
        if parts.curve_kind == CurveKind::SizeIndexed {
            let grid = parts.anchor_grid.as_ref().ok_or_else(|| {
                ArenaError::Invariant("size-indexed meta-dataset needs an anchor_grid".into())
            })?;
            let ok = !grid.is_empty()
                && grid.windows(2).all(|w| w[0] < w[1])
                && grid[0] > 0.0
                && grid[grid.len() - 1] == 1.0;
            if !ok {
                return Err(ArenaError::Invariant(
                    "anchor_grid must be ascending fractions in (0, 1] ending at 1".into(),
                ));
            }
        }

        let n_algorithms = parts.algorithms.len();
        let mut dense = Vec::with_capacity(n_datasets * n_algorithms * 3);
        for d in 0..n_datasets {
            for a in 0..n_algorithms {
                for split in Split::ALL {
                    let key = CurveKey::new(d, a, split);
                    let curve = parts.curves.remove(&key).ok_or(ArenaError::MissingCurve {
                        dataset: d,
                        algorithm: a,
                        split,
                    })?;
                    let malformed = |message: String| ArenaError::MalformedCurve {
                        dataset: d,
                        algorithm: a,
                        split,
                        message,
                    };
                    if let Some(bad) = curve
                        .anchors()
                        .iter()
                        .find(|x| x.score < parts.score_min || x.score > parts.score_max)
                    {
                        return Err(malformed(format!(
                            "score {} outside [{}, {}]",
                            bad.score, parts.score_min, parts.score_max
                        )));
                    }
                    if curve.kind() != parts.curve_kind {
                        return Err(malformed("curve kind differs from manifest".into()));
                    }
                    if let (CurveKind::SizeIndexed, Some(grid)) =
                        (parts.curve_kind, parts.anchor_grid.as_ref())
                    {
                        check_grid(&curve, grid).map_err(malformed)?;
                    }
                    dense.push(curve);
                }
            }
        }
        if let Some(key) = parts.curves.keys().next() {
            return Err(ArenaError::Invariant(format!(
                "curve (d{}, a{}, {}) references an unknown dataset or algorithm",
                key.dataset, key.algorithm, key.split
            )));
        }

        Ok(MetaDataset {
            score_min: parts.score_min,
            score_max: parts.score_max,
            baseline_score: parts.baseline_score,
            curve_kind: parts.curve_kind,
            anchor_grid: parts.anchor_grid,
            datasets: parts.datasets,
            algorithms: parts.algorithms,
            split: parts.split,
            curves: dense,
        })
    }

    pub fn score_min(&self) -> f64 {
        self.score_min
    }

    pub fn score_max(&self) -> f64 {
        self.score_max
    }

    pub fn baseline_score(&self) -> f64 {
        self.baseline_score
    }

    pub fn curve_kind(&self) -> CurveKind {
        self.curve_kind
    }

    pub fn anchor_grid(&self) -> Option<&[f64]> {
        self.anchor_grid.as_deref()
    }

    pub fn datasets(&self) -> &[DatasetSpec] {
        &self.datasets
    }

    pub fn algorithms(&self) -> &[AlgorithmSpec] {
        &self.algorithms
    }

    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn n_algorithms(&self) -> usize {
        self.algorithms.len()
    }

    pub fn split(&self) -> &MetaSplit {
        &self.split
    }

    pub fn dataset(&self, id: usize) -> Result<&DatasetSpec> {
        self.datasets.get(id).ok_or(ArenaError::UnknownDataset(id))
    }

    /// Panics if the key is out of range; use [`MetaDataset::dataset`] first
    /// when the id comes from user input.
    pub fn curve(&self, dataset: usize, algorithm: usize, split: Split) -> &LearningCurve {
        assert!(dataset < self.datasets.len() && algorithm < self.algorithms.len());
        &self.curves[(dataset * self.algorithms.len() + algorithm) * 3 + split.index()]
    }

    pub fn curve_count(&self) -> usize {
        self.curves.len()
    }

    /// Number of curves stored for one split (one per dataset/algorithm pair).
    pub fn curves_per_split(&self) -> usize {
        self.n_datasets() * self.n_algorithms()
    }

    /// Same meta-dataset with a different train/test partition.
    pub fn with_split(&self, split: MetaSplit) -> Result<Self> {
        let mut parts = self.to_parts();
        parts.split = split;
        MetaDataset::from_parts(parts)
    }

    pub fn to_parts(&self) -> MetaDatasetParts {
        let mut curves = BTreeMap::new();
        for d in 0..self.n_datasets() {
            for a in 0..self.n_algorithms() {
                for split in Split::ALL {
                    curves.insert(CurveKey::new(d, a, split), self.curve(d, a, split).clone());
                }
            }
        }
        MetaDatasetParts {
            score_min: self.score_min,
            score_max: self.score_max,
            baseline_score: self.baseline_score,
            curve_kind: self.curve_kind,
            anchor_grid: self.anchor_grid.clone(),
            datasets: self.datasets.clone(),
            algorithms: self.algorithms.clone(),
            split: self.split.clone(),
            curves,
        }
    }
}

fn check_grid(curve: &LearningCurve, grid: &[f64]) -> std::result::Result<(), String> {
    let anchors = curve.anchors();
    if anchors.len() != grid.len() {
        return Err(format!(
            "size-indexed curve has {} anchors, grid has {}",
            anchors.len(),
            grid.len()
        ));
    }
    let full = curve.last().cost;
    for (a, &frac) in anchors.iter().zip(grid) {
        let expected = frac * full;
        if (a.cost - expected).abs() > GRID_REL_TOL * full {
            return Err(format!(
                "anchor cost {} is off the declared grid (expected {expected})",
                a.cost
            ));
        }
    }
    Ok(())
}

/// Rank per algorithm (1 = best) for the given scores: descending score,
/// ties broken by lower index.
pub fn rank_scores(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; scores.len()];
    for (pos, &algo) in order.iter().enumerate() {
        ranks[algo] = pos + 1;
    }
    ranks
}

/// Rank of each algorithm on `dataset` by the last point of its test curve.
pub fn final_rank(md: &MetaDataset, dataset: usize) -> Result<Vec<usize>> {
    md.dataset(dataset)?;
    let scores: Vec<f64> = (0..md.n_algorithms())
        .map(|a| md.curve(dataset, a, Split::Test).last().score)
        .collect();
    Ok(rank_scores(&scores))
}

/// Algorithm id holding rank 1 on `dataset`.
pub fn final_best(md: &MetaDataset, dataset: usize) -> Result<usize> {
    let ranks = final_rank(md, dataset)?;
    Ok(ranks.iter().position(|&r| r == 1).unwrap_or(0))
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    score_min: f64,
    score_max: f64,
    baseline_score: f64,
    curve_kind: CurveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchor_grid: Option<Vec<f64>>,
    datasets: Vec<DatasetSpec>,
    algorithms: Vec<AlgorithmSpec>,
    split: MetaSplit,
    curves: String,
}

pub const CURVES_DIR: &str = "curves";

/// Writes `manifest.json`-style output at `path` and the curve CSVs in a
/// `curves/` directory next to it.
pub fn save_metadataset(md: &MetaDataset, path: &Path) -> Result<()> {
    let root = path.parent().unwrap_or_else(|| Path::new("."));
    let curves_dir = root.join(CURVES_DIR);
    fs::create_dir_all(&curves_dir).map_err(|e| ArenaError::io(&curves_dir, e))?;

    let manifest = Manifest {
        score_min: md.score_min,
        score_max: md.score_max,
        baseline_score: md.baseline_score,
        curve_kind: md.curve_kind,
        anchor_grid: md.anchor_grid.clone(),
        datasets: md.datasets.clone(),
        algorithms: md.algorithms.clone(),
        split: md.split.clone(),
        curves: CURVES_DIR.to_string(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| ArenaError::io(path, e))?;

    for d in 0..md.n_datasets() {
        for a in 0..md.n_algorithms() {
            for split in Split::ALL {
                let key = CurveKey::new(d, a, split);
                let file = curves_dir.join(key.file_name());
                write_curve_csv(md.curve(d, a, split), &file)?;
            }
        }
    }
    Ok(())
}

fn write_curve_csv(curve: &LearningCurve, file: &Path) -> Result<()> {
    // `{}` on f64 prints the shortest representation that parses back to
    // the same bits.
    let mut out = String::from("cost,score\n");
    for a in curve.anchors() {
        out.push_str(&format!("{},{}\n", a.cost, a.score));
    }
    fs::write(file, out).map_err(|e| ArenaError::io(file, e))
}

pub fn load_metadataset(path: &Path) -> Result<MetaDataset> {
    let text = fs::read_to_string(path).map_err(|e| ArenaError::io(path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| ArenaError::Manifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let root = path.parent().unwrap_or_else(|| Path::new("."));
    let curves_dir: PathBuf = root.join(&manifest.curves);

    let mut curves = BTreeMap::new();
    for d in 0..manifest.datasets.len() {
        for a in 0..manifest.algorithms.len() {
            for split in Split::ALL {
                let key = CurveKey::new(d, a, split);
                let file = curves_dir.join(key.file_name());
                if !file.exists() {
                    return Err(ArenaError::MissingCurve {
                        dataset: d,
                        algorithm: a,
                        split,
                    });
                }
                let curve = read_curve_csv(&file, manifest.curve_kind).map_err(|message| {
                    ArenaError::MalformedCurve {
                        dataset: d,
                        algorithm: a,
                        split,
                        message,
                    }
                })?;
                curves.insert(key, curve);
            }
        }
    }

    MetaDataset::from_parts(MetaDatasetParts {
        score_min: manifest.score_min,
        score_max: manifest.score_max,
        baseline_score: manifest.baseline_score,
        curve_kind: manifest.curve_kind,
        anchor_grid: manifest.anchor_grid,
        datasets: manifest.datasets,
        algorithms: manifest.algorithms,
        split: manifest.split,
        curves,
    })
}

fn read_curve_csv(file: &Path, kind: CurveKind) -> std::result::Result<LearningCurve, String> {
    let mut reader = csv::Reader::from_path(file).map_err(|e| e.to_string())?;
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    if headers.len() != 2 || &headers[0] != "cost" || &headers[1] != "score" {
        return Err(format!("expected header `cost,score`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut anchors = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let parse = |i: usize| -> std::result::Result<f64, String> {
            record
                .get(i)
                .ok_or_else(|| format!("row {} is missing a column", row + 1))?
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("row {}: {e}", row + 1))
        };
        anchors.push(Anchor::new(parse(0)?, parse(1)?));
    }
    LearningCurve::new(anchors, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(pairs: &[(f64, f64)]) -> LearningCurve {
        LearningCurve::from_pairs(pairs, CurveKind::TimeIndexed).unwrap()
    }

    #[test]
    fn query_holds_previous_point() {
        let c = curve(&[(2.0, 0.4), (5.0, 0.6)]);
        assert_eq!(query_curve(&c, 3.0, 0.0), 0.4);
        assert_eq!(query_curve(&c, 5.0, 0.0), 0.6);
        assert_eq!(query_curve(&c, 1.0, 0.0), 0.0);
        assert_eq!(query_curve(&c, 100.0, 0.0), 0.6);
        assert_eq!(query_curve(&c, 2.0, 0.0), 0.4);
    }

    #[test]
    fn curve_rejects_bad_anchors() {
        assert!(LearningCurve::new(vec![], CurveKind::TimeIndexed).is_err());
        assert!(LearningCurve::from_pairs(&[(1.0, 0.1), (1.0, 0.2)], CurveKind::TimeIndexed).is_err());
        assert!(LearningCurve::from_pairs(&[(-1.0, 0.1)], CurveKind::TimeIndexed).is_err());
        assert!(LearningCurve::from_pairs(&[(1.0, f64::NAN)], CurveKind::TimeIndexed).is_err());
    }

    #[test]
    fn ranks_descending_with_id_tiebreak() {
        assert_eq!(rank_scores(&[0.3, 0.9, 0.5]), vec![3, 1, 2]);
        assert_eq!(rank_scores(&[0.5, 0.5, 0.5]), vec![1, 2, 3]);
        assert_eq!(rank_scores(&[0.1]), vec![1]);
    }

    fn tiny_parts() -> MetaDatasetParts {
        let mut parts = MetaDatasetParts {
            datasets: vec![DatasetSpec {
                id: 0,
                name: "d0".into(),
                total_budget: 10.0,
                meta_features: BTreeMap::new(),
            }],
            algorithms: (0..3)
                .map(|id| AlgorithmSpec {
                    id,
                    family: "f".into(),
                    hyperparameters: BTreeMap::new(),
                })
                .collect(),
            split: MetaSplit {
                meta_train: vec![],
                meta_test: vec![0],
            },
            ..Default::default()
        };
        let finals = [0.3, 0.9, 0.5];
        for (a, &f) in finals.iter().enumerate() {
            for split in Split::ALL {
                parts
                    .curves
                    .insert(CurveKey::new(0, a, split), curve(&[(1.0, f / 2.0), (4.0, f)]));
            }
        }
        parts
    }

    #[test]
    fn final_rank_uses_last_test_point() {
        let md = MetaDataset::from_parts(tiny_parts()).unwrap();
        assert_eq!(final_rank(&md, 0).unwrap(), vec![3, 1, 2]);
        assert_eq!(final_best(&md, 0).unwrap(), 1);
        assert!(matches!(final_rank(&md, 7), Err(ArenaError::UnknownDataset(7))));
    }

    #[test]
    fn missing_curve_is_named() {
        let mut parts = tiny_parts();
        parts.curves.remove(&CurveKey::new(0, 1, Split::Test));
        let err = MetaDataset::from_parts(parts).unwrap_err();
        assert!(matches!(
            err,
            ArenaError::MissingCurve {
                dataset: 0,
                algorithm: 1,
                split: Split::Test
            }
        ));
    }

    #[test]
    fn out_of_range_scores_rejected() {
        let mut parts = tiny_parts();
        parts
            .curves
            .insert(CurveKey::new(0, 2, Split::Valid), curve(&[(1.0, 1.5)]));
        let err = MetaDataset::from_parts(parts).unwrap_err();
        assert!(err.to_string().contains("(d0, a2, valid)"), "{err}");
    }

    #[test]
    fn overlapping_split_rejected() {
        let mut parts = tiny_parts();
        parts.split.meta_train = vec![0];
        assert!(MetaDataset::from_parts(parts).is_err());
    }

    #[test]
    fn size_indexed_grid_enforced() {
        let mut parts = tiny_parts();
        parts.curve_kind = CurveKind::SizeIndexed;
        parts.anchor_grid = Some(vec![0.5, 1.0]);
        let keys: Vec<_> = parts.curves.keys().copied().collect();
        for k in &keys {
            parts.curves.insert(
                *k,
                LearningCurve::from_pairs(&[(2.0, 0.2), (4.0, 0.3)], CurveKind::SizeIndexed).unwrap(),
            );
        }
        assert!(MetaDataset::from_parts(parts.clone()).is_ok());
        parts.curves.insert(
            keys[0],
            LearningCurve::from_pairs(&[(1.0, 0.2), (4.0, 0.3)], CurveKind::SizeIndexed).unwrap(),
        );
        assert!(MetaDataset::from_parts(parts).is_err());
    }
}
