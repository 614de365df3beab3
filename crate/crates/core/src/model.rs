//! Domain types shared by every stage: datasets, cost matrices, threshold
//! models and the fairness notions they are audited against.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinal-regression samples with a protected attribute.
///
/// Features are stored row-major. Labels are 1-based (`1..=k`), attribute ids
/// are 0-based (`0..attribute_names.len()`).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
    attrs: Vec<usize>,
    k: usize,
    attribute_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        attrs: Vec<usize>,
        k: usize,
        attribute_names: Vec<String>,
    ) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            let found = rows.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(0);
            return Err(Error::DimensionMismatch {
                expected: dim,
                found,
            });
        }
        let features = rows.into_iter().flatten().collect();
        Self::from_flat(dim, features, labels, attrs, k, attribute_names)
    }

    pub fn from_flat(
        dim: usize,
        features: Vec<f64>,
        labels: Vec<usize>,
        attrs: Vec<usize>,
        k: usize,
        attribute_names: Vec<String>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidDataset("dataset has no samples".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidDataset("feature dimension must be at least 1".into()));
        }
        if features.len() != n * dim {
            return Err(Error::LengthMismatch {
                what: "features",
                expected: n * dim,
                found: features.len(),
            });
        }
        if attrs.len() != n {
            return Err(Error::LengthMismatch {
                what: "attributes",
                expected: n,
                found: attrs.len(),
            });
        }
        if k < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 classes, got k = {k}")));
        }
        if let Some(&y) = labels.iter().find(|&&y| y < 1 || y > k) {
            return Err(Error::InvalidDataset(format!("label {y} outside 1..={k}")));
        }
        if attribute_names.is_empty() {
            return Err(Error::InvalidDataset("at least one attribute value is required".into()));
        }
        if let Some(&a) = attrs.iter().find(|&&a| a >= attribute_names.len()) {
            return Err(Error::InvalidDataset(format!(
                "attribute id {a} outside 0..{}",
                attribute_names.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("features must be finite".into()));
        }
        Ok(Self {
            dim,
            features,
            labels,
            attrs,
            k,
            attribute_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_groups(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.dim)
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn attrs(&self) -> &[usize] {
        &self.attrs
    }

    /// New dataset made of the given rows (in the given order); `k` and the
    /// attribute vocabulary are kept.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Self::from_flat(
            self.dim,
            features,
            indices.iter().map(|&i| self.labels[i]).collect(),
            indices.iter().map(|&i| self.attrs[i]).collect(),
            self.k,
            self.attribute_names.clone(),
        )
    }

    /// Copy of the dataset with every row passed through `normalizer`.
    pub fn normalized(&self, normalizer: &Normalizer) -> Result<Self> {
        let mut features = Vec::with_capacity(self.features.len());
        for row in self.rows() {
            features.extend(normalizer.apply(row)?);
        }
        Self::from_flat(
            self.dim,
            features,
            self.labels.clone(),
            self.attrs.clone(),
            self.k,
            self.attribute_names.clone(),
        )
    }
}

/// k×k misclassification costs, indexed by (true label, predicted label).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// Validates non-negativity, a zero diagonal and V-shaped rows.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k < 2 {
            return Err(Error::InvalidCostMatrix(format!("need k >= 2, got {k}")));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != k) {
            return Err(Error::InvalidCostMatrix(format!(
                "row {} has {} entries, expected {k}",
                r + 1,
                rows[r].len()
            )));
        }
        let mut problems = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if !c.is_finite() || c < 0.0 {
                    problems.push(format!("entry ({},{}) = {c} is negative or not finite", i + 1, j + 1));
                }
            }
            if row[i] != 0.0 {
                problems.push(format!("diagonal entry ({0},{0}) = {1} is not zero", i + 1, row[i]));
            }
            for j in 1..=i {
                if row[j - 1] < row[j] {
                    problems.push(format!("row {} increases towards the diagonal at column {}", i + 1, j));
                }
            }
            for j in i..k - 1 {
                if row[j] > row[j + 1] {
                    problems.push(format!("row {} decreases away from the diagonal at column {}", i + 1, j + 2));
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::InvalidCostMatrix(problems.join("; ")));
        }
        Ok(Self {
            k,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    fn from_fn(k: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let entries = (1..=k)
            .flat_map(|i| (1..=k).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self { k, entries }
    }

    /// `C[i][j] = |i - j|`; the expected cost is the mean absolute error.
    pub fn absolute(k: usize) -> Self {
        Self::from_fn(k, |i, j| i.abs_diff(j) as f64)
    }

    /// `C[i][j] = 1{i != j}`.
    pub fn binary(k: usize) -> Self {
        Self::from_fn(k, |i, j| f64::from(u8::from(i != j)))
    }

    /// `C[i][j] = |i - j| + |i - j| * 1{j > i}`: over-prediction costs double.
    pub fn asymmetric(k: usize) -> Self {
        Self::from_fn(k, |i, j| {
            let d = i.abs_diff(j) as f64;
            if j > i {
                2.0 * d
            } else {
                d
            }
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Cost of predicting `pred` for a sample with label `truth` (both 1-based).
    #[inline]
    pub fn get(&self, truth: usize, pred: usize) -> f64 {
        self.entries[(truth - 1) * self.k + (pred - 1)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.k).map(<[f64]>::to_vec).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearScorer {
    w: Vec<f64>,
}

impl LinearScorer {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("scorer weights must be finite".into()));
        }
        Ok(Self { w })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { w: vec![0.0; dim] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.w.len(),
                found: x.len(),
            });
        }
        Ok(dot(&self.w, x))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ordered thresholds `θ_1 <= ... <= θ_{k-1}` with implicit `θ_0 = -inf`
/// and `θ_k = +inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    theta: Vec<f64>,
}

impl Thresholds {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|t| t.is_nan()) {
            return Err(Error::InvalidThresholds("thresholds must not be NaN".into()));
        }
        if let Some(w) = theta.windows(2).find(|w| w[0] > w[1]) {
            return Err(Error::InvalidThresholds(format!(
                "thresholds must be non-decreasing, found {} > {}",
                w[0], w[1]
            )));
        }
        Ok(Self { theta })
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }

    /// Number of classes these thresholds partition the score line into.
    pub fn k(&self) -> usize {
        self.theta.len() + 1
    }

    /// The unique label `i` with `score ∈ (θ_{i-1}, θ_i]`.
    #[inline]
    pub fn label_for(&self, score: f64) -> usize {
        1 + self.theta.partition_point(|&t| t < score)
    }
}

/// Per-feature standardization fitted on a training set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Normalizer {
    pub fn identity(dim: usize) -> Self {
        Self {
            means: vec![0.0; dim],
            stds: vec![1.0; dim],
        }
    }

    pub fn new(means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        if means.len() != stds.len() {
            return Err(Error::LengthMismatch {
                what: "feature_stds",
                expected: means.len(),
                found: stds.len(),
            });
        }
        if stds.iter().any(|s| !s.is_finite() || *s <= 0.0) || means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidConfig(
                "normalizer needs finite means and positive standard deviations".into(),
            ));
        }
        Ok(Self { means, stds })
    }

    /// Zero mean, unit (population) variance per feature. Constant features
    /// keep a standard deviation of 1.
    pub fn fit(data: &Dataset) -> Self {
        let n = data.len() as f64;
        let d = data.dim();
        let mut means = vec![0.0; d];
        for row in data.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; d];
        for row in data.rows() {
            for ((s, v), m) in vars.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let stds = vars
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { means, stds }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                found: x.len(),
            });
        }
        Ok(x.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FairnessNotion {
    PairwiseDp,
    PairwiseEo,
    PairwiseEqOdds,
    StandardDp,
    StandardEo,
    EqualizedOdds,
}

impl fmt::Display for FairnessNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FairnessNotion::PairwiseDp => "pairwise DP",
            FairnessNotion::PairwiseEo => "pairwise EO",
            FairnessNotion::PairwiseEqOdds => "pairwise equalized odds",
            FairnessNotion::StandardDp => "standard DP",
            FairnessNotion::StandardEo => "standard EO",
            FairnessNotion::EqualizedOdds => "equalized odds",
        };
        f.write_str(s)
    }
}

/// Provenance stored alongside a serialized model.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub mu: Option<f64>,
    pub lambda_prime: Option<f64>,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

/// Linear scorer plus ordered thresholds, applied to standardized inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelDocument", try_from = "ModelDocument")]
pub struct ThresholdModel {
    pub scorer: LinearScorer,
    pub thresholds: Thresholds,
    pub normalizer: Normalizer,
    pub notion: Option<FairnessNotion>,
    pub metadata: ModelMetadata,
}

impl ThresholdModel {
    pub fn new(scorer: LinearScorer, thresholds: Thresholds, normalizer: Normalizer) -> Result<Self> {
        if scorer.dim() != normalizer.dim() {
            return Err(Error::DimensionMismatch {
                expected: scorer.dim(),
                found: normalizer.dim(),
            });
        }
        Ok(Self {
            scorer,
            thresholds,
            normalizer,
            notion: None,
            metadata: ModelMetadata::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.scorer.dim()
    }

    pub fn k(&self) -> usize {
        self.thresholds.k()
    }

    /// Score of the raw (unnormalized) input.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let z = self.normalizer.apply(x)?;
        self.scorer.score(&z)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(self.thresholds.label_for(self.score(x)?))
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<usize>> {
        data.rows().map(|x| self.predict(x)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// On-disk model layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct ModelDocument {
    dim: usize,
    k: usize,
    w: Vec<f64>,
    theta: Vec<f64>,
    feature_means: Vec<f64>,
    feature_stds: Vec<f64>,
    notion: Option<FairnessNotion>,
    metadata: ModelMetadata,
}

impl From<&ThresholdModel> for ModelDocument {
    fn from(m: &ThresholdModel) -> Self {
        Self {
            dim: m.dim(),
            k: m.k(),
            w: m.scorer.weights().to_vec(),
            theta: m.thresholds.values().to_vec(),
            feature_means: m.normalizer.means().to_vec(),
            feature_stds: m.normalizer.stds().to_vec(),
            notion: m.notion,
            metadata: m.metadata.clone(),
        }
    }
}

impl From<ThresholdModel> for ModelDocument {
    fn from(m: ThresholdModel) -> Self {
        Self::from(&m)
    }
}

impl TryFrom<ModelDocument> for ThresholdModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        if doc.w.len() != doc.dim {
            return Err(Error::DimensionMismatch {
                expected: doc.dim,
                found: doc.w.len(),
            });
        }
        if doc.theta.len() + 1 != doc.k {
            return Err(Error::LengthMismatch {
                what: "theta",
                expected: doc.k.saturating_sub(1),
                found: doc.theta.len(),
            });
        }
        let mut model = ThresholdModel::new(
            LinearScorer::new(doc.w)?,
            Thresholds::new(doc.theta)?,
            Normalizer::new(doc.feature_means, doc.feature_stds)?,
        )?;
        model.notion = doc.notion;
        model.metadata = doc.metadata;
        Ok(model)
    }
}
