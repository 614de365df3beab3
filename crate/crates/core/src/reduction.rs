//! Learning a fair linear scoring function through fair binary
//! classification on difference pairs.
//!
//! Every ordered pair `(i, j)` with `y_i != y_j` becomes a binary instance
//! `(x_i - x_j, sign(y_i - y_j), (a_i, a_j))`. A linear classifier
//! `c_w(x') = +1 iff w·x' > 0` on these instances is also a scorer
//! `s_w(x) = w·x`, and the classifier's group-swap gap on the pairs equals the
//! scorer's pairwise violation on the original data (conditioned on
//! `y_1 != y_2` for DP).
//!
//! The fair classifier follows the multiplier-grid reduction: each grid
//! point turns the constrained problem into a cost-sensitive one, solved
//! with an intercept-free L2-regularized logistic regression, and the grid
//! point minimizing `(1 - μ)·error + μ·gap` wins.

use nalgebra::{DMatrix, DVector};
use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, Dataset, FairnessNotion, LinearScorer};
use crate::rng::{stream_rng, Stream};

/// Binary instances built from label-distinct ordered pairs of a dataset.
#[derive(Clone, Debug)]
pub struct PairwiseDataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<i8>,
    pairs: Vec<(usize, usize)>,
    n_groups: usize,
    source_size: usize,
    total_pairs: usize,
    cap_applied: bool,
    seed: u64,
}

impl PairwiseDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.features[t * self.dim..(t + 1) * self.dim]
    }

    /// `+1` when the first sample of the pair has the larger label.
    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    /// Ordered attribute pair `(a_i, a_j)` of each instance.
    pub fn attribute_pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    /// Number of label-distinct ordered pairs before subsampling.
    pub fn total_pairs(&self) -> usize {
        self.total_pairs
    }

    pub fn cap_applied(&self) -> bool {
        self.cap_applied
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// All ordered pairs `(i, j)` with `y_i != y_j`, in row-major `(i, j)` order.
/// When there are more than `cap`, a uniform subsample of `cap` pairs
/// (without replacement, seeded) is kept in the same order.
pub fn build_pairwise_dataset(data: &Dataset, cap: usize, seed: u64) -> Result<PairwiseDataset> {
    if cap == 0 {
        return Err(Error::InvalidConfig("pair cap must be at least 1".into()));
    }
    let n = data.len();
    let labels = data.labels();
    let mut per_label = vec![0usize; data.k() + 1];
    for &y in labels {
        per_label[y] += 1;
    }
    let total: usize = labels.iter().map(|&y| n - per_label[y]).sum();
    if total == 0 {
        return Err(Error::DegenerateLabels);
    }
    let keep: Option<Vec<usize>> = (total > cap).then(|| {
        let mut rng = stream_rng(seed, Stream::Subsample, 0);
        let mut picked = index::sample(&mut rng, total, cap).into_vec();
        picked.sort_unstable();
        picked
    });
    let size = keep.as_ref().map_or(total, Vec::len);
    let dim = data.dim();
    let mut out = PairwiseDataset {
        dim,
        features: Vec::with_capacity(size * dim),
        labels: Vec::with_capacity(size),
        pairs: Vec::with_capacity(size),
        n_groups: data.n_groups(),
        source_size: n,
        total_pairs: total,
        cap_applied: keep.is_some(),
        seed,
    };
    let mut ordinal = 0usize;
    let mut next_keep = 0usize;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                continue;
            }
            let take = match &keep {
                None => true,
                Some(picked) => {
                    let hit = picked.get(next_keep) == Some(&ordinal);
                    next_keep += usize::from(hit);
                    hit
                }
            };
            ordinal += 1;
            if !take {
                continue;
            }
            let (xi, xj) = (data.row(i), data.row(j));
            out.features.extend(xi.iter().zip(xj).map(|(a, b)| a - b));
            out.labels.push(if labels[i] > labels[j] { 1 } else { -1 });
            out.pairs.push((data.attrs()[i], data.attrs()[j]));
        }
    }
    Ok(out)
}

fn check_notion(notion: FairnessNotion) -> Result<()> {
    match notion {
        FairnessNotion::PairwiseDp | FairnessNotion::PairwiseEo => Ok(()),
        other => Err(Error::Unsupported(format!(
            "the scorer can only be trained for pairwise DP or pairwise EO, not {other}"
        ))),
    }
}

/// Instances that take part in the fairness constraint: all of them for DP,
/// only `y' = +1` for EO.
fn constrained(notion: FairnessNotion, label: i8) -> bool {
    notion == FairnessNotion::PairwiseDp || label == 1
}

/// Per ordered attribute pair: (instances in the constraint, of which
/// classified positive).
fn swap_counts(pd: &PairwiseDataset, notion: FairnessNotion, positive: impl Fn(usize) -> bool) -> Vec<(u64, u64)> {
    let g = pd.n_groups;
    let mut counts = vec![(0u64, 0u64); g * g];
    for (t, (&(a, b), &y)) in pd.pairs.iter().zip(&pd.labels).enumerate() {
        if constrained(notion, y) {
            let c = &mut counts[a * g + b];
            c.0 += 1;
            c.1 += u64::from(positive(t));
        }
    }
    counts
}

/// `max_{a < b} |P[c_w = 1 | a' = (a, b)] - P[c_w = 1 | a' = (b, a)]|`, with
/// probabilities additionally conditioned on `y' = +1` for EO. Pairs with an
/// empty side are skipped; returns 0 when none is left.
pub fn classifier_fairness_gap(w: &[f64], pd: &PairwiseDataset, notion: FairnessNotion) -> Result<f64> {
    check_notion(notion)?;
    if w.len() != pd.dim {
        return Err(Error::DimensionMismatch {
            expected: pd.dim,
            found: w.len(),
        });
    }
    let counts = swap_counts(pd, notion, |t| dot(w, pd.row(t)) > 0.0);
    Ok(gap_from_counts(&counts, pd.n_groups))
}

fn gap_from_counts(counts: &[(u64, u64)], g: usize) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..g {
        for b in a + 1..g {
            let (ta, pa) = counts[a * g + b];
            let (tb, pb) = counts[b * g + a];
            if ta > 0 && tb > 0 {
                worst = worst.max((pa as f64 / ta as f64 - pb as f64 / tb as f64).abs());
            }
        }
    }
    worst
}

/// `(1/N) Σ_t s_t log(1 + exp(-l_t w·x_t)) + γ ||w||²` over the selected
/// instances, `N` being their number.
pub struct WeightedLogistic<'a> {
    pd: &'a PairwiseDataset,
    rows: Vec<usize>,
    labels: Vec<f64>,
    weights: Vec<f64>,
    l2: f64,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl<'a> WeightedLogistic<'a> {
    /// `labels` and `weights` are indexed like `rows`.
    pub fn new(pd: &'a PairwiseDataset, rows: Vec<usize>, labels: Vec<f64>, weights: Vec<f64>, l2: f64) -> Result<Self> {
        if labels.len() != rows.len() || weights.len() != rows.len() {
            return Err(Error::LengthMismatch {
                what: "logistic labels/weights",
                expected: rows.len(),
                found: labels.len().min(weights.len()),
            });
        }
        if rows.is_empty() {
            return Err(Error::InvalidConfig("logistic regression needs at least one instance".into()));
        }
        if !(l2 >= 0.0) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidConfig("regularization and weights must be non-negative".into()));
        }
        Ok(Self {
            pd,
            rows,
            labels,
            weights,
            l2,
        })
    }

    /// The plain problem on the original pair labels with unit weights.
    pub fn unweighted(pd: &'a PairwiseDataset, rows: Vec<usize>, l2: f64) -> Result<Self> {
        let labels = rows.iter().map(|&t| f64::from(pd.labels[t])).collect();
        let weights = vec![1.0; rows.len()];
        Self::new(pd, rows, labels, weights, l2)
    }

    pub fn dim(&self) -> usize {
        self.pd.dim
    }

    pub fn value(&self, w: &[f64]) -> f64 {
        let n = self.rows.len() as f64;
        let data: f64 = self
            .rows
            .iter()
            .zip(&self.labels)
            .zip(&self.weights)
            .filter(|(_, &s)| s > 0.0)
            .map(|((&t, &l), &s)| s * softplus(-l * dot(w, self.pd.row(t))))
            .sum();
        data / n + self.l2 * dot(w, w)
    }

    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let n = self.rows.len() as f64;
        let mut g = vec![0.0; w.len()];
        for ((&t, &l), &s) in self.rows.iter().zip(&self.labels).zip(&self.weights) {
            if s == 0.0 {
                continue;
            }
            let x = self.pd.row(t);
            let coef = -s * l * sigmoid(-l * dot(w, x)) / n;
            g.iter_mut().zip(x).for_each(|(gi, xi)| *gi += coef * xi);
        }
        g.iter_mut().zip(w).for_each(|(gi, wi)| *gi += 2.0 * self.l2 * wi);
        g
    }

    fn hessian(&self, w: &[f64]) -> DMatrix<f64> {
        let d = w.len();
        let n = self.rows.len() as f64;
        let mut h = DMatrix::<f64>::zeros(d, d);
        for (&t, &s) in self.rows.iter().zip(&self.weights) {
            if s == 0.0 {
                continue;
            }
            let x = self.pd.row(t);
            let p = sigmoid(dot(w, x));
            let c = s * p * (1.0 - p) / n;
            for r in 0..d {
                let cr = c * x[r];
                for q in r..d {
                    h[(r, q)] += cr * x[q];
                }
            }
        }
        for r in 0..d {
            h[(r, r)] += 2.0 * self.l2;
            for q in 0..r {
                h[(r, q)] = h[(q, r)];
            }
        }
        h
    }

    /// Damped Newton iterations with backtracking line search. The gradient
    /// tolerance is relative to the mean instance weight.
    pub fn minimize(&self, max_iterations: usize, tolerance: f64) -> FitOutcome {
        let d = self.dim();
        let scale = (self.weights.iter().sum::<f64>() / self.weights.len() as f64).max(1.0);
        let tol = tolerance * scale;
        let max_abs = |g: &[f64]| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut w = vec![0.0; d];
        let mut f = self.value(&w);
        for it in 0..max_iterations {
            let g = self.gradient(&w);
            let gnorm = max_abs(&g);
            if gnorm <= tol {
                return FitOutcome {
                    w,
                    iterations: it,
                    converged: true,
                };
            }
            let direction = self
                .hessian(&w)
                .cholesky()
                .map(|c| c.solve(&DVector::from_column_slice(&g)))
                .map(|v| v.as_slice().to_vec())
                .unwrap_or_else(|| g.clone());
            let slope = dot(&g, &direction);
            let mut step = 1.0;
            let mut accepted = None;
            while step > 1e-14 {
                let cand: Vec<f64> = w.iter().zip(&direction).map(|(wi, di)| wi - step * di).collect();
                let fc = self.value(&cand);
                if fc < f && fc <= f - 1e-4 * step * slope {
                    accepted = Some((cand, fc));
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some((cand, fc)) => {
                    w = cand;
                    f = fc;
                }
                // No strict decrease at machine precision: stationary.
                None => {
                    return FitOutcome {
                        w,
                        iterations: it,
                        converged: gnorm <= tol.max(1e-6 * scale),
                    }
                }
            }
        }
        let gnorm = max_abs(&self.gradient(&w));
        FitOutcome {
            w,
            iterations: max_iterations,
            converged: gnorm <= tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOutcome {
    pub w: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairClassifierConfig {
    /// Weight of the fairness gap in the grid-point selection, in `[0, 1)`.
    pub mu: f64,
    pub grid_size: usize,
    pub grid_limit: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Fixed `γ` of the `γ||w||²` penalty; cross-validated when `None`.
    pub regularization: Option<f64>,
    pub regularization_grid: Vec<f64>,
    pub cv_folds: usize,
    pub pair_cap: usize,
    /// The fairness term of the cost-sensitive costs is multiplied by
    /// `fairness_scale · N` (`N` = number of pair instances).
    pub fairness_scale: f64,
    pub seed: u64,
}

impl Default for FairClassifierConfig {
    fn default() -> Self {
        Self {
            mu: 0.0,
            grid_size: 100,
            grid_limit: 3.0,
            max_iterations: 2500,
            tolerance: 1e-8,
            regularization: None,
            regularization_grid: (1..=5).map(|i| 10f64.powi(-i)).collect(),
            cv_folds: 10,
            pair_cap: 600_000,
            fairness_scale: 0.5,
            seed: 0,
        }
    }
}

impl FairClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.mu) {
            return Err(Error::InvalidConfig(format!("mu must lie in [0, 1), got {}", self.mu)));
        }
        if self.grid_size == 0 || self.pair_cap == 0 || self.cv_folds < 2 {
            return Err(Error::InvalidConfig(
                "grid_size and pair_cap must be positive and cv_folds at least 2".into(),
            ));
        }
        if !(self.grid_limit >= 0.0) || !(self.tolerance > 0.0) || !(self.fairness_scale >= 0.0) {
            return Err(Error::InvalidConfig("grid_limit, tolerance and fairness_scale must be non-negative".into()));
        }
        if self.regularization.is_none() && self.regularization_grid.is_empty() {
            return Err(Error::InvalidConfig("empty regularization grid".into()));
        }
        if let Some(g) = self.regularization.iter().chain(&self.regularization_grid).find(|g| !(**g > 0.0)) {
            return Err(Error::InvalidConfig(format!("regularization must be positive, got {g}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPointReport {
    pub lambda: Vec<f64>,
    pub error: f64,
    pub gap: f64,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub notion: FairnessNotion,
    pub mu: f64,
    pub regularization: f64,
    /// Mean held-out 0-1 error per candidate `γ` (empty if `γ` was fixed).
    pub cv_errors: Vec<(f64, f64)>,
    /// Ordered attribute pairs `(a, b)`, `a < b`, each owning one multiplier.
    pub constrained_pairs: Vec<(usize, usize)>,
    pub grid: Vec<GridPointReport>,
    pub winner: usize,
    pub all_converged: bool,
}

impl TrainingReport {
    pub fn winning_point(&self) -> &GridPointReport {
        &self.grid[self.winner]
    }
}

/// Cost-sensitive reweighting for one multiplier vector.
struct Reweighting {
    labels: Vec<f64>,
    weights: Vec<f64>,
}

struct ConstraintLayout {
    notion: FairnessNotion,
    pairs: Vec<(usize, usize)>,
    /// `counts[a * g + b]` = constrained instances with attribute pair (a, b).
    counts: Vec<(u64, u64)>,
    scale: f64,
}

impl ConstraintLayout {
    fn new(pd: &PairwiseDataset, notion: FairnessNotion, fairness_scale: f64) -> Self {
        let counts = swap_counts(pd, notion, |_| false);
        let g = pd.n_groups;
        let pairs = (0..g)
            .flat_map(|a| (a + 1..g).map(move |b| (a, b)))
            .filter(|&(a, b)| counts[a * g + b].0 > 0 && counts[b * g + a].0 > 0)
            .collect();
        Self {
            notion,
            pairs,
            counts,
            scale: fairness_scale * pd.len() as f64,
        }
    }

    fn reweight(&self, pd: &PairwiseDataset, multipliers: &[f64]) -> Reweighting {
        let g = pd.n_groups;
        // Extra cost of predicting +1, per ordered attribute pair.
        let mut shift = vec![0.0; g * g];
        for (&(a, b), &lambda) in self.pairs.iter().zip(multipliers) {
            shift[a * g + b] += lambda * self.scale / self.counts[a * g + b].0 as f64;
            shift[b * g + a] -= lambda * self.scale / self.counts[b * g + a].0 as f64;
        }
        let mut labels = Vec::with_capacity(pd.len());
        let mut weights = Vec::with_capacity(pd.len());
        for (&(a, b), &y) in pd.pairs.iter().zip(&pd.labels) {
            let fairness = if constrained(self.notion, y) { shift[a * g + b] } else { 0.0 };
            let cost_pos = f64::from(u8::from(y == -1)) + fairness;
            let cost_neg = f64::from(u8::from(y == 1));
            labels.push(if cost_pos < cost_neg { 1.0 } else { -1.0 });
            weights.push((cost_pos - cost_neg).abs());
        }
        Reweighting { labels, weights }
    }

    fn grid(&self, grid_size: usize, limit: f64) -> Vec<Vec<f64>> {
        let m = self.pairs.len();
        if m == 0 {
            return vec![Vec::new()];
        }
        let per_axis = if m == 1 {
            grid_size
        } else {
            ((grid_size as f64).powf(1.0 / m as f64).round() as usize).max(1)
        };
        let axis: Vec<f64> = if per_axis == 1 {
            vec![0.0]
        } else {
            (0..per_axis)
                .map(|i| -limit + 2.0 * limit * i as f64 / (per_axis - 1) as f64)
                .collect()
        };
        let mut points = vec![Vec::new()];
        for _ in 0..m {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// Weighted logistic fit of the cost-sensitive problem for one multiplier
/// vector (one multiplier per constrained attribute pair, see
/// [`TrainingReport::constrained_pairs`]).
pub fn fit_for_multipliers(
    pd: &PairwiseDataset,
    notion: FairnessNotion,
    multipliers: &[f64],
    regularization: f64,
    config: &FairClassifierConfig,
) -> Result<FitOutcome> {
    check_notion(notion)?;
    let layout = ConstraintLayout::new(pd, notion, config.fairness_scale);
    if multipliers.len() != layout.pairs.len() {
        return Err(Error::LengthMismatch {
            what: "multipliers",
            expected: layout.pairs.len(),
            found: multipliers.len(),
        });
    }
    let rw = layout.reweight(pd, multipliers);
    let problem = WeightedLogistic::new(pd, (0..pd.len()).collect(), rw.labels, rw.weights, regularization)?;
    Ok(problem.minimize(config.max_iterations, config.tolerance))
}

fn zero_one_error(w: &[f64], pd: &PairwiseDataset, rows: impl Iterator<Item = usize>) -> f64 {
    let mut wrong = 0u64;
    let mut total = 0u64;
    for t in rows {
        let pred = if dot(w, pd.row(t)) > 0.0 { 1 } else { -1 };
        wrong += u64::from(pred != pd.labels[t]);
        total += 1;
    }
    if total == 0 {
        0.0
    } else {
        wrong as f64 / total as f64
    }
}

/// Mean held-out 0-1 error of the unconstrained problem for each candidate
/// `γ`, from seeded k-fold cross-validation.
pub fn cross_validate_regularization(pd: &PairwiseDataset, config: &FairClassifierConfig) -> Result<Vec<(f64, f64)>> {
    let folds = config.cv_folds.min(pd.len());
    if folds < 2 {
        return Err(Error::InvalidConfig("too few pair instances for cross-validation".into()));
    }
    let mut order: Vec<usize> = (0..pd.len()).collect();
    order.shuffle(&mut stream_rng(config.seed, Stream::CrossValidation, 0));
    let mut fold_of = vec![0usize; pd.len()];
    for (pos, &t) in order.iter().enumerate() {
        fold_of[t] = pos % folds;
    }
    let jobs: Vec<(usize, usize)> = (0..config.regularization_grid.len())
        .flat_map(|g| (0..folds).map(move |f| (g, f)))
        .collect();
    let errors: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(g, f)| {
            let train: Vec<usize> = (0..pd.len()).filter(|&t| fold_of[t] != f).collect();
            let problem = WeightedLogistic::unweighted(pd, train, config.regularization_grid[g])?;
            let fit = problem.minimize(config.max_iterations, config.tolerance);
            Ok(zero_one_error(&fit.w, pd, (0..pd.len()).filter(|&t| fold_of[t] == f)))
        })
        .collect();
    let errors = errors.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(config
        .regularization_grid
        .iter()
        .enumerate()
        .map(|(g, &gamma)| {
            let mean = errors[g * folds..(g + 1) * folds].iter().sum::<f64>() / folds as f64;
            (gamma, mean)
        })
        .collect())
}

/// Trains the fair scorer on a pairwise dataset.
///
/// EO supports two groups and DP at most three; with more groups the
/// multiplier grid becomes impractical.
pub fn train_fair_scorer(
    pd: &PairwiseDataset,
    config: &FairClassifierConfig,
    notion: FairnessNotion,
) -> Result<(LinearScorer, TrainingReport)> {
    check_notion(notion)?;
    config.validate()?;
    let groups = pd.n_groups;
    if notion == FairnessNotion::PairwiseEo && groups > 2 {
        return Err(Error::Unsupported(format!(
            "fair scorer training for pairwise EO requires exactly two groups, got {groups}"
        )));
    }
    if groups > 3 {
        return Err(Error::Unsupported(format!(
            "fair scorer training supports at most three groups, got {groups}"
        )));
    }
    if pd.is_empty() {
        return Err(Error::DegenerateLabels);
    }

    let (regularization, cv_errors) = match config.regularization {
        Some(g) => (g, Vec::new()),
        None => {
            let cv = cross_validate_regularization(pd, config)?;
            let best = cv
                .iter()
                .copied()
                .fold(None, |best: Option<(f64, f64)>, cur| match best {
                    Some(b) if b.1 <= cur.1 => Some(b),
                    _ => Some(cur),
                })
                .map(|(g, _)| g)
                .expect("non-empty regularization grid");
            (best, cv)
        }
    };

    let layout = ConstraintLayout::new(pd, notion, config.fairness_scale);
    let grid = layout.grid(config.grid_size, config.grid_limit);
    let rows: Vec<usize> = (0..pd.len()).collect();
    let fits: Vec<Result<(GridPointReport, Vec<f64>)>> = grid
        .par_iter()
        .map(|lambda| {
            let rw = layout.reweight(pd, lambda);
            let problem = WeightedLogistic::new(pd, rows.clone(), rw.labels, rw.weights, regularization)?;
            let fit = problem.minimize(config.max_iterations, config.tolerance);
            let error = zero_one_error(&fit.w, pd, 0..pd.len());
            let gap = classifier_fairness_gap(&fit.w, pd, notion)?;
            Ok((
                GridPointReport {
                    lambda: lambda.clone(),
                    error,
                    gap,
                    objective: (1.0 - config.mu) * error + config.mu * gap,
                    converged: fit.converged,
                    iterations: fit.iterations,
                },
                fit.w,
            ))
        })
        .collect();
    let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;

    let norm = |l: &[f64]| l.iter().map(|v| v * v).sum::<f64>();
    let winner = (0..fits.len())
        .min_by(|&i, &j| {
            let (a, b) = (&fits[i].0, &fits[j].0);
            a.objective
                .total_cmp(&b.objective)
                .then(norm(&a.lambda).total_cmp(&norm(&b.lambda)))
                .then(i.cmp(&j))
        })
        .expect("grid has at least one point");
    let all_converged = fits.iter().all(|(r, _)| r.converged);
    let scorer = LinearScorer::new(fits[winner].1.clone())?;
    let report = TrainingReport {
        notion,
        mu: config.mu,
        regularization,
        cv_errors,
        constrained_pairs: layout.pairs.clone(),
        grid: fits.into_iter().map(|(r, _)| r).collect(),
        winner,
        all_converged,
    };
    Ok((scorer, report))
}
