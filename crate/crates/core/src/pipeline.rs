//! Two-step training, the trade-off sweep and the baselines.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{expected_cost, pairwise_viol};
use crate::model::{dot, CostMatrix, Dataset, FairnessNotion, LinearScorer, ModelMetadata, Normalizer, ThresholdModel, Thresholds};
use crate::reduction::{build_pairwise_dataset, train_fair_scorer, FairClassifierConfig, TrainingReport};
use crate::rng::{stream_rng, Stream};
use crate::thresholds::{local_search, InitPolicy, ScoredSamples, ThresholdObjectiveConfig};

/// `λ = k·λ'/(1 - λ')`, the inverse of `λ' = λ/(k + λ)`.
pub fn lambda_from_prime(lambda_prime: f64, k: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda_prime) {
        return Err(Error::InvalidConfig(format!("lambda' must lie in [0, 1), got {lambda_prime}")));
    }
    Ok(k as f64 * lambda_prime / (1.0 - lambda_prime))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStepConfig {
    pub notion: FairnessNotion,
    /// Fairness weight of the scorer stage.
    pub mu: f64,
    /// Fairness weight of the threshold stage, mapped to `λ`.
    pub lambda_prime: f64,
    pub cost: CostMatrix,
    pub scorer: FairClassifierConfig,
    pub restarts: usize,
    pub init: InitPolicy,
    pub max_iterations: Option<usize>,
    pub seed: u64,
}

impl TwoStepConfig {
    /// `μ = λ' = mu_lambda`.
    pub fn coupled(notion: FairnessNotion, mu_lambda: f64, cost: CostMatrix) -> Self {
        Self {
            notion,
            mu: mu_lambda,
            lambda_prime: mu_lambda,
            cost,
            scorer: FairClassifierConfig::default(),
            restarts: 10,
            init: InitPolicy::Random,
            max_iterations: None,
            seed: 0,
        }
    }

    fn threshold_config(&self, lambda: f64) -> ThresholdObjectiveConfig {
        ThresholdObjectiveConfig {
            restarts: self.restarts,
            init: self.init,
            max_iterations: self.max_iterations,
            seed: self.seed,
            ..ThresholdObjectiveConfig::new(lambda, self.cost.clone(), self.notion)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub cost: f64,
    pub violation: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub scorer_secs: f64,
    pub threshold_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub mu_lambda: f64,
    pub mu: f64,
    pub lambda_prime: f64,
    pub lambda: f64,
    pub model: ThresholdModel,
    pub train: SplitMetrics,
    pub test: Option<SplitMetrics>,
    /// Fairness gap of the winning classifier on the pairwise data.
    pub scorer_gap: f64,
    pub seed: u64,
    /// Wall-clock times; left out of serialized output to keep it
    /// reproducible.
    #[serde(skip)]
    pub timings: Timings,
}

/// Mean cost and pairwise violation of a model on a dataset.
pub fn evaluate(model: &ThresholdModel, data: &Dataset, cost: &CostMatrix, notion: FairnessNotion) -> Result<SplitMetrics> {
    let preds = model.predict_dataset(data)?;
    Ok(SplitMetrics {
        cost: expected_cost(data.labels(), &preds, cost)?,
        violation: pairwise_viol(notion, data.attrs(), data.labels(), &preds, data.k(), data.n_groups())?.violation,
    })
}

fn check_pipeline(data: &Dataset, notion: FairnessNotion, cost: &CostMatrix) -> Result<()> {
    if !matches!(notion, FairnessNotion::PairwiseDp | FairnessNotion::PairwiseEo) {
        return Err(Error::Unsupported(format!("training supports pairwise DP and pairwise EO, not {notion}")));
    }
    if cost.k() != data.k() {
        return Err(Error::InvalidConfig(format!(
            "cost matrix is {}×{} but the data has k = {}",
            cost.k(),
            cost.k(),
            data.k()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoStepOutcome {
    pub point: FrontierPoint,
    pub scorer_report: TrainingReport,
}

/// Fair scorer on label-distinct pairs, then fair thresholds on its
/// training scores. Features are standardized with training statistics.
pub fn train_two_step(train: &Dataset, config: &TwoStepConfig) -> Result<TwoStepOutcome> {
    check_pipeline(train, config.notion, &config.cost)?;
    let lambda = lambda_from_prime(config.lambda_prime, train.k())?;
    let normalizer = Normalizer::fit(train);
    let z = train.normalized(&normalizer)?;

    let started = Instant::now();
    let scorer_config = FairClassifierConfig {
        mu: config.mu,
        seed: config.seed,
        ..config.scorer.clone()
    };
    let pairs = build_pairwise_dataset(&z, scorer_config.pair_cap, config.seed)?;
    let (scorer, scorer_report) = train_fair_scorer(&pairs, &scorer_config, config.notion)?;
    let scorer_secs = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let scores: Vec<f64> = z.rows().map(|x| dot(scorer.weights(), x)).collect();
    let samples = ScoredSamples::new(&scores, z.labels(), z.attrs(), z.n_groups())?;
    let search = local_search(&samples, &config.threshold_config(lambda))?;
    let threshold_secs = started.elapsed().as_secs_f64();

    let mut model = ThresholdModel::new(scorer, search.thresholds, normalizer)?;
    model.notion = Some(config.notion);
    model.metadata = ModelMetadata {
        mu: Some(config.mu),
        lambda_prime: Some(config.lambda_prime),
        seed: Some(config.seed),
        kind: Some("two_step".into()),
        ..Default::default()
    };
    let train_metrics = evaluate(&model, train, &config.cost, config.notion)?;
    let point = FrontierPoint {
        mu_lambda: config.lambda_prime,
        mu: config.mu,
        lambda_prime: config.lambda_prime,
        lambda,
        model,
        train: train_metrics,
        test: None,
        scorer_gap: scorer_report.winning_point().gap,
        seed: config.seed,
        timings: Timings {
            scorer_secs,
            threshold_secs,
        },
    };
    Ok(TwoStepOutcome { point, scorer_report })
}

/// How a sweep value sets the two fairness weights.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `μ = λ' = value`.
    #[default]
    Coupled,
    /// `μ = value`, `λ' = 0`: only the scorer is fair.
    ScorerOnly,
    /// `μ = 0`, `λ' = value`: only the thresholds are fair.
    ThresholdsOnly,
}

impl Coupling {
    pub fn weights(self, value: f64) -> (f64, f64) {
        match self {
            Coupling::Coupled => (value, value),
            Coupling::ScorerOnly => (value, 0.0),
            Coupling::ThresholdsOnly => (0.0, value),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffConfig {
    pub grid: Vec<f64>,
    pub coupling: Coupling,
    /// Bisect neighbouring values whose violations differ by more than this.
    pub refine_gap: Option<f64>,
    pub refine_budget: usize,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        Self {
            grid: (0..10).map(|i| i as f64 / 10.0).collect(),
            coupling: Coupling::Coupled,
            refine_gap: None,
            refine_budget: 5,
        }
    }
}

impl TradeoffConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("the sweep grid is empty".into()));
        }
        if let Some(v) = self.grid.iter().find(|v| !(0.0..1.0).contains(*v)) {
            return Err(Error::InvalidConfig(format!("sweep values must lie in [0, 1), got {v}")));
        }
        if self.refine_gap.is_some_and(|g| !(g >= 0.0)) {
            return Err(Error::InvalidConfig("refinement gap must be non-negative".into()));
        }
        Ok(())
    }
}

/// Midpoint of the first neighbouring pair (by value) whose violations
/// differ by more than `gap`, skipping intervals too narrow to split.
pub fn next_refinement(points: &[(f64, f64)], gap: f64) -> Option<f64> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted.windows(2).find_map(|w| {
        let mid = (w[0].0 + w[1].0) / 2.0;
        let splittable = w[1].0 - w[0].0 > 1e-6;
        ((w[1].1 - w[0].1).abs() > gap && splittable).then_some(mid)
    })
}

/// One frontier point per sweep value (plus refinements), ordered by value.
/// Every point uses the same seed. Points are trained in parallel.
pub fn sweep(train: &Dataset, test: Option<&Dataset>, base: &TwoStepConfig, tradeoff: &TradeoffConfig) -> Result<Vec<FrontierPoint>> {
    tradeoff.validate()?;
    check_pipeline(train, base.notion, &base.cost)?;
    if let Some(t) = test {
        if t.dim() != train.dim() || t.k() != train.k() {
            return Err(Error::InvalidDataset("train and test data differ in dimension or k".into()));
        }
    }
    let run = |value: f64| -> Result<FrontierPoint> {
        let (mu, lambda_prime) = tradeoff.coupling.weights(value);
        let config = TwoStepConfig {
            mu,
            lambda_prime,
            ..base.clone()
        };
        let mut point = train_two_step(train, &config)?.point;
        point.mu_lambda = value;
        if let Some(t) = test {
            point.test = Some(evaluate(&point.model, t, &base.cost, base.notion)?);
        }
        Ok(point)
    };
    let mut points = tradeoff
        .grid
        .par_iter()
        .map(|&v| run(v))
        .collect::<Result<Vec<_>>>()?;
    if let Some(gap) = tradeoff.refine_gap {
        for _ in 0..tradeoff.refine_budget {
            let summary: Vec<(f64, f64)> = points
                .iter()
                .map(|p| (p.mu_lambda, p.test.unwrap_or(p.train).violation))
                .collect();
            let Some(value) = next_refinement(&summary, gap) else { break };
            points.push(run(value)?);
        }
    }
    points.sort_by(|a, b| a.mu_lambda.total_cmp(&b.mu_lambda));
    Ok(points)
}

/// Frontier as CSV with one row per point and split.
pub fn frontier_csv(points: &[FrontierPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mu_lambda", "split", "cost", "violation", "scorer_gap", "seed"])?;
    for p in points {
        let splits = std::iter::once(("train", p.train)).chain(p.test.map(|t| ("test", t)));
        for (name, m) in splits {
            w.write_record([
                p.mu_lambda.to_string(),
                name.to_string(),
                m.cost.to_string(),
                m.violation.to_string(),
                p.scorer_gap.to_string(),
                p.seed.to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Lower median of the labels.
pub fn lower_median(labels: &[usize]) -> Result<usize> {
    if labels.is_empty() {
        return Err(Error::InvalidDataset("no labels".into()));
    }
    let mut sorted = labels.to_vec();
    sorted.sort_unstable();
    Ok(sorted[(sorted.len() - 1) / 2])
}

/// Zero scorer whose thresholds make every prediction the lower median label.
pub fn constant_median_baseline(train: &Dataset) -> Result<ThresholdModel> {
    let m = lower_median(train.labels())?;
    let k = train.k();
    let theta = std::iter::repeat(-1.0)
        .take(m - 1)
        .chain(std::iter::repeat(1.0).take(k - m))
        .collect();
    let mut model = ThresholdModel::new(
        LinearScorer::zeros(train.dim()),
        Thresholds::new(theta)?,
        Normalizer::identity(train.dim()),
    )?;
    model.metadata.kind = Some("constant_median".into());
    Ok(model)
}

fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}


/// `log(σ(b) - σ(a))` for `a < b`, either side possibly infinite.
fn log_sigmoid_diff(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return log_sigmoid(b);
    }
    if b == f64::INFINITY {
        return log_sigmoid(-a);
    }
    // σ(b) - σ(a) = σ(-a) - σ(-b); pick the form away from saturation.
    let (hi, lo) = if a > 0.0 { (log_sigmoid(-a), log_sigmoid(-b)) } else { (log_sigmoid(b), log_sigmoid(a)) };
    hi + (-(lo - hi).exp_m1()).ln()
}

/// Proportional-odds parameters: `P[y <= j | x] = σ(θ_j - w·x)` with
/// `θ_1 = b` and `θ_j = θ_{j-1} + exp(δ_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PomParams {
    pub w: Vec<f64>,
    pub b: f64,
    pub deltas: Vec<f64>,
}

impl PomParams {
    pub fn thetas(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.deltas.len() + 1);
        out.push(self.b);
        for d in &self.deltas {
            let last = *out.last().expect("non-empty");
            out.push(last + d.exp());
        }
        out
    }

    /// `[w…, b, δ…]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.w.iter().copied().chain([self.b]).chain(self.deltas.iter().copied()).collect()
    }

    pub fn from_vec(v: &[f64], dim: usize) -> Self {
        Self {
            w: v[..dim].to_vec(),
            b: v[dim],
            deltas: v[dim + 1..].to_vec(),
        }
    }

    /// Class probabilities at score `s`.
    pub fn probabilities(&self, s: f64) -> Vec<f64> {
        let thetas = self.thetas();
        let k = thetas.len() + 1;
        (1..=k)
            .map(|j| {
                let a = if j == 1 { f64::NEG_INFINITY } else { thetas[j - 2] - s };
                let b = if j == k { f64::INFINITY } else { thetas[j - 1] - s };
                log_sigmoid_diff(a, b).exp()
            })
            .collect()
    }

    /// Most probable class at score `s`, lowest on ties.
    pub fn most_probable(&self, s: f64) -> usize {
        let p = self.probabilities(s);
        let mut best = 0;
        for j in 1..p.len() {
            if p[j] > p[best] {
                best = j;
            }
        }
        best + 1
    }
}

/// Mean log-likelihood of the proportional-odds model on a dataset.
pub struct PomProblem<'a> {
    data: &'a Dataset,
}

impl<'a> PomProblem<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        Self { data }
    }

    fn check(&self, params: &PomParams) -> Result<()> {
        if params.w.len() != self.data.dim() || params.deltas.len() + 2 != self.data.k() {
            return Err(Error::DimensionMismatch {
                expected: self.data.dim() + self.data.k() - 1,
                found: params.w.len() + params.deltas.len() + 1,
            });
        }
        Ok(())
    }

    pub fn log_likelihood(&self, params: &PomParams) -> Result<f64> {
        self.check(params)?;
        let thetas = params.thetas();
        let k = self.data.k();
        let total: f64 = self
            .data
            .rows()
            .zip(self.data.labels())
            .map(|(x, &y)| {
                let s = dot(&params.w, x);
                let a = if y == 1 { f64::NEG_INFINITY } else { thetas[y - 2] - s };
                let b = if y == k { f64::INFINITY } else { thetas[y - 1] - s };
                log_sigmoid_diff(a, b)
            })
            .sum();
        Ok(total / self.data.len() as f64)
    }

    /// Gradient of [`log_likelihood`](Self::log_likelihood) in the layout of
    /// [`PomParams::to_vec`].
    pub fn gradient(&self, params: &PomParams) -> Result<Vec<f64>> {
        self.check(params)?;
        let thetas = params.thetas();
        let k = self.data.k();
        let dim = self.data.dim();
        let mut gw = vec![0.0; dim];
        let mut gtheta = vec![0.0; k - 1];
        for (x, &y) in self.data.rows().zip(self.data.labels()) {
            let s = dot(&params.w, x);
            let a = if y == 1 { f64::NEG_INFINITY } else { thetas[y - 2] - s };
            let b = if y == k { f64::INFINITY } else { thetas[y - 1] - s };
            let lp = log_sigmoid_diff(a, b);
            // d/du σ(u) = σ(u)σ(-u), divided by the likelihood of the sample.
            let slope = |u: f64| {
                if u.is_infinite() {
                    0.0
                } else {
                    (log_sigmoid(u) + log_sigmoid(-u) - lp).exp()
                }
            };
            let (da, db) = (slope(a), slope(b));
            if y > 1 {
                gtheta[y - 2] -= da;
            }
            if y < k {
                gtheta[y - 1] += db;
            }
            let ds = da - db;
            gw.iter_mut().zip(x).for_each(|(g, xi)| *g += ds * xi);
        }
        let n = self.data.len() as f64;
        let mut out: Vec<f64> = gw.into_iter().map(|g| g / n).collect();
        let gtheta: Vec<f64> = gtheta.into_iter().map(|g| g / n).collect();
        out.push(gtheta.iter().sum());
        for (i, d) in params.deltas.iter().enumerate() {
            out.push(d.exp() * gtheta[i + 1..].iter().sum::<f64>());
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PomConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for PomConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PomFit {
    pub model: ThresholdModel,
    pub params: PomParams,
    pub log_likelihood: f64,
    /// Mean log-likelihood after each accepted step, starting point first.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn pom_start(data: &Dataset) -> PomParams {
    let k = data.k();
    let n = data.len() as f64;
    let mut counts = vec![0usize; k + 1];
    for &y in data.labels() {
        counts[y] += 1;
    }
    let mut cumulative = 0usize;
    let mut thetas = Vec::with_capacity(k - 1);
    for c in &counts[1..k] {
        cumulative += c;
        let p = (cumulative as f64 / n).clamp(1e-6, 1.0 - 1e-6);
        let logit = (p / (1.0 - p)).ln();
        let floor = thetas.last().map_or(f64::NEG_INFINITY, |t: &f64| t + 1e-3);
        thetas.push(logit.max(floor));
    }
    PomParams {
        w: vec![0.0; data.dim()],
        b: thetas[0],
        deltas: thetas.windows(2).map(|t| (t[1] - t[0]).ln()).collect(),
    }
}

/// Score cut points of the most-probable-class rule, by bisection.
fn pom_thresholds(params: &PomParams) -> Result<Thresholds> {
    let thetas = params.thetas();
    let k = thetas.len() + 1;
    let span = 50.0 + thetas.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let mut cuts = Vec::with_capacity(k - 1);
    for j in 1..k {
        let (mut lo, mut hi) = (-span, span);
        if params.most_probable(lo) > j {
            cuts.push(lo);
            continue;
        }
        if params.most_probable(hi) <= j {
            cuts.push(hi);
            continue;
        }
        for _ in 0..200 {
            let mid = lo + (hi - lo) / 2.0;
            if mid <= lo || mid >= hi {
                break;
            }
            if params.most_probable(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        cuts.push(lo);
    }
    for i in 1..cuts.len() {
        cuts[i] = cuts[i].max(cuts[i - 1]);
    }
    Thresholds::new(cuts)
}

/// Proportional-odds model fitted by gradient ascent with backtracking on
/// standardized features; steps never decrease the likelihood. Prediction
/// is the most probable class, a thresholding of `w·x`.
pub fn fit_pom(train: &Dataset, config: &PomConfig) -> Result<PomFit> {
    let normalizer = Normalizer::fit(train);
    let z = train.normalized(&normalizer)?;
    let problem = PomProblem::new(&z);
    let dim = z.dim();
    let mut params = pom_start(&z);
    let mut ll = problem.log_likelihood(&params)?;
    let mut history = vec![ll];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        let g = problem.gradient(&params)?;
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm <= config.tolerance {
            converged = true;
            break;
        }
        let gsq: f64 = g.iter().map(|v| v * v).sum();
        let current = params.to_vec();
        let mut accepted = false;
        while step > 1e-16 {
            let cand: Vec<f64> = current.iter().zip(&g).map(|(p, gi)| p + step * gi).collect();
            let cand = PomParams::from_vec(&cand, dim);
            let value = problem.log_likelihood(&cand)?;
            if value.is_finite() && value >= ll + 1e-4 * step * gsq {
                params = cand;
                ll = value;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            break;
        }
        history.push(ll);
        iterations += 1;
        step *= 2.0;
    }
    let thresholds = pom_thresholds(&params)?;
    let mut model = ThresholdModel::new(LinearScorer::new(params.w.clone())?, thresholds, normalizer)?;
    model.metadata.kind = Some("pom".into());
    Ok(PomFit {
        model,
        params,
        log_likelihood: ll,
        history,
        iterations,
        converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixturePoint {
    pub p: f64,
    pub cost: f64,
    pub violation: f64,
}

/// Randomized mixture of a base model with the training median: every test
/// prediction independently becomes the median with probability `p`.
/// `p = 0` and `p = 1` are evaluated exactly; other values average over
/// `trials` seeded draws.
pub fn mixture_eval(
    base: &ThresholdModel,
    train: &Dataset,
    test: &Dataset,
    p_grid: &[f64],
    trials: usize,
    cost: &CostMatrix,
    notion: FairnessNotion,
    seed: u64,
) -> Result<Vec<MixturePoint>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if let Some(p) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidConfig(format!("mixture probability {p} outside [0, 1]")));
    }
    let median = lower_median(train.labels())?;
    let base_preds = base.predict_dataset(test)?;
    let score = |preds: &[usize]| -> Result<(f64, f64)> {
        Ok((
            expected_cost(test.labels(), preds, cost)?,
            pairwise_viol(notion, test.attrs(), test.labels(), preds, test.k(), test.n_groups())?.violation,
        ))
    };
    p_grid
        .iter()
        .enumerate()
        .map(|(pi, &p)| {
            let (cost, violation) = if p == 0.0 {
                score(&base_preds)?
            } else if p == 1.0 {
                score(&vec![median; test.len()])?
            } else {
                let runs = (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = stream_rng(seed, Stream::Mixture, ((pi as u64) << 32) | t as u64);
                        let preds: Vec<usize> = base_preds
                            .iter()
                            .map(|&f| if rng.gen_bool(p) { median } else { f })
                            .collect();
                        score(&preds)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let m = trials as f64;
                (
                    runs.iter().map(|r| r.0).sum::<f64>() / m,
                    runs.iter().map(|r| r.1).sum::<f64>() / m,
                )
            };
            Ok(MixturePoint { p, cost, violation })
        })
        .collect()
}
