//! Threshold selection for a fixed scoring function.
//!
//! Given scores, labels and attributes, choose `θ_1 <= … <= θ_{k-1}`
//! minimizing `(1/n) Σ C[y_i][f_i] + λ · violation(f)`. Only the order of the
//! scores matters, so thresholds are handled as *positions* `p ∈ 0..=n` in
//! the ascending score array: sorted sample `j` gets label
//! `1 + #{t : p_t <= j}`. A position must not separate two equal scores.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{expected_cost, pairwise_viol};
use crate::model::{CostMatrix, FairnessNotion, Thresholds};
use crate::rng::{stream_rng, Stream};

/// Default size limits of [`exact_dp`].
pub const EXACT_DP_LIMIT: usize = 40;
pub const EXACT_EO_LIMIT: usize = 25;

/// Improvements smaller than this are not accepted by the local search.
const IMPROVEMENT_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    #[default]
    Random,
    /// First restart starts from the `λ = 0` optimum, the others randomly.
    CostOnlyDp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdObjectiveConfig {
    pub lambda: f64,
    pub cost: CostMatrix,
    pub notion: FairnessNotion,
    pub restarts: usize,
    pub init: InitPolicy,
    /// Accepted moves per restart; `10·n·k` when `None`.
    pub max_iterations: Option<usize>,
    /// Overrides [`EXACT_DP_LIMIT`] / [`EXACT_EO_LIMIT`].
    pub exact_size_limit: Option<usize>,
    pub seed: u64,
}

impl ThresholdObjectiveConfig {
    pub fn new(lambda: f64, cost: CostMatrix, notion: FairnessNotion) -> Self {
        Self {
            lambda,
            cost,
            notion,
            restarts: 10,
            init: InitPolicy::Random,
            max_iterations: None,
            exact_size_limit: None,
            seed: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.cost.k()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be a finite non-negative number, got {}", self.lambda)));
        }
        if !matches!(self.notion, FairnessNotion::PairwiseDp | FairnessNotion::PairwiseEo) {
            return Err(Error::Unsupported(format!(
                "thresholds can only be tuned for pairwise DP or pairwise EO, not {}",
                self.notion
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Samples sorted by ascending score (stable, so equal scores keep their
/// input order).
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredSamples {
    scores: Vec<f64>,
    labels: Vec<usize>,
    attrs: Vec<usize>,
    order: Vec<usize>,
    n_groups: usize,
}

impl ScoredSamples {
    pub fn new(scores: &[f64], labels: &[usize], attrs: &[usize], n_groups: usize) -> Result<Self> {
        let n = scores.len();
        for (what, len) in [("labels", labels.len()), ("attrs", attrs.len())] {
            if len != n {
                return Err(Error::LengthMismatch { what, expected: n, found: len });
            }
        }
        if n == 0 {
            return Err(Error::InvalidDataset("no samples to place thresholds on".into()));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidDataset("scores must be finite".into()));
        }
        if labels.contains(&0) {
            return Err(Error::InvalidDataset("labels are 1-based".into()));
        }
        if let Some(a) = attrs.iter().find(|&&a| a >= n_groups) {
            return Err(Error::InvalidDataset(format!("attribute {a} outside 0..{n_groups}")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));
        Ok(Self {
            scores: order.iter().map(|&i| scores[i]).collect(),
            labels: order.iter().map(|&i| labels[i]).collect(),
            attrs: order.iter().map(|&i| attrs[i]).collect(),
            order,
            n_groups,
        })
    }

    /// All samples in a single group, for the cost-only problem.
    pub fn without_groups(scores: &[f64], labels: &[usize]) -> Result<Self> {
        Self::new(scores, labels, &vec![0; scores.len()], 1)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn attrs(&self) -> &[usize] {
        &self.attrs
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    /// Input index of each sorted sample.
    pub fn original_indices(&self) -> &[usize] {
        &self.order
    }

    /// A position is feasible unless it falls between two equal scores.
    pub fn is_feasible(&self, p: usize) -> bool {
        p == 0 || p >= self.len() || self.scores[p - 1] < self.scores[p]
    }

    pub fn feasible_positions(&self) -> Vec<usize> {
        (0..=self.len()).filter(|&p| self.is_feasible(p)).collect()
    }

    /// A threshold value realizing position `p`: the midpoint between the
    /// neighbouring distinct scores, or one unit beyond the extremes.
    pub fn threshold_value(&self, p: usize) -> f64 {
        let n = self.len();
        if p == 0 {
            let s = self.scores[0];
            s - s.abs().max(1.0)
        } else if p >= n {
            let s = self.scores[n - 1];
            s + s.abs().max(1.0)
        } else {
            let (a, b) = (self.scores[p - 1], self.scores[p]);
            let mid = a + (b - a) / 2.0;
            if mid >= b || mid < a {
                a
            } else {
                mid
            }
        }
    }

    pub fn check_positions(&self, positions: &[usize]) -> Result<()> {
        if positions.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidThresholds("positions must be non-decreasing".into()));
        }
        if let Some(p) = positions.iter().find(|&&p| p > self.len() || !self.is_feasible(p)) {
            return Err(Error::InvalidThresholds(format!(
                "position {p} is out of range or splits tied scores"
            )));
        }
        Ok(())
    }

    pub fn thresholds_at(&self, positions: &[usize]) -> Result<Thresholds> {
        self.check_positions(positions)?;
        Thresholds::new(positions.iter().map(|&p| self.threshold_value(p)).collect())
    }

    /// Positions equivalent to the given thresholds on these scores.
    pub fn positions_of(&self, thresholds: &Thresholds) -> Vec<usize> {
        thresholds
            .values()
            .iter()
            .map(|&t| self.scores.partition_point(|&s| s <= t))
            .collect()
    }

    /// Labels of the sorted samples under the given positions.
    pub fn predictions_at(&self, positions: &[usize]) -> Vec<usize> {
        let mut t = 0;
        (0..self.len())
            .map(|j| {
                while t < positions.len() && positions[t] <= j {
                    t += 1;
                }
                t + 1
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub cost: f64,
    pub violation: f64,
    pub objective: f64,
}

fn check_labels(samples: &ScoredSamples, k: usize) -> Result<()> {
    match samples.labels.iter().find(|&&y| y > k) {
        Some(y) => Err(Error::InvalidDataset(format!("label {y} exceeds k = {k}"))),
        None => Ok(()),
    }
}

/// Mean cost, pairwise violation and their combination for thresholds
/// applied to the samples.
pub fn objective(samples: &ScoredSamples, thresholds: &Thresholds, config: &ThresholdObjectiveConfig) -> Result<ObjectiveValue> {
    config.validate()?;
    let k = config.k();
    if thresholds.k() != k {
        return Err(Error::InvalidThresholds(format!(
            "{} thresholds given, {} expected",
            thresholds.values().len(),
            k - 1
        )));
    }
    let preds: Vec<usize> = samples.scores.iter().map(|&s| thresholds.label_for(s)).collect();
    objective_of_predictions(samples, &preds, config)
}

fn objective_of_predictions(samples: &ScoredSamples, preds: &[usize], config: &ThresholdObjectiveConfig) -> Result<ObjectiveValue> {
    let k = config.k();
    check_labels(samples, k)?;
    let cost = expected_cost(&samples.labels, preds, &config.cost)?;
    let violation = pairwise_viol(config.notion, &samples.attrs, &samples.labels, preds, k, samples.n_groups)?.violation;
    Ok(ObjectiveValue {
        cost,
        violation,
        objective: cost + config.lambda * violation,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostOnlySolution {
    pub thresholds: Thresholds,
    pub positions: Vec<usize>,
    pub cost: f64,
}

/// `cum[l][i] = Σ_{j < i} C[y_j][l]` for `l` in `1..=k` (row 0 unused).
fn cost_prefix(samples: &ScoredSamples, cost: &CostMatrix) -> Vec<Vec<f64>> {
    let k = cost.k();
    let mut cum = vec![vec![0.0; samples.len() + 1]; k + 1];
    for (l, row) in cum.iter_mut().enumerate().skip(1) {
        for (j, &y) in samples.labels.iter().enumerate() {
            row[j + 1] = row[j] + cost.get(y, l);
        }
    }
    cum
}

/// Turns consecutive blocks `(start, label)` with increasing labels into
/// threshold positions.
fn positions_from_blocks(blocks: &[(usize, usize)], n: usize, k: usize) -> Vec<usize> {
    (1..k)
        .map(|t| blocks.iter().find(|&&(_, l)| l > t).map_or(n, |&(start, _)| start))
        .collect()
}

/// Minimum mean cost over all threshold placements (the `λ = 0` problem).
///
/// A prediction is a sequence of blocks of consecutive sorted samples, cut
/// at feasible positions, with strictly increasing labels. `best[i][l]` is
/// the cheapest labelling of the first `i` samples whose last block has
/// label `l`. O(n²k).
pub fn cost_only_dp(samples: &ScoredSamples, cost: &CostMatrix) -> Result<CostOnlySolution> {
    let k = cost.k();
    check_labels(samples, k)?;
    let n = samples.len();
    let cum = cost_prefix(samples, cost);
    let feasible = samples.feasible_positions();
    // best[i][l] = (cost, previous position, previous label).
    let mut best = vec![vec![None::<(f64, usize, usize)>; k + 1]; n + 1];
    best[0][0] = Some((0.0, 0, 0));
    for (fi, &i) in feasible.iter().enumerate().skip(1) {
        for &ip in &feasible[..fi] {
            let mut prefix: Option<(f64, usize)> = None;
            for l in 1..=k {
                if let Some((c, _, _)) = best[ip][l - 1] {
                    if prefix.is_none_or(|(pc, _)| c < pc) {
                        prefix = Some((c, l - 1));
                    }
                }
                let Some((pc, pl)) = prefix else { continue };
                let cand = pc + (cum[l][i] - cum[l][ip]);
                if best[i][l].is_none_or(|(c, _, _)| cand < c) {
                    best[i][l] = Some((cand, ip, pl));
                }
            }
        }
    }
    let (mut l, total) = (1..=k)
        .filter_map(|l| best[n][l].map(|(c, _, _)| (l, c)))
        .fold(None, |acc: Option<(usize, f64)>, cur| match acc {
            Some(a) if a.1 <= cur.1 => Some(a),
            _ => Some(cur),
        })
        .expect("the constant labelling is always reachable");
    let mut blocks = Vec::new();
    let mut i = n;
    while i > 0 {
        let (_, ip, pl) = best[i][l].expect("back pointer");
        blocks.push((ip, l));
        i = ip;
        l = pl;
    }
    blocks.reverse();
    let positions = positions_from_blocks(&blocks, n, k);
    Ok(CostOnlySolution {
        thresholds: samples.thresholds_at(&positions)?,
        positions,
        cost: total / n as f64,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub thresholds: Thresholds,
    pub positions: Vec<usize>,
    pub value: ObjectiveValue,
}

/// Integer pair balances tracked by the exact DP. DP: `(P - Q, 0)` between
/// groups 0 and 1. EO: `(P, Q)` with the label-conditioned counts.
type Balance = (i64, i64);

/// Optimal thresholds for two groups.
///
/// Extends the block recurrence of [`cost_only_dp`] with the pair balance
/// between the groups, which determines the violation exactly. Appending a
/// block above all earlier samples only creates pairs between the block and
/// the prefix, so the balance update depends on the block alone.
pub fn exact_dp(samples: &ScoredSamples, config: &ThresholdObjectiveConfig) -> Result<ExactSolution> {
    config.validate()?;
    let k = config.k();
    check_labels(samples, k)?;
    if samples.n_groups != 2 {
        return Err(Error::Unsupported(format!(
            "exact threshold DP needs exactly two groups, got {}",
            samples.n_groups
        )));
    }
    let eo = config.notion == FairnessNotion::PairwiseEo;
    let n = samples.len();
    let limit = config.exact_size_limit.unwrap_or(if eo { EXACT_EO_LIMIT } else { EXACT_DP_LIMIT });
    if n > limit {
        return Err(Error::SizeGuard {
            what: "exact threshold DP",
            n,
            limit,
        });
    }
    let (y, a) = (&samples.labels, &samples.attrs);

    // Denominators of the violation.
    let (den_f, den_b) = if eo {
        let mut gt = 0i64;
        let mut lt = 0i64;
        for i in (0..n).filter(|&i| a[i] == 0) {
            for j in (0..n).filter(|&j| a[j] == 1) {
                gt += i64::from(y[i] > y[j]);
                lt += i64::from(y[i] < y[j]);
            }
        }
        (gt, lt)
    } else {
        let g0 = a.iter().filter(|&&g| g == 0).count() as i64;
        let d = g0 * (n as i64 - g0);
        (d, d)
    };
    if den_f == 0 || den_b == 0 {
        return Err(Error::UndefinedViolation { notion: config.notion });
    }
    let violation = |v: Balance| -> f64 {
        if eo {
            (v.0 as f64 / den_f as f64 - v.1 as f64 / den_b as f64).abs()
        } else {
            v.0.unsigned_abs() as f64 / den_f as f64
        }
    };

    // delta[ip][i]: balance change of appending block ip..i.
    let mut delta = vec![vec![(0i64, 0i64); n + 1]; n + 1];
    for ip in 0..n {
        let mut pre = [0i64; 2];
        for j in 0..ip {
            pre[a[j]] += 1;
        }
        for i in ip..n {
            let mut d = delta[ip][i];
            if eo {
                let below = |g: usize| (0..ip).filter(|&j| a[j] == g && y[j] < y[i]).count() as i64;
                if a[i] == 0 {
                    d.0 += below(1);
                } else {
                    d.1 += below(0);
                }
            } else if a[i] == 0 {
                d.0 += pre[1];
            } else {
                d.0 -= pre[0];
            }
            delta[ip][i + 1] = d;
        }
    }

    let cum = cost_prefix(samples, &config.cost);
    let feasible = samples.feasible_positions();
    // state[i][l]: balance -> (cost sum, previous position, previous label, previous balance)
    type Entry = (f64, usize, usize, Balance);
    let mut state: Vec<Vec<BTreeMap<Balance, Entry>>> = vec![vec![BTreeMap::new(); k + 1]; n + 1];
    state[0][0].insert((0, 0), (0.0, 0, 0, (0, 0)));
    for (fi, &i) in feasible.iter().enumerate().skip(1) {
        for &ip in &feasible[..fi] {
            let d = delta[ip][i];
            // Running minimum over previous labels l' < l, per balance.
            let mut prefix: BTreeMap<Balance, (f64, usize)> = BTreeMap::new();
            for l in 1..=k {
                for (&v, &(c, ..)) in &state[ip][l - 1] {
                    let e = prefix.entry(v).or_insert((c, l - 1));
                    if c < e.0 {
                        *e = (c, l - 1);
                    }
                }
                let block = cum[l][i] - cum[l][ip];
                let target = &mut state[i][l];
                for (&v, &(c, pl)) in &prefix {
                    let nv = (v.0 + d.0, v.1 + d.1);
                    let cand = c + block;
                    match target.get_mut(&nv) {
                        Some(e) if cand < e.0 => *e = (cand, ip, pl, v),
                        Some(_) => {}
                        None => {
                            target.insert(nv, (cand, ip, pl, v));
                        }
                    }
                }
            }
        }
    }

    let mut best: Option<(f64, f64, usize, Balance)> = None;
    for l in 1..=k {
        for (&v, &(c, ..)) in &state[n][l] {
            let viol = violation(v);
            let obj = c / n as f64 + config.lambda * viol;
            let better = match best {
                None => true,
                Some((bo, bv, ..)) => obj < bo || (obj == bo && viol < bv),
            };
            if better {
                best = Some((obj, viol, l, v));
            }
        }
    }
    let (_, _, mut l, mut v) = best.expect("the constant labelling is always reachable");
    let mut blocks = Vec::new();
    let mut i = n;
    while i > 0 {
        let (_, ip, pl, pv) = state[i][l][&v];
        blocks.push((ip, l));
        i = ip;
        l = pl;
        v = pv;
    }
    blocks.reverse();
    let positions = positions_from_blocks(&blocks, n, k);
    let preds = samples.predictions_at(&positions);
    Ok(ExactSolution {
        thresholds: samples.thresholds_at(&positions)?,
        value: objective_of_predictions(samples, &preds, config)?,
        positions,
    })
}

/// Fixed quantities of a local search run.
struct SearchContext<'a> {
    samples: &'a ScoredSamples,
    config: &'a ThresholdObjectiveConfig,
    k: usize,
    /// Label buckets of the count table: labels for EO, one bucket for DP.
    ky: usize,
    den_f: Vec<u64>,
    den_b: Vec<u64>,
}

impl<'a> SearchContext<'a> {
    fn new(samples: &'a ScoredSamples, config: &'a ThresholdObjectiveConfig) -> Result<Self> {
        config.validate()?;
        let k = config.k();
        check_labels(samples, k)?;
        let eo = config.notion == FairnessNotion::PairwiseEo;
        let g = samples.n_groups;
        let mut sizes = vec![vec![0u64; k + 1]; g];
        for (&a, &y) in samples.attrs.iter().zip(&samples.labels) {
            sizes[a][y] += 1;
        }
        let mut den_f = vec![0u64; g * g];
        let mut den_b = vec![0u64; g * g];
        for a in 0..g {
            for b in (0..g).filter(|&b| b != a) {
                for ya in 1..=k {
                    for yb in 1..=k {
                        let pairs = sizes[a][ya] * sizes[b][yb];
                        if !eo || ya > yb {
                            den_f[a * g + b] += pairs;
                        }
                        if !eo || ya < yb {
                            den_b[a * g + b] += pairs;
                        }
                    }
                }
            }
        }
        if !(0..g * g).any(|i| den_f[i] > 0 && den_b[i] > 0) {
            return Err(Error::UndefinedViolation { notion: config.notion });
        }
        Ok(Self {
            samples,
            config,
            k,
            ky: if eo { k } else { 1 },
            den_f,
            den_b,
        })
    }

    fn bucket(&self, j: usize) -> usize {
        if self.ky == 1 {
            0
        } else {
            self.samples.labels[j] - 1
        }
    }

    fn max_iterations(&self) -> usize {
        self.config
            .max_iterations
            .unwrap_or(10 * self.samples.len() * self.k)
    }

    /// Violation from the pair counts, in the same arithmetic as the metrics.
    fn violation(&self, p: &[u64], q: &[u64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..p.len() {
            if self.den_f[i] > 0 && self.den_b[i] > 0 {
                let f = p[i] as f64 / self.den_f[i] as f64;
                let b = q[i] as f64 / self.den_b[i] as f64;
                worst = worst.max((f - b).abs());
            }
        }
        worst
    }

    fn cost_sum(&self, preds: &[usize]) -> f64 {
        self.samples
            .labels
            .iter()
            .zip(preds)
            .map(|(&y, &f)| self.config.cost.get(y, f))
            .sum()
    }

    fn combine(&self, cost_sum: f64, violation: f64) -> f64 {
        cost_sum / self.samples.len() as f64 + self.config.lambda * violation
    }
}

/// Local search state: threshold positions, per-group prediction histograms
/// and the pair counts that determine the violation.
///
/// `counts[(g·ky + y)·k + l]` is the number of group-`g` samples in label
/// bucket `y` predicted `l + 1`. `p[g·|A| + h]` counts pairs `(i ∈ g, j ∈ h)`
/// with `f_i > f_j` (and `y_i > y_j` for EO), `q` those with `f_i < f_j`
/// (and `y_i < y_j`).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSearchState {
    positions: Vec<usize>,
    counts: Vec<u64>,
    p: Vec<u64>,
    q: Vec<u64>,
    cost: f64,
    violation: f64,
    objective: f64,
}

impl LocalSearchState {
    /// Builds every table from scratch.
    pub fn from_positions(samples: &ScoredSamples, config: &ThresholdObjectiveConfig, positions: &[usize]) -> Result<Self> {
        let ctx = SearchContext::new(samples, config)?;
        if positions.len() + 1 != ctx.k {
            return Err(Error::InvalidThresholds(format!(
                "{} positions given, {} expected",
                positions.len(),
                ctx.k - 1
            )));
        }
        samples.check_positions(positions)?;
        Ok(Self::build(&ctx, positions.to_vec()))
    }

    fn build(ctx: &SearchContext, positions: Vec<usize>) -> Self {
        let (k, ky, g) = (ctx.k, ctx.ky, ctx.samples.n_groups);
        let preds = ctx.samples.predictions_at(&positions);
        let mut counts = vec![0u64; g * ky * k];
        for (j, &f) in preds.iter().enumerate() {
            counts[(ctx.samples.attrs[j] * ky + ctx.bucket(j)) * k + f - 1] += 1;
        }
        let mut p = vec![0u64; g * g];
        let mut q = vec![0u64; g * g];
        let eo = ky > 1;
        for a in 0..g {
            for b in (0..g).filter(|&b| b != a) {
                for ya in 0..ky {
                    for yb in 0..ky {
                        for la in 0..k {
                            for lb in 0..k {
                                let pairs = counts[(a * ky + ya) * k + la] * counts[(b * ky + yb) * k + lb];
                                if la > lb && (!eo || ya > yb) {
                                    p[a * g + b] += pairs;
                                }
                                if la < lb && (!eo || ya < yb) {
                                    q[a * g + b] += pairs;
                                }
                            }
                        }
                    }
                }
            }
        }
        let cost_sum = ctx.cost_sum(&preds);
        let violation = ctx.violation(&p, &q);
        Self {
            positions,
            counts,
            p,
            q,
            cost: cost_sum / ctx.samples.len() as f64,
            violation,
            objective: ctx.combine(cost_sum, violation),
        }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn p(&self) -> &[u64] {
        &self.p
    }

    pub fn q(&self) -> &[u64] {
        &self.q
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn violation(&self) -> f64 {
        self.violation
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }
}

/// Tables touched while walking one threshold.
struct Walk {
    counts: Vec<u64>,
    p: Vec<u64>,
    q: Vec<u64>,
    cost_delta: f64,
}

impl Walk {
    fn start(state: &LocalSearchState) -> Self {
        Self {
            counts: state.counts.clone(),
            p: state.p.clone(),
            q: state.q.clone(),
            cost_delta: 0.0,
        }
    }

    /// Sorted sample `j` changes its prediction from `from` to `to = from ± 1`.
    fn relabel(&mut self, ctx: &SearchContext, j: usize, from: usize, to: usize) {
        let (k, ky, g) = (ctx.k, ctx.ky, ctx.samples.n_groups);
        let ga = ctx.samples.attrs[j];
        let yb = ctx.bucket(j);
        let y = ctx.samples.labels[j];
        self.cost_delta += ctx.config.cost.get(y, to) - ctx.config.cost.get(y, from);
        // Level whose members change their order relative to sample j.
        let (level, up) = if to > from { (from - 1, true) } else { (to - 1, false) };
        let upper_level = if up { to - 1 } else { from - 1 };
        for h in (0..g).filter(|&h| h != ga) {
            // Other-group samples below j's bucket (or all, for DP).
            let below: u64 = if ky == 1 {
                self.counts[h * ky * k + level]
            } else {
                (0..yb).map(|b| self.counts[(h * ky + b) * k + level]).sum()
            };
            let above: u64 = if ky == 1 {
                self.counts[h * ky * k + upper_level]
            } else {
                (yb + 1..ky).map(|b| self.counts[(h * ky + b) * k + upper_level]).sum()
            };
            let (gh, hg) = (ga * g + h, h * g + ga);
            if up {
                // j now exceeds the `below` samples at its old level and no
                // longer trails the `above` samples at its new level.
                self.p[gh] += below;
                self.q[hg] += below;
                self.q[gh] -= above;
                self.p[hg] -= above;
            } else {
                self.p[gh] -= below;
                self.q[hg] -= below;
                self.q[gh] += above;
                self.p[hg] += above;
            }
        }
        self.counts[(ga * ky + yb) * k + from - 1] -= 1;
        self.counts[(ga * ky + yb) * k + to - 1] += 1;
    }
}

/// One accepted move of the local search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub iteration: usize,
    /// 0-based index of the moved threshold.
    pub threshold: usize,
    pub position: usize,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub initial_positions: Vec<usize>,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub iterations: usize,
    pub hit_iteration_cap: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalSearchResult {
    pub thresholds: Thresholds,
    pub positions: Vec<usize>,
    pub value: ObjectiveValue,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    pub trace: Vec<TraceEntry>,
}

struct Candidate {
    threshold: usize,
    position: usize,
    objective: f64,
}

/// Best improving single-threshold move from `state`, if any.
fn best_move(ctx: &SearchContext, state: &LocalSearchState) -> Option<Candidate> {
    let n = ctx.samples.len();
    let pos = &state.positions;
    let base_cost = state.cost * n as f64;
    let mut best: Option<Candidate> = None;
    let consider = |threshold: usize, position: usize, walk: &Walk, best: &mut Option<Candidate>| {
        let objective = ctx.combine(base_cost + walk.cost_delta, ctx.violation(&walk.p, &walk.q));
        if objective < state.objective - IMPROVEMENT_EPS && best.as_ref().is_none_or(|b| objective < b.objective) {
            *best = Some(Candidate {
                threshold,
                position,
                objective,
            });
        }
    };
    for t in 0..pos.len() {
        let lo = if t == 0 { 0 } else { pos[t - 1] };
        let hi = if t + 1 == pos.len() { n } else { pos[t + 1] };
        // Leftward: sample q - 1 moves from label t + 1 up to t + 2.
        let mut walk = Walk::start(state);
        for q in (lo..pos[t]).rev() {
            walk.relabel(ctx, q, t + 1, t + 2);
            if ctx.samples.is_feasible(q) {
                consider(t, q, &walk, &mut best);
            }
        }
        // Rightward: sample q - 1 moves from label t + 2 down to t + 1.
        let mut walk = Walk::start(state);
        for q in pos[t] + 1..=hi {
            walk.relabel(ctx, q - 1, t + 2, t + 1);
            if ctx.samples.is_feasible(q) {
                consider(t, q, &walk, &mut best);
            }
        }
    }
    best
}

fn apply_move(ctx: &SearchContext, state: &LocalSearchState, t: usize, target: usize) -> LocalSearchState {
    let mut walk = Walk::start(state);
    let from = state.positions[t];
    if target < from {
        for q in (target..from).rev() {
            walk.relabel(ctx, q, t + 1, t + 2);
        }
    } else {
        for q in from + 1..=target {
            walk.relabel(ctx, q - 1, t + 2, t + 1);
        }
    }
    let mut positions = state.positions.clone();
    positions[t] = target;
    let preds = ctx.samples.predictions_at(&positions);
    let cost_sum = ctx.cost_sum(&preds);
    let violation = ctx.violation(&walk.p, &walk.q);
    LocalSearchState {
        positions,
        counts: walk.counts,
        p: walk.p,
        q: walk.q,
        cost: cost_sum / ctx.samples.len() as f64,
        violation,
        objective: ctx.combine(cost_sum, violation),
    }
}

fn run_restart(
    ctx: &SearchContext,
    restart: usize,
    start: Vec<usize>,
    observer: &mut dyn FnMut(&LocalSearchState),
) -> (LocalSearchState, RestartSummary, Vec<TraceEntry>) {
    let mut state = LocalSearchState::build(ctx, start.clone());
    let initial_objective = state.objective;
    let cap = ctx.max_iterations();
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < cap {
        let Some(mv) = best_move(ctx, &state) else { break };
        state = apply_move(ctx, &state, mv.threshold, mv.position);
        iterations += 1;
        trace.push(TraceEntry {
            restart,
            iteration: iterations,
            threshold: mv.threshold,
            position: mv.position,
            objective: state.objective,
        });
        observer(&state);
    }
    let hit_iteration_cap = iterations == cap && best_move(ctx, &state).is_some();
    let summary = RestartSummary {
        initial_positions: start,
        initial_objective,
        final_objective: state.objective,
        iterations,
        hit_iteration_cap,
    };
    (state, summary, trace)
}

fn finish(ctx: &SearchContext, runs: Vec<(LocalSearchState, RestartSummary, Vec<TraceEntry>)>) -> Result<LocalSearchResult> {
    let best_restart = (0..runs.len())
        .min_by(|&i, &j| runs[i].0.objective.total_cmp(&runs[j].0.objective).then(i.cmp(&j)))
        .expect("at least one restart");
    let state = &runs[best_restart].0;
    let positions = state.positions.clone();
    let preds = ctx.samples.predictions_at(&positions);
    let value = objective_of_predictions(ctx.samples, &preds, ctx.config)?;
    let thresholds = ctx.samples.thresholds_at(&positions)?;
    let mut restarts = Vec::with_capacity(runs.len());
    let mut trace = Vec::new();
    for (_, summary, t) in runs {
        restarts.push(summary);
        trace.extend(t);
    }
    Ok(LocalSearchResult {
        thresholds,
        positions,
        value,
        best_restart,
        restarts,
        trace,
    })
}

/// Random sorted feasible positions: distinct while enough feasible
/// positions exist, otherwise drawn with replacement.
fn random_positions<R: Rng>(rng: &mut R, feasible: &[usize], count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = if feasible.len() >= count {
        index::sample(rng, feasible.len(), count)
            .into_iter()
            .map(|i| feasible[i])
            .collect()
    } else {
        (0..count).map(|_| feasible[rng.gen_range(0..feasible.len())]).collect()
    };
    out.sort_unstable();
    out
}

/// Steepest-descent local search over single-threshold moves, restarted
/// `config.restarts` times; returns the best restart. Restarts run in
/// parallel with independent seeded streams.
pub fn local_search(samples: &ScoredSamples, config: &ThresholdObjectiveConfig) -> Result<LocalSearchResult> {
    let ctx = SearchContext::new(samples, config)?;
    let feasible = samples.feasible_positions();
    let dp_start = match config.init {
        InitPolicy::CostOnlyDp => Some(cost_only_dp(samples, &config.cost)?.positions),
        InitPolicy::Random => None,
    };
    let starts: Vec<Vec<usize>> = (0..config.restarts)
        .map(|r| match (&dp_start, r) {
            (Some(p), 0) => p.clone(),
            _ => random_positions(&mut stream_rng(config.seed, Stream::LocalSearch, r as u64), &feasible, ctx.k - 1),
        })
        .collect();
    let runs: Vec<_> = starts
        .into_par_iter()
        .enumerate()
        .map(|(r, start)| run_restart(&ctx, r, start, &mut |_| {}))
        .collect();
    finish(&ctx, runs)
}

/// A single local search run from the given positions. `observer` sees the
/// state after every accepted move.
pub fn local_search_from(
    samples: &ScoredSamples,
    config: &ThresholdObjectiveConfig,
    start: &[usize],
    observer: &mut dyn FnMut(&LocalSearchState),
) -> Result<LocalSearchResult> {
    let ctx = SearchContext::new(samples, config)?;
    LocalSearchState::from_positions(samples, config, start)?;
    let run = run_restart(&ctx, 0, start.to_vec(), observer);
    finish(&ctx, vec![run])
}
