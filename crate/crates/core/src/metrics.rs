//! Fairness violations, expected cost, margin loss and group statistics.
//!
//! All pairwise probabilities are empirical over ordered index pairs `(i, j)`
//! with `i` drawn from the first group and `j` from the second. Only pairs of
//! distinct groups are reported: a group compared with itself always has
//! equal forward and backward probabilities, so it never contributes to a
//! violation. Every probability is a ratio of two exact integer counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CostMatrix, Dataset, FairnessNotion, LinearScorer, Thresholds};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub a1: usize,
    pub a2: usize,
    pub forward: f64,
    pub backward: f64,
    pub diff: f64,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub notion: FairnessNotion,
    pub violation: f64,
    #[serde(rename = "pairs")]
    pub per_pair: Vec<PairEntry>,
    #[serde(rename = "skipped")]
    pub skipped_pairs: Vec<(usize, usize)>,
}

impl FairnessReport {
    fn from_entries(notion: FairnessNotion, per_pair: Vec<PairEntry>) -> Result<Self> {
        let skipped_pairs: Vec<_> = per_pair
            .iter()
            .filter(|p| !p.valid)
            .map(|p| (p.a1, p.a2))
            .collect();
        if skipped_pairs.len() == per_pair.len() {
            return Err(Error::UndefinedViolation { notion });
        }
        let violation = per_pair
            .iter()
            .filter(|p| p.valid)
            .map(|p| p.diff)
            .fold(0.0, f64::max);
        Ok(Self {
            notion,
            violation,
            per_pair,
            skipped_pairs,
        })
    }

    pub fn pair(&self, a1: usize, a2: usize) -> Option<&PairEntry> {
        self.per_pair.iter().find(|p| p.a1 == a1 && p.a2 == a2)
    }
}

/// Relation of the first element of a pair to the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Rel {
    Any,
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
}

impl Rel {
    /// Half-open ranges of second-element values `u` satisfying `v REL u`.
    fn ranges(self, v: usize, size: usize) -> [(usize, usize); 2] {
        match self {
            Rel::Any => [(0, size), (0, 0)],
            Rel::Gt => [(0, v), (0, 0)],
            Rel::Ge => [(0, v + 1), (0, 0)],
            Rel::Lt => [(v + 1, size), (0, 0)],
            Rel::Le => [(v, size), (0, 0)],
            Rel::Ne => [(0, v), (v + 1, size)],
        }
    }
}

/// Per-group 2-D histogram over (true-label bucket, prediction level) with
/// inclusive 2-D prefix sums, so any rectangle count is O(1).
pub(crate) struct PairCountTable {
    n_groups: usize,
    ky: usize,
    kf: usize,
    cells: Vec<u64>,
    prefix: Vec<u64>,
}

impl PairCountTable {
    /// `ybuckets` and `levels` are 0-based; pass `ky = 1` and all-zero
    /// buckets when labels play no role.
    pub(crate) fn new(attrs: &[usize], ybuckets: &[usize], levels: &[usize], n_groups: usize, ky: usize, kf: usize) -> Self {
        let mut cells = vec![0u64; n_groups * ky * kf];
        for ((&a, &y), &l) in attrs.iter().zip(ybuckets).zip(levels) {
            cells[(a * ky + y) * kf + l] += 1;
        }
        let (py, pf) = (ky + 1, kf + 1);
        let mut prefix = vec![0u64; n_groups * py * pf];
        for g in 0..n_groups {
            for y in 0..ky {
                for l in 0..kf {
                    let c = cells[(g * ky + y) * kf + l];
                    let idx = |yy: usize, ll: usize| (g * py + yy) * pf + ll;
                    prefix[idx(y + 1, l + 1)] = c + prefix[idx(y, l + 1)] + prefix[idx(y + 1, l)] - prefix[idx(y, l)];
                }
            }
        }
        Self {
            n_groups,
            ky,
            kf,
            cells,
            prefix,
        }
    }

    fn rect(&self, g: usize, (y0, y1): (usize, usize), (l0, l1): (usize, usize)) -> u64 {
        if y0 >= y1 || l0 >= l1 {
            return 0;
        }
        let (py, pf) = (self.ky + 1, self.kf + 1);
        let p = |y: usize, l: usize| self.prefix[(g * py + y) * pf + l];
        p(y1, l1) + p(y0, l0) - p(y0, l1) - p(y1, l0)
    }

    pub(crate) fn group_size(&self, g: usize) -> u64 {
        self.rect(g, (0, self.ky), (0, self.kf))
    }

    /// `#{(i, j): a_i = g1, a_j = g2, y_i yrel y_j, f_i frel f_j}`.
    pub(crate) fn count(&self, g1: usize, g2: usize, yrel: Rel, frel: Rel) -> u64 {
        let mut total = 0u64;
        for y in 0..self.ky {
            for l in 0..self.kf {
                let c = self.cells[(g1 * self.ky + y) * self.kf + l];
                if c == 0 {
                    continue;
                }
                let mut inner = 0u64;
                for yr in yrel.ranges(y, self.ky) {
                    for lr in frel.ranges(l, self.kf) {
                        inner += self.rect(g2, yr, lr);
                    }
                }
                total += c * inner;
            }
        }
        total
    }

    fn ordered_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_groups).flat_map(move |a| (0..self.n_groups).filter(move |&b| b != a).map(move |b| (a, b)))
    }
}

/// One side of a pairwise condition: `count / total`, undefined when the
/// conditioning event is empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Ratio {
    pub count: u64,
    pub total: u64,
}

impl Ratio {
    pub(crate) fn value(self) -> Option<f64> {
        (self.total > 0).then(|| self.count as f64 / self.total as f64)
    }
}

fn pair_entry(a1: usize, a2: usize, forward: Ratio, backward: Ratio) -> PairEntry {
    match (forward.value(), backward.value()) {
        (Some(f), Some(b)) => PairEntry {
            a1,
            a2,
            forward: f,
            backward: b,
            diff: (f - b).abs(),
            valid: true,
        },
        _ => PairEntry {
            a1,
            a2,
            forward: 0.0,
            backward: 0.0,
            diff: 0.0,
            valid: false,
        },
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { what, expected, found });
    }
    Ok(())
}

fn check_range(what: &str, values: &[usize], lo: usize, hi: usize) -> Result<()> {
    match values.iter().find(|&&v| v < lo || v > hi) {
        Some(v) => Err(Error::InvalidDataset(format!("{what} value {v} outside {lo}..={hi}"))),
        None => Ok(()),
    }
}

fn check_attrs(attrs: &[usize], n_groups: usize) -> Result<()> {
    if n_groups == 0 {
        return Err(Error::InvalidDataset("need at least one attribute value".into()));
    }
    check_range("attribute", attrs, 0, n_groups - 1)
}

/// Mean misclassification cost `(1/n) Σ C[y_i][f_i]`.
pub fn expected_cost(labels: &[usize], predictions: &[usize], cost: &CostMatrix) -> Result<f64> {
    check_len("predictions", labels.len(), predictions.len())?;
    if labels.is_empty() {
        return Err(Error::InvalidDataset("cannot compute cost of an empty dataset".into()));
    }
    check_range("label", labels, 1, cost.k())?;
    check_range("prediction", predictions, 1, cost.k())?;
    let total: f64 = labels.iter().zip(predictions).map(|(&y, &f)| cost.get(y, f)).sum();
    Ok(total / labels.len() as f64)
}

fn dp_table(attrs: &[usize], levels: &[usize], n_groups: usize, kf: usize) -> PairCountTable {
    let zeros = vec![0usize; attrs.len()];
    PairCountTable::new(attrs, &zeros, levels, n_groups, 1, kf)
}

fn zero_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|&x| x - 1).collect()
}

/// Pairwise demographic parity: `P[f_1 > f_2 | a_1, a_2]` against
/// `P[f_1 < f_2 | a_1, a_2]`. O(n + k|A|²).
pub fn pairwise_dp_viol(attrs: &[usize], predictions: &[usize], k: usize, n_groups: usize) -> Result<FairnessReport> {
    check_len("predictions", attrs.len(), predictions.len())?;
    check_attrs(attrs, n_groups)?;
    check_range("prediction", predictions, 1, k)?;
    let table = dp_table(attrs, &zero_based(predictions), n_groups, k);
    dp_report(&table, Rel::Any)
}

fn dp_report(table: &PairCountTable, yrel: Rel) -> Result<FairnessReport> {
    let entries = table
        .ordered_pairs()
        .map(|(a, b)| {
            let total = table.count(a, b, yrel, Rel::Any);
            let fwd = Ratio { count: table.count(a, b, yrel, Rel::Gt), total };
            let bwd = Ratio { count: table.count(a, b, yrel, Rel::Lt), total };
            pair_entry(a, b, fwd, bwd)
        })
        .collect();
    FairnessReport::from_entries(FairnessNotion::PairwiseDp, entries)
}

/// Forward and backward ratios of pairwise EO for the ordered pair `(a, b)`.
pub(crate) fn eo_ratios(table: &PairCountTable, a: usize, b: usize) -> (Ratio, Ratio) {
    (
        Ratio {
            count: table.count(a, b, Rel::Gt, Rel::Gt),
            total: table.count(a, b, Rel::Gt, Rel::Any),
        },
        Ratio {
            count: table.count(a, b, Rel::Lt, Rel::Lt),
            total: table.count(a, b, Rel::Lt, Rel::Any),
        },
    )
}

fn eq_odds_ratios(table: &PairCountTable, a: usize, b: usize) -> (Ratio, Ratio) {
    (
        Ratio {
            count: table.count(a, b, Rel::Le, Rel::Le),
            total: table.count(a, b, Rel::Le, Rel::Any),
        },
        Ratio {
            count: table.count(a, b, Rel::Ge, Rel::Ge),
            total: table.count(a, b, Rel::Ge, Rel::Any),
        },
    )
}

fn labelled_table(attrs: &[usize], labels: &[usize], predictions: &[usize], k: usize, n_groups: usize) -> Result<PairCountTable> {
    check_len("labels", attrs.len(), labels.len())?;
    check_len("predictions", attrs.len(), predictions.len())?;
    check_attrs(attrs, n_groups)?;
    check_range("label", labels, 1, k)?;
    check_range("prediction", predictions, 1, k)?;
    Ok(PairCountTable::new(
        attrs,
        &zero_based(labels),
        &zero_based(predictions),
        n_groups,
        k,
        k,
    ))
}

/// Pairwise equal opportunity: `P[f_1 > f_2 | a_1, a_2, y_1 > y_2]` against
/// `P[f_1 < f_2 | a_1, a_2, y_1 < y_2]`. O(n + k²|A|²).
pub fn pairwise_eo_viol(
    attrs: &[usize],
    labels: &[usize],
    predictions: &[usize],
    k: usize,
    n_groups: usize,
) -> Result<FairnessReport> {
    let table = labelled_table(attrs, labels, predictions, k, n_groups)?;
    let entries = table
        .ordered_pairs()
        .map(|(a, b)| {
            let (f, bw) = eo_ratios(&table, a, b);
            pair_entry(a, b, f, bw)
        })
        .collect();
    FairnessReport::from_entries(FairnessNotion::PairwiseEo, entries)
}

/// Pairwise equalized odds: the larger of the pairwise-EO gap and the gap
/// of its non-strict analogue `P[f_1 <= f_2 | y_1 <= y_2]` against
/// `P[f_1 >= f_2 | y_1 >= y_2]`. A pair is valid when at least one of the
/// two conditions is defined; its reported probabilities are those of the
/// larger gap.
pub fn pairwise_eqodds_viol(
    attrs: &[usize],
    labels: &[usize],
    predictions: &[usize],
    k: usize,
    n_groups: usize,
) -> Result<FairnessReport> {
    let table = labelled_table(attrs, labels, predictions, k, n_groups)?;
    let entries = table
        .ordered_pairs()
        .map(|(a, b)| {
            let (f, bw) = eo_ratios(&table, a, b);
            let strict = pair_entry(a, b, f, bw);
            let (f, bw) = eq_odds_ratios(&table, a, b);
            let loose = pair_entry(a, b, f, bw);
            match (strict.valid, loose.valid) {
                (true, true) if strict.diff >= loose.diff => strict,
                (true, false) => strict,
                _ => loose,
            }
        })
        .collect();
    FairnessReport::from_entries(FairnessNotion::PairwiseEqOdds, entries)
}

/// Dispatch for the three pairwise notions.
pub fn pairwise_viol(
    notion: FairnessNotion,
    attrs: &[usize],
    labels: &[usize],
    predictions: &[usize],
    k: usize,
    n_groups: usize,
) -> Result<FairnessReport> {
    match notion {
        FairnessNotion::PairwiseDp => pairwise_dp_viol(attrs, predictions, k, n_groups),
        FairnessNotion::PairwiseEo => pairwise_eo_viol(attrs, labels, predictions, k, n_groups),
        FairnessNotion::PairwiseEqOdds => pairwise_eqodds_viol(attrs, labels, predictions, k, n_groups),
        other => Err(Error::Unsupported(format!("{other} is not a pairwise notion"))),
    }
}

/// 1-based dense ranks of real scores (equal scores share a rank) and the
/// number of distinct scores.
pub fn dense_ranks(scores: &[f64]) -> (Vec<usize>, usize) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));
    let mut ranks = vec![0; scores.len()];
    let mut level = 0;
    for (pos, &i) in order.iter().enumerate() {
        if pos == 0 || scores[i] != scores[order[pos - 1]] {
            level += 1;
        }
        ranks[i] = level;
    }
    (ranks, level)
}

/// Pairwise violation of a real-valued scoring function, treating the score
/// itself as the predictor with strict comparisons (ties count toward neither
/// side). With `distinct_labels_only`, pairwise DP is conditioned on
/// `y_1 != y_2`; pairwise EO already conditions on label order.
pub fn scorer_violation(
    notion: FairnessNotion,
    attrs: &[usize],
    labels: &[usize],
    scores: &[f64],
    k: usize,
    n_groups: usize,
    distinct_labels_only: bool,
) -> Result<FairnessReport> {
    check_len("scores", attrs.len(), scores.len())?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidDataset("scores must not be NaN".into()));
    }
    let (ranks, levels) = dense_ranks(scores);
    match notion {
        FairnessNotion::PairwiseDp if distinct_labels_only => {
            check_len("labels", attrs.len(), labels.len())?;
            check_attrs(attrs, n_groups)?;
            check_range("label", labels, 1, k)?;
            let table = PairCountTable::new(attrs, &zero_based(labels), &zero_based(&ranks), n_groups, k, levels);
            dp_report(&table, Rel::Ne)
        }
        FairnessNotion::PairwiseDp => pairwise_dp_viol(attrs, &ranks, levels, n_groups),
        FairnessNotion::PairwiseEo | FairnessNotion::PairwiseEqOdds => {
            check_len("labels", attrs.len(), labels.len())?;
            check_attrs(attrs, n_groups)?;
            check_range("label", labels, 1, k)?;
            let table = PairCountTable::new(attrs, &zero_based(labels), &zero_based(&ranks), n_groups, k, levels);
            let entries = table
                .ordered_pairs()
                .map(|(a, b)| {
                    let (f, bw) = eo_ratios(&table, a, b);
                    pair_entry(a, b, f, bw)
                })
                .collect();
            FairnessReport::from_entries(FairnessNotion::PairwiseEo, entries)
        }
        other => Err(Error::Unsupported(format!("{other} is not defined for scoring functions"))),
    }
}

fn rate(count: u64, total: u64) -> Option<f64> {
    (total > 0).then(|| count as f64 / total as f64)
}

/// Largest gap `|p_a - p_b|` over attribute pairs where both rates exist.
fn max_gap(rates: &[Option<f64>]) -> f64 {
    let defined: Vec<f64> = rates.iter().flatten().copied().collect();
    let lo = defined.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if defined.len() < 2 {
        0.0
    } else {
        hi - lo
    }
}

/// Binary standard EO gap: `max |P[f = preferred | a, y = preferred]`
/// across groups. Groups without a sample of the preferred label are skipped.
pub fn standard_eo_gap(
    attrs: &[usize],
    labels: &[usize],
    predictions: &[usize],
    preferred: usize,
    n_groups: usize,
) -> Result<f64> {
    check_len("labels", attrs.len(), labels.len())?;
    check_len("predictions", attrs.len(), predictions.len())?;
    check_attrs(attrs, n_groups)?;
    let mut hits = vec![0u64; n_groups];
    let mut totals = vec![0u64; n_groups];
    for ((&a, &y), &f) in attrs.iter().zip(labels).zip(predictions) {
        if y == preferred {
            totals[a] += 1;
            hits[a] += u64::from(f == preferred);
        }
    }
    let rates: Vec<_> = hits.iter().zip(&totals).map(|(&h, &t)| rate(h, t)).collect();
    Ok(max_gap(&rates))
}

/// Standard (non-pairwise) group notions.
///
/// * `StandardDp`: `max |P[f = l | a] - P[f = l | a']|` over labels `l`.
/// * `StandardEo`: binary notion, `k = 2` only, with label 1 as the preferred
///   outcome (`P[f = 1 | a, y = 1]`).
/// * `EqualizedOdds`: `max |P[f = l | a, y = m] - P[f = l | a', y = m]|`.
///
/// Empty conditioning groups are skipped.
pub fn standard_viol(
    notion: FairnessNotion,
    attrs: &[usize],
    labels: &[usize],
    predictions: &[usize],
    k: usize,
    n_groups: usize,
) -> Result<f64> {
    check_len("labels", attrs.len(), labels.len())?;
    check_len("predictions", attrs.len(), predictions.len())?;
    check_attrs(attrs, n_groups)?;
    check_range("label", labels, 1, k)?;
    check_range("prediction", predictions, 1, k)?;
    match notion {
        FairnessNotion::StandardDp => {
            let mut counts = vec![0u64; n_groups * k];
            let mut sizes = vec![0u64; n_groups];
            for (&a, &f) in attrs.iter().zip(predictions) {
                counts[a * k + f - 1] += 1;
                sizes[a] += 1;
            }
            Ok((0..k)
                .map(|l| {
                    let rates: Vec<_> = (0..n_groups).map(|g| rate(counts[g * k + l], sizes[g])).collect();
                    max_gap(&rates)
                })
                .fold(0.0, f64::max))
        }
        FairnessNotion::StandardEo => {
            if k != 2 {
                return Err(Error::Unsupported(format!(
                    "standard EO is only defined for binary labels, got k = {k}"
                )));
            }
            standard_eo_gap(attrs, labels, predictions, 1, n_groups)
        }
        FairnessNotion::EqualizedOdds => {
            let mut counts = vec![0u64; n_groups * k * k];
            let mut sizes = vec![0u64; n_groups * k];
            for ((&a, &y), &f) in attrs.iter().zip(labels).zip(predictions) {
                counts[(a * k + y - 1) * k + f - 1] += 1;
                sizes[a * k + y - 1] += 1;
            }
            let mut worst = 0.0f64;
            for y in 0..k {
                for l in 0..k {
                    let rates: Vec<_> = (0..n_groups)
                        .map(|g| rate(counts[(g * k + y) * k + l], sizes[g * k + y]))
                        .collect();
                    worst = worst.max(max_gap(&rates));
                }
            }
            Ok(worst)
        }
        other => Err(Error::Unsupported(format!("{other} is not a standard notion"))),
    }
}

/// Empirical γ-margin loss: `(1/n) Σ_i Σ_j 1{y_i^j (s(x_i) - θ_j) <= γ}` with
/// `y^j = +1` for `j < y` and `-1` otherwise. Scores are taken on the rows of
/// `data` as given.
pub fn margin_loss(scorer: &LinearScorer, thresholds: &Thresholds, data: &Dataset, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidConfig(format!("margin gamma must be positive, got {gamma}")));
    }
    if thresholds.k() != data.k() {
        return Err(Error::LengthMismatch {
            what: "thresholds",
            expected: data.k() - 1,
            found: thresholds.values().len(),
        });
    }
    let mut total = 0u64;
    for (x, &y) in data.rows().zip(data.labels()) {
        let s = scorer.score(x)?;
        for (j, &theta) in thresholds.values().iter().enumerate() {
            let sign = if j + 1 < y { 1.0 } else { -1.0 };
            total += u64::from(sign * (s - theta) <= gamma);
        }
    }
    Ok(total as f64 / data.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelOrderStats {
    pub a1: usize,
    pub a2: usize,
    /// `P[y_1 > y_2 | a_1, a_2]`
    pub greater: f64,
    /// `P[y_1 < y_2 | a_1, a_2]`
    pub less: f64,
    pub diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub n: usize,
    pub k: usize,
    pub attribute_names: Vec<String>,
    /// `P[a = g]` per group.
    pub group_probabilities: Vec<f64>,
    pub pairs: Vec<LabelOrderStats>,
}

/// Ground-truth label-order statistics between groups. Pairs involving an
/// empty group are omitted.
pub fn group_stats(data: &Dataset) -> GroupStats {
    let n_groups = data.n_groups();
    let table = dp_table(data.attrs(), &zero_based(data.labels()), n_groups, data.k());
    let n = data.len();
    let group_probabilities = (0..n_groups).map(|g| table.group_size(g) as f64 / n as f64).collect();
    let pairs = table
        .ordered_pairs()
        .filter_map(|(a, b)| {
            let total = table.count(a, b, Rel::Any, Rel::Any);
            let greater = rate(table.count(a, b, Rel::Any, Rel::Gt), total)?;
            let less = rate(table.count(a, b, Rel::Any, Rel::Lt), total)?;
            Some(LabelOrderStats {
                a1: a,
                a2: b,
                greater,
                less,
                diff: (greater - less).abs(),
            })
        })
        .collect();
    GroupStats {
        n,
        k: data.k(),
        attribute_names: data.attribute_names().to_vec(),
        group_probabilities,
        pairs,
    }
}
