//! Enumeration and Monte Carlo experiments.
//!
//! * For every ordering of `n` samples by a scorer: the scorer's own
//!   violation and the fraction of threshold placements giving a perfectly
//!   fair predictor.
//! * Convergence of the empirical violation to the violation under a finite
//!   population, as the sample size grows.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use rand::distributions::{Distribution, WeightedIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{pairwise_viol, scorer_violation};
use crate::model::FairnessNotion;
use crate::rng::{stream_rng, Stream};

pub const MAX_ENUMERATION_N: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationPoint {
    /// Score of each sample (a permutation of `1..=n`).
    pub scores: Vec<usize>,
    pub scorer_violation: f64,
    pub fair_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub n: usize,
    pub k: usize,
    pub notion: FairnessNotion,
    /// Distinct predictors reachable by thresholds on distinct scores.
    pub placements: usize,
    pub points: Vec<PermutationPoint>,
    pub spearman: f64,
}

impl SimulationResult {
    /// Distinct (scorer violation, fair fraction) pairs with multiplicities.
    pub fn scatter(&self) -> Vec<(f64, f64, usize)> {
        let mut counts: BTreeMap<(u64, u64), usize> = BTreeMap::new();
        for p in &self.points {
            *counts.entry((p.scorer_violation.to_bits(), p.fair_fraction.to_bits())).or_default() += 1;
        }
        let mut out: Vec<(f64, f64, usize)> = counts
            .into_iter()
            .map(|((v, f), m)| (f64::from_bits(v), f64::from_bits(f), m))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        out
    }

    pub fn scatter_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scorer_violation", "fair_fraction", "multiplicity"])?;
        for (v, f, m) in self.scatter() {
            w.write_record([v.to_string(), f.to_string(), m.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// All non-decreasing label sequences of length `n` over `1..=k`, i.e. all
/// predictors obtainable by thresholding `n` distinct scores (empty classes
/// allowed).
pub fn monotone_labelings(n: usize, k: usize) -> Vec<Vec<usize>> {
    (1..=k)
        .combinations_with_replacement(n)
        .collect()
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        let avg = (start + end - 1) as f64 / 2.0 + 1.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation (average ranks for ties). NaN when either side
/// is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// For every permutation of the scores `1..=n`: the scorer's violation
/// (strict comparisons) and the fraction of distinct thresholded predictors
/// with violation exactly 0. DP ignores the labels.
pub fn enumerate_fair_threshold_fractions(
    k: usize,
    attrs: &[usize],
    labels: Option<&[usize]>,
    notion: FairnessNotion,
) -> Result<SimulationResult> {
    let n = attrs.len();
    if n > MAX_ENUMERATION_N {
        return Err(Error::SizeGuard {
            what: "permutation enumeration",
            n,
            limit: MAX_ENUMERATION_N,
        });
    }
    if n == 0 || k < 2 {
        return Err(Error::InvalidConfig("enumeration needs n >= 1 and k >= 2".into()));
    }
    if !matches!(notion, FairnessNotion::PairwiseDp | FairnessNotion::PairwiseEo) {
        return Err(Error::Unsupported(format!("enumeration supports pairwise DP and EO, not {notion}")));
    }
    let labels: Vec<usize> = match (labels, notion) {
        (Some(l), _) => l.to_vec(),
        (None, FairnessNotion::PairwiseDp) => vec![1; n],
        (None, _) => return Err(Error::InvalidConfig("pairwise EO enumeration needs labels".into())),
    };
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            what: "labels",
            expected: n,
            found: labels.len(),
        });
    }
    let ky = labels.iter().copied().max().unwrap_or(1).max(k);
    let n_groups = attrs.iter().copied().max().unwrap_or(0) + 1;
    let predictors = monotone_labelings(n, k);

    // Both quantities depend only on the (attribute, label) sequence in
    // score order, so evaluate each distinct sequence once.
    let permutations: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let key_of = |perm: &[usize]| -> Vec<usize> {
        // perm[r] = sample ranked r-th.
        perm.iter().map(|&i| attrs[i] * (ky + 1) + labels[i]).collect()
    };
    let mut distinct: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut representatives = Vec::new();
    let perm_keys: Vec<usize> = permutations
        .iter()
        .map(|p| {
            let key = key_of(p);
            *distinct.entry(key).or_insert_with(|| {
                representatives.push(p.clone());
                representatives.len() - 1
            })
        })
        .collect();
    let evaluated = representatives
        .par_iter()
        .map(|perm| {
            let a: Vec<usize> = perm.iter().map(|&i| attrs[i]).collect();
            let y: Vec<usize> = perm.iter().map(|&i| labels[i]).collect();
            let scores: Vec<f64> = (1..=n).map(|r| r as f64).collect();
            let sv = scorer_violation(notion, &a, &y, &scores, ky, n_groups, false)?.violation;
            let mut fair = 0usize;
            for f in &predictors {
                if pairwise_viol(notion, &a, &y, f, ky, n_groups)?.violation == 0.0 {
                    fair += 1;
                }
            }
            Ok((sv, fair as f64 / predictors.len() as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<PermutationPoint> = permutations
        .iter()
        .zip(&perm_keys)
        .map(|(perm, &key)| {
            let mut scores = vec![0; n];
            for (r, &i) in perm.iter().enumerate() {
                scores[i] = r + 1;
            }
            PermutationPoint {
                scores,
                scorer_violation: evaluated[key].0,
                fair_fraction: evaluated[key].1,
            }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.scorer_violation).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.fair_fraction).collect();
    Ok(SimulationResult {
        n,
        k,
        notion,
        placements: predictors.len(),
        spearman: spearman(&xs, &ys),
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub label: usize,
    pub attr: usize,
    pub prediction: usize,
    pub multiplicity: u64,
}

/// A finite distribution over (label, attribute, prediction) with integer
/// weights; the predictor is already applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    support: Vec<SupportPoint>,
    k: usize,
    n_groups: usize,
}

impl Population {
    pub fn new(support: Vec<SupportPoint>, k: usize, n_groups: usize) -> Result<Self> {
        if support.is_empty() || k < 2 || n_groups < 2 {
            return Err(Error::InvalidConfig("a population needs support, k >= 2 and at least two groups".into()));
        }
        if let Some(p) = support
            .iter()
            .find(|p| p.label == 0 || p.label > k || p.prediction == 0 || p.prediction > k || p.attr >= n_groups)
        {
            return Err(Error::InvalidDataset(format!("support point {p:?} out of range")));
        }
        let mut mass = vec![0u64; n_groups];
        for p in &support {
            mass[p.attr] += p.multiplicity;
        }
        if let Some(g) = mass.iter().position(|&m| m == 0) {
            return Err(Error::InvalidDataset(format!("group {g} has probability 0 in the population")));
        }
        Ok(Self { support, k, n_groups })
    }

    /// Empirical distribution of labelled predictions.
    pub fn from_samples(labels: &[usize], attrs: &[usize], predictions: &[usize], k: usize, n_groups: usize) -> Result<Self> {
        let mut counts: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
        for ((&y, &a), &f) in labels.iter().zip(attrs).zip(predictions) {
            *counts.entry((y, a, f)).or_default() += 1;
        }
        let support = counts
            .into_iter()
            .map(|((label, attr, prediction), multiplicity)| SupportPoint {
                label,
                attr,
                prediction,
                multiplicity,
            })
            .collect();
        Self::new(support, k, n_groups)
    }

    /// Two groups, three classes; group 1 is pushed toward higher labels
    /// and predictions.
    pub fn demo() -> Self {
        let mut support = Vec::new();
        for attr in 0..2usize {
            for label in 1..=3usize {
                for prediction in 1..=3usize {
                    let agree = if label == prediction { 6 } else { 1 };
                    let tilt = if attr == 1 { prediction as u64 } else { (4 - prediction) as u64 };
                    support.push(SupportPoint {
                        label,
                        attr,
                        prediction,
                        multiplicity: agree * tilt,
                    });
                }
            }
        }
        Self::new(support, 3, 2).expect("valid demo population")
    }

    pub fn support(&self) -> &[SupportPoint] {
        &self.support
    }

    /// Pairwise violation with pair probabilities weighted by multiplicities.
    pub fn violation(&self, notion: FairnessNotion) -> Result<f64> {
        weighted_violation(
            self.support.iter().map(|p| (p.label, p.attr, p.prediction, p.multiplicity)),
            self.k,
            self.n_groups,
            notion,
        )
    }
}

/// Exact pairwise violation from weighted (label, attribute, prediction)
/// cells. Pairs of distinct groups never involve the same sample, so this
/// equals the empirical violation of the expanded sample.
fn weighted_violation(
    cells: impl Iterator<Item = (usize, usize, usize, u64)>,
    k: usize,
    g: usize,
    notion: FairnessNotion,
) -> Result<f64> {
    let mut w = vec![0u128; g * k * k];
    for (y, a, f, m) in cells {
        w[(a * k + y - 1) * k + f - 1] += u128::from(m);
    }
    let eo = match notion {
        FairnessNotion::PairwiseDp => false,
        FairnessNotion::PairwiseEo => true,
        other => return Err(Error::Unsupported(format!("population violation supports pairwise DP and EO, not {other}"))),
    };
    let mut worst: Option<f64> = None;
    for a in 0..g {
        for b in (0..g).filter(|&b| b != a) {
            let (mut fwd, mut fwd_total, mut bwd, mut bwd_total) = (0u128, 0u128, 0u128, 0u128);
            for ya in 0..k {
                for yb in 0..k {
                    for fa in 0..k {
                        for fb in 0..k {
                            let pairs = w[(a * k + ya) * k + fa] * w[(b * k + yb) * k + fb];
                            if pairs == 0 {
                                continue;
                            }
                            if !eo || ya > yb {
                                fwd_total += pairs;
                                fwd += if fa > fb { pairs } else { 0 };
                            }
                            if !eo || ya < yb {
                                bwd_total += pairs;
                                bwd += if fa < fb { pairs } else { 0 };
                            }
                        }
                    }
                }
            }
            if fwd_total > 0 && bwd_total > 0 {
                let d = (fwd as f64 / fwd_total as f64 - bwd as f64 / bwd_total as f64).abs();
                worst = Some(worst.map_or(d, |x| x.max(d)));
            }
        }
    }
    worst.ok_or(Error::UndefinedViolation { notion })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub mean_deviation: f64,
    pub quantile: f64,
    /// Repetitions whose sample violation was undefined (excluded).
    pub undefined: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub notion: FairnessNotion,
    pub delta: f64,
    pub repetitions: usize,
    pub population_violation: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares fit `quantile ≈ c / √n`.
    pub rate_constant: f64,
    pub r_squared: f64,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "mean_deviation", "quantile", "undefined"])?;
        for r in &self.rows {
            w.write_record([r.n.to_string(), r.mean_deviation.to_string(), r.quantile.to_string(), r.undefined.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Smallest value with at least a `level` fraction of the sample at or below it.
fn empirical_quantile(values: &mut [f64], level: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let idx = ((level * values.len() as f64).ceil() as usize).clamp(1, values.len()) - 1;
    values[idx]
}

/// Draws `repetitions` i.i.d. samples of each size in `n_grid` and reports the
/// mean and `(1 - delta)`-quantile of `|viol(sample) - viol(population)|`.
pub fn convergence_experiment(
    population: &Population,
    notion: FairnessNotion,
    n_grid: &[usize],
    repetitions: usize,
    delta: f64,
    seed: u64,
) -> Result<ConvergenceTable> {
    if repetitions == 0 || n_grid.is_empty() || n_grid.contains(&0) {
        return Err(Error::InvalidConfig("need repetitions >= 1 and positive sample sizes".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidConfig(format!("delta must lie in (0, 1), got {delta}")));
    }
    let reference = population.violation(notion)?;
    let weights: Vec<u64> = population.support.iter().map(|p| p.multiplicity).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidConfig(format!("population weights: {e}")))?;
    let mut rows = Vec::with_capacity(n_grid.len());
    for (ni, &n) in n_grid.iter().enumerate() {
        let draws: Vec<Option<f64>> = (0..repetitions)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream_rng(seed, Stream::Convergence, ((ni as u64) << 32) | r as u64);
                let mut counts = vec![0u64; population.support.len()];
                for _ in 0..n {
                    counts[dist.sample(&mut rng)] += 1;
                }
                let cells = population
                    .support
                    .iter()
                    .zip(&counts)
                    .filter(|(_, &c)| c > 0)
                    .map(|(p, &c)| (p.label, p.attr, p.prediction, c));
                weighted_violation(cells, population.k, population.n_groups, notion)
                    .ok()
                    .map(|v| (v - reference).abs())
            })
            .collect();
        let undefined = draws.iter().filter(|d| d.is_none()).count();
        let mut devs: Vec<f64> = draws.into_iter().flatten().collect();
        let (mean_deviation, quantile) = if devs.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let mean = devs.iter().sum::<f64>() / devs.len() as f64;
            (mean, empirical_quantile(&mut devs, 1.0 - delta))
        };
        rows.push(ConvergenceRow {
            n,
            mean_deviation,
            quantile,
            undefined,
        });
    }
    let fitted: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.quantile.is_finite())
        .map(|r| (1.0 / (r.n as f64).sqrt(), r.quantile))
        .collect();
    let c = fitted.iter().map(|(x, q)| x * q).sum::<f64>() / fitted.iter().map(|(x, _)| x * x).sum::<f64>();
    let mean_q = fitted.iter().map(|(_, q)| q).sum::<f64>() / fitted.len() as f64;
    let ss_res: f64 = fitted.iter().map(|(x, q)| (q - c * x).powi(2)).sum();
    let ss_tot: f64 = fitted.iter().map(|(_, q)| (q - mean_q).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    Ok(ConvergenceTable {
        notion,
        delta,
        repetitions,
        population_violation: reference,
        rows,
        rate_constant: c,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::pairwise_eo_viol;

    #[test]
    fn two_sample_enumeration() {
        let r = enumerate_fair_threshold_fractions(2, &[0, 1], None, FairnessNotion::PairwiseDp).unwrap();
        assert_eq!(r.placements, 3);
        assert_eq!(r.points.len(), 2);
        for p in &r.points {
            assert_eq!(p.scorer_violation, 1.0);
            // Only the two constant predictors are fair.
            assert_eq!(p.fair_fraction, 2.0 / 3.0);
        }
    }

    #[test]
    fn labelings_count() {
        assert_eq!(monotone_labelings(8, 3).len(), 45);
        assert_eq!(monotone_labelings(4, 4).len(), 35);
        assert!(monotone_labelings(5, 3).iter().all(|l| l.windows(2).all(|w| w[0] <= w[1])));
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 1.0, 2.0], &[1.0, 1.0, 5.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn population_matches_expanded_sample() {
        let labels = [1, 3, 3, 2, 1, 3, 2];
        let attrs = [0, 0, 1, 1, 0, 1, 1];
        let preds = [1, 3, 2, 2, 1, 3, 1];
        let pop = Population::from_samples(&labels, &attrs, &preds, 3, 2).unwrap();
        let direct = pairwise_eo_viol(&attrs, &labels, &preds, 3, 2).unwrap().violation;
        assert_eq!(pop.violation(FairnessNotion::PairwiseEo).unwrap(), direct);
    }

    #[test]
    fn constant_predictor_never_deviates() {
        let labels = [1, 2, 3, 2, 1, 3];
        let attrs = [0, 0, 1, 1, 0, 1];
        let pop = Population::from_samples(&labels, &attrs, &[2; 6], 3, 2).unwrap();
        let t = convergence_experiment(&pop, FairnessNotion::PairwiseDp, &[10, 40], 20, 0.05, 1).unwrap();
        assert!(t.rows.iter().all(|r| r.mean_deviation == 0.0 && r.quantile == 0.0));
    }

    #[test]
    fn empty_group_rejected() {
        let p = vec![SupportPoint {
            label: 1,
            attr: 0,
            prediction: 1,
            multiplicity: 3,
        }];
        assert!(Population::new(p, 2, 2).is_err());
    }

    #[test]
    fn size_guard() {
        assert!(matches!(
            enumerate_fair_threshold_fractions(2, &[0; 11], None, FairnessNotion::PairwiseDp),
            Err(Error::SizeGuard { .. })
        ));
    }
}
