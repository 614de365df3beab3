//! Brute-force oracles and random instance generators shared by the
//! integration tests. Everything here enumerates pairs or placements
//! directly and never calls the fast library paths it is compared against.

#![allow(dead_code)]

use std::path::Path;

use ordfair::{CostMatrix, Dataset, FairnessNotion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One ordered group pair as seen by the oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OraclePair {
    pub a1: usize,
    pub a2: usize,
    pub forward: f64,
    pub backward: f64,
    pub diff: f64,
}

/// `(forward hits, forward total, backward hits, backward total)` for one
/// ordered group pair; each index pair is tested with the given predicates.
fn count_pairs(
    attrs: &[usize],
    a1: usize,
    a2: usize,
    fwd_cond: impl Fn(usize, usize) -> bool,
    fwd_hit: impl Fn(usize, usize) -> bool,
    bwd_cond: impl Fn(usize, usize) -> bool,
    bwd_hit: impl Fn(usize, usize) -> bool,
) -> (u64, u64, u64, u64) {
    let n = attrs.len();
    let (mut fh, mut ft, mut bh, mut bt) = (0, 0, 0, 0);
    for i in 0..n {
        for j in 0..n {
            if attrs[i] != a1 || attrs[j] != a2 {
                continue;
            }
            if fwd_cond(i, j) {
                ft += 1;
                fh += u64::from(fwd_hit(i, j));
            }
            if bwd_cond(i, j) {
                bt += 1;
                bh += u64::from(bwd_hit(i, j));
            }
        }
    }
    (fh, ft, bh, bt)
}

fn entry(a1: usize, a2: usize, c: (u64, u64, u64, u64)) -> Option<OraclePair> {
    let (fh, ft, bh, bt) = c;
    if ft == 0 || bt == 0 {
        return None;
    }
    let forward = fh as f64 / ft as f64;
    let backward = bh as f64 / bt as f64;
    Some(OraclePair {
        a1,
        a2,
        forward,
        backward,
        diff: (forward - backward).abs(),
    })
}

/// Per ordered pair of distinct groups: `Some` when defined.
pub fn naive_pairs(notion: FairnessNotion, attrs: &[usize], labels: &[usize], preds: &[usize], n_groups: usize) -> Vec<((usize, usize), Option<OraclePair>)> {
    let mut out = Vec::new();
    for a1 in 0..n_groups {
        for a2 in 0..n_groups {
            if a1 == a2 {
                continue;
            }
            let e = match notion {
                FairnessNotion::PairwiseDp => entry(
                    a1,
                    a2,
                    count_pairs(attrs, a1, a2, |_, _| true, |i, j| preds[i] > preds[j], |_, _| true, |i, j| preds[i] < preds[j]),
                ),
                FairnessNotion::PairwiseEo => entry(a1, a2, eo_counts(attrs, labels, preds, a1, a2)),
                FairnessNotion::PairwiseEqOdds => {
                    let strict = entry(a1, a2, eo_counts(attrs, labels, preds, a1, a2));
                    let loose = entry(
                        a1,
                        a2,
                        count_pairs(
                            attrs,
                            a1,
                            a2,
                            |i, j| labels[i] <= labels[j],
                            |i, j| preds[i] <= preds[j],
                            |i, j| labels[i] >= labels[j],
                            |i, j| preds[i] >= preds[j],
                        ),
                    );
                    match (strict, loose) {
                        (Some(s), Some(l)) => Some(if s.diff >= l.diff { s } else { l }),
                        (s, l) => s.or(l),
                    }
                }
                other => panic!("{other:?} is not pairwise"),
            };
            out.push(((a1, a2), e));
        }
    }
    out
}

fn eo_counts(attrs: &[usize], labels: &[usize], preds: &[usize], a1: usize, a2: usize) -> (u64, u64, u64, u64) {
    count_pairs(
        attrs,
        a1,
        a2,
        |i, j| labels[i] > labels[j],
        |i, j| preds[i] > preds[j],
        |i, j| labels[i] < labels[j],
        |i, j| preds[i] < preds[j],
    )
}

/// Max diff over defined pairs; `None` when no pair is defined.
pub fn naive_viol(notion: FairnessNotion, attrs: &[usize], labels: &[usize], preds: &[usize], n_groups: usize) -> Option<f64> {
    let defined: Vec<f64> = naive_pairs(notion, attrs, labels, preds, n_groups)
        .into_iter()
        .filter_map(|(_, e)| e.map(|e| e.diff))
        .collect();
    (!defined.is_empty()).then(|| defined.into_iter().fold(0.0, f64::max))
}

/// Pairwise violation of real scores with strict comparisons. With
/// `distinct_labels` the DP probabilities are conditioned on `y_i != y_j`.
pub fn naive_scorer_viol(
    notion: FairnessNotion,
    attrs: &[usize],
    labels: &[usize],
    scores: &[f64],
    n_groups: usize,
    distinct_labels: bool,
) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for a1 in 0..n_groups {
        for a2 in 0..n_groups {
            if a1 == a2 {
                continue;
            }
            let c = match notion {
                FairnessNotion::PairwiseDp => {
                    let cond = |i: usize, j: usize| !distinct_labels || labels[i] != labels[j];
                    count_pairs(attrs, a1, a2, cond, |i, j| scores[i] > scores[j], cond, |i, j| scores[i] < scores[j])
                }
                _ => count_pairs(
                    attrs,
                    a1,
                    a2,
                    |i, j| labels[i] > labels[j],
                    |i, j| scores[i] > scores[j],
                    |i, j| labels[i] < labels[j],
                    |i, j| scores[i] < scores[j],
                ),
            };
            if let Some(e) = entry(a1, a2, c) {
                worst = Some(worst.unwrap_or(0.0).max(e.diff));
            }
        }
    }
    worst
}

fn group_rates(members: impl Fn(usize) -> bool, hit: impl Fn(usize) -> bool, attrs: &[usize], n_groups: usize) -> Vec<f64> {
    (0..n_groups)
        .filter_map(|g| {
            let idx: Vec<usize> = (0..attrs.len()).filter(|&i| attrs[i] == g && members(i)).collect();
            (!idx.is_empty()).then(|| idx.iter().filter(|&&i| hit(i)).count() as f64 / idx.len() as f64)
        })
        .collect()
}

fn spread(rates: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for x in rates {
        for y in rates {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

pub fn naive_standard_dp(attrs: &[usize], preds: &[usize], k: usize, n_groups: usize) -> f64 {
    (1..=k)
        .map(|l| spread(&group_rates(|_| true, |i| preds[i] == l, attrs, n_groups)))
        .fold(0.0, f64::max)
}

pub fn naive_equalized_odds(attrs: &[usize], labels: &[usize], preds: &[usize], k: usize, n_groups: usize) -> f64 {
    let mut worst = 0.0f64;
    for m in 1..=k {
        for l in 1..=k {
            worst = worst.max(spread(&group_rates(|i| labels[i] == m, |i| preds[i] == l, attrs, n_groups)));
        }
    }
    worst
}

pub fn naive_standard_eo(attrs: &[usize], labels: &[usize], preds: &[usize], preferred: usize, n_groups: usize) -> f64 {
    spread(&group_rates(|i| labels[i] == preferred, |i| preds[i] == preferred, attrs, n_groups))
}

pub fn naive_cost(labels: &[usize], preds: &[usize], cost: &CostMatrix) -> f64 {
    labels.iter().zip(preds).map(|(&y, &f)| cost.get(y, f)).sum::<f64>() / labels.len() as f64
}

/// `1 + #{θ_j < s}`.
pub fn predict(theta: &[f64], s: f64) -> usize {
    1 + theta.iter().filter(|&&t| t < s).count()
}

/// Every non-decreasing threshold vector of length `k - 1` drawn from
/// candidate cut values: below all scores, between consecutive distinct
/// scores, and above all scores. Together these realize every predictor a
/// threshold model can produce on the given scores.
pub fn all_threshold_vectors(scores: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut cuts = vec![distinct[0] - 1.0];
    cuts.extend(distinct.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    cuts.push(distinct[distinct.len() - 1] + 1.0);
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k - 1);
    fn rec(cuts: &[f64], from: usize, left: usize, current: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if left == 0 {
            out.push(current.clone());
            return;
        }
        for c in from..cuts.len() {
            current.push(cuts[c]);
            rec(cuts, c, left - 1, current, out);
            current.pop();
        }
    }
    rec(&cuts, 0, k - 1, &mut current, &mut out);
    out
}

/// Smallest `cost + λ·viol` over all threshold placements, with the cost
/// and violation attaining it. Placements with an undefined violation are
/// skipped; `None` when every placement is undefined.
pub fn brute_force_objective(
    scores: &[f64],
    labels: &[usize],
    attrs: &[usize],
    n_groups: usize,
    cost: &CostMatrix,
    lambda: f64,
    notion: FairnessNotion,
) -> Option<(f64, f64, f64)> {
    let k = cost.k();
    let mut best: Option<(f64, f64, f64)> = None;
    for theta in all_threshold_vectors(scores, k) {
        let preds: Vec<usize> = scores.iter().map(|&s| predict(&theta, s)).collect();
        let Some(v) = naive_viol(notion, attrs, labels, &preds, n_groups) else { continue };
        let c = naive_cost(labels, &preds, cost);
        let obj = c + lambda * v;
        if best.map_or(true, |b| obj < b.0) {
            best = Some((obj, c, v));
        }
    }
    best
}

pub fn brute_force_min_cost(scores: &[f64], labels: &[usize], cost: &CostMatrix) -> f64 {
    all_threshold_vectors(scores, cost.k())
        .iter()
        .map(|theta| {
            let preds: Vec<usize> = scores.iter().map(|&s| predict(theta, s)).collect();
            naive_cost(labels, &preds, cost)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Labels in `1..=k`, groups in `0..g`; every group is non-empty when
/// `n >= g`.
pub fn random_instance(rng: &mut impl Rng, n: usize, k: usize, g: usize) -> (Vec<usize>, Vec<usize>) {
    let labels = (0..n).map(|_| rng.gen_range(1..=k)).collect();
    let mut attrs: Vec<usize> = (0..n).map(|_| rng.gen_range(0..g)).collect();
    if n >= g {
        for (a, slot) in (0..g).zip(rand::seq::index::sample(rng, n, g)) {
            attrs[slot] = a;
        }
    }
    (labels, attrs)
}

/// Small integer scores so ties are common.
pub fn random_scores(rng: &mut impl Rng, n: usize, range: i32) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.gen_range(-range..=range))).collect()
}

pub fn group_names(g: usize) -> Vec<String> {
    (0..g).map(|a| format!("g{a}")).collect()
}

pub fn dataset(rows: Vec<Vec<f64>>, labels: Vec<usize>, attrs: Vec<usize>, k: usize, g: usize) -> Dataset {
    Dataset::new(rows, labels, attrs, k, group_names(g)).expect("valid test dataset")
}

/// Writes a CSV with two informative features, one noise feature, a text
/// group column, a numeric column and a label column with values 10..40.
pub fn write_synthetic_csv(path: &Path, n: usize, seed: u64) {
    let mut r = rng(seed);
    let mut out = String::from("x1,x2,x3,grp,age,y\n");
    for _ in 0..n {
        let b = r.gen_bool(0.5);
        let x1: f64 = r.gen_range(-1.5..1.5) + if b { 0.8 } else { 0.0 };
        let x2: f64 = r.gen_range(-1.5..1.5);
        let x3: f64 = r.gen_range(-1.0..1.0);
        let s = x1 + 0.5 * x2 + r.gen_range(-0.4..0.4);
        let y = match s {
            s if s < -0.6 => 10,
            s if s < 0.2 => 20,
            s if s < 0.9 => 30,
            _ => 40,
        };
        let grp = if b { "north" } else { "south" };
        out.push_str(&format!("{x1:.4},{x2:.4},{x3:.4},{grp},{},{y}\n", r.gen_range(18..70)));
    }
    std::fs::write(path, out).expect("write csv");
}

/// Two vendors: the first has one 1-star, `n` 2-star and two 3-star items,
/// the second one 1-star, one 2-star and `2n` 3-star items. Half of the
/// 3-star items of each vendor are predicted as 2 stars.
pub fn tshirt_fixture(n: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let (mut attrs, mut labels, mut preds) = (Vec::new(), Vec::new(), Vec::new());
    let mut push = |a: usize, y: usize, f: usize, count: usize| {
        for _ in 0..count {
            attrs.push(a);
            labels.push(y);
            preds.push(f);
        }
    };
    push(0, 1, 1, 1);
    push(0, 2, 2, n);
    push(0, 3, 3, 1);
    push(0, 3, 2, 1);
    push(1, 1, 1, 1);
    push(1, 2, 2, 1);
    push(1, 3, 3, n);
    push(1, 3, 2, n);
    (attrs, labels, preds)
}

/// Central finite-difference gradient.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            let step = h * x[i].abs().max(1.0);
            plus[i] += step;
            minus[i] -= step;
            (f(&plus) - f(&minus)) / (2.0 * step)
        })
        .collect()
}

/// `max_i |a_i - b_i| / max(max_i |b_i|, 1e-3)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}
