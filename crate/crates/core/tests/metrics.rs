mod support;

use ordfair::metrics::{pairwise_dp_viol, pairwise_eo_viol, pairwise_eqodds_viol, pairwise_viol, scorer_violation, standard_eo_gap, standard_viol};
use ordfair::{CostMatrix, Error, FairnessNotion};
use proptest::prelude::*;
use rand::Rng;
use support::*;

const PAIRWISE: [FairnessNotion; 3] = [FairnessNotion::PairwiseDp, FairnessNotion::PairwiseEo, FairnessNotion::PairwiseEqOdds];

fn check_against_oracle(attrs: &[usize], labels: &[usize], preds: &[usize], k: usize, g: usize) {
    for notion in PAIRWISE {
        let fast = pairwise_viol(notion, attrs, labels, preds, k, g);
        let slow = naive_pairs(notion, attrs, labels, preds, g);
        match (&fast, naive_viol(notion, attrs, labels, preds, g)) {
            (Ok(report), Some(v)) => {
                assert_eq!(report.violation, v, "{notion:?} a={attrs:?} y={labels:?} f={preds:?}");
                for ((a1, a2), e) in &slow {
                    let p = report.pair(*a1, *a2).expect("pair present");
                    assert_eq!(p.valid, e.is_some());
                    if let Some(e) = e {
                        assert_eq!((p.forward, p.backward, p.diff), (e.forward, e.backward, e.diff));
                    }
                }
            }
            (Err(Error::UndefinedViolation { .. }), None) => {}
            (fast, slow) => panic!("{notion:?}: fast {fast:?} vs oracle {slow:?}"),
        }
    }
}

#[test]
fn fast_metrics_equal_pair_enumeration() {
    let mut r = rng(11);
    for _ in 0..500 {
        let n = r.gen_range(1..=30);
        let k = r.gen_range(2..=5);
        let g = r.gen_range(1..=3);
        let (labels, attrs) = random_instance(&mut r, n, k, g);
        let preds: Vec<usize> = (0..n).map(|_| r.gen_range(1..=k)).collect();
        check_against_oracle(&attrs, &labels, &preds, k, g);
    }
}

#[test]
fn standard_notions_equal_direct_counts() {
    let mut r = rng(12);
    for _ in 0..300 {
        let n = r.gen_range(1..=20);
        let k = r.gen_range(2..=4);
        let g = r.gen_range(1..=3);
        let (labels, attrs) = random_instance(&mut r, n, k, g);
        let preds: Vec<usize> = (0..n).map(|_| r.gen_range(1..=k)).collect();
        let dp = standard_viol(FairnessNotion::StandardDp, &attrs, &labels, &preds, k, g).unwrap();
        assert!((dp - naive_standard_dp(&attrs, &preds, k, g)).abs() < 1e-15);
        let eqo = standard_viol(FairnessNotion::EqualizedOdds, &attrs, &labels, &preds, k, g).unwrap();
        assert!((eqo - naive_equalized_odds(&attrs, &labels, &preds, k, g)).abs() < 1e-15);
        let eo = standard_eo_gap(&attrs, &labels, &preds, 1, g).unwrap();
        assert!((eo - naive_standard_eo(&attrs, &labels, &preds, 1, g)).abs() < 1e-15);
    }
}

#[test]
fn scorer_violation_equals_pair_enumeration() {
    let mut r = rng(13);
    for _ in 0..200 {
        let n = r.gen_range(2..=20);
        let k = r.gen_range(2..=4);
        let g = r.gen_range(2..=3);
        let (labels, attrs) = random_instance(&mut r, n, k, g);
        let scores = random_scores(&mut r, n, 4);
        for (notion, distinct) in [
            (FairnessNotion::PairwiseDp, false),
            (FairnessNotion::PairwiseDp, true),
            (FairnessNotion::PairwiseEo, false),
        ] {
            let fast = scorer_violation(notion, &attrs, &labels, &scores, k, g, distinct).ok().map(|r| r.violation);
            assert_eq!(fast, naive_scorer_viol(notion, &attrs, &labels, &scores, g, distinct));
        }
    }
}

// Fixtures with stated values.

#[test]
fn projection_fixture_with_five_points() {
    // Second coordinate of x = (1,3), (2,2), (3,2), (4,4), (5,4).
    let scores = [3.0, 2.0, 2.0, 4.0, 4.0];
    let labels = [1, 2, 2, 4, 4];
    let attrs = [0, 1, 1, 1, 1];
    let theta = [0.0, 2.5, 3.5];
    let preds: Vec<usize> = scores.iter().map(|&s| predict(&theta, s)).collect();
    assert_eq!(preds, vec![3, 2, 2, 4, 4]);
    let mae = ordfair::metrics::expected_cost(&labels, &preds, &CostMatrix::absolute(4)).unwrap();
    assert_eq!(mae, 0.4);
    assert_eq!(pairwise_dp_viol(&attrs, &preds, 4, 2).unwrap().violation, 0.0);
}

#[test]
fn six_point_dp_fixture() {
    let attrs = [0, 0, 1, 1, 0, 0];
    let labels = [1, 1, 1, 1, 2, 2];
    let preds = [1, 1, 1, 1, 2, 2];
    assert_eq!(pairwise_dp_viol(&attrs, &preds, 4, 2).unwrap().violation, 0.5);
    assert_eq!(ordfair::metrics::expected_cost(&labels, &preds, &CostMatrix::absolute(4)).unwrap(), 0.0);
}

#[test]
fn six_point_eo_fixture() {
    let attrs = [0, 1, 1, 1, 0, 0];
    let labels = [1, 2, 1, 1, 2, 2];
    let theta = [4.5, 7.0, 7.0];
    let preds: Vec<usize> = (1..=6).map(|i| predict(&theta, i as f64)).collect();
    assert_eq!(preds, vec![1, 1, 1, 1, 2, 2]);
    assert_eq!(pairwise_eo_viol(&attrs, &labels, &preds, 4, 2).unwrap().violation, 1.0);
    let mae = ordfair::metrics::expected_cost(&labels, &preds, &CostMatrix::absolute(4)).unwrap();
    assert!((mae - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn tshirt_fixture_violation() {
    let n: f64 = 10.0;
    let expected = (n + 3.0) / (n + 4.0) - (1.0 + 2.0 * n + n * n) / (1.0 + 2.0 * n + 2.0 * n * n);
    assert!((expected - (13.0 / 14.0 - 121.0 / 221.0)).abs() < 1e-15);
    let (attrs, labels, preds) = tshirt_fixture(10);
    let report = pairwise_eo_viol(&attrs, &labels, &preds, 3, 2).unwrap();
    assert!((report.violation - expected).abs() < 1e-12);
    let p = report.pair(0, 1).unwrap();
    assert!((p.forward - 13.0 / 14.0).abs() < 1e-12);
    assert!((p.backward - 121.0 / 221.0).abs() < 1e-12);
    assert_eq!(standard_viol(FairnessNotion::EqualizedOdds, &attrs, &labels, &preds, 3, 2).unwrap(), 0.0);
}

#[test]
fn tshirt_fixture_constant_predictions() {
    let (attrs, labels, _) = tshirt_fixture(10);
    let preds = vec![2; attrs.len()];
    assert_eq!(pairwise_eo_viol(&attrs, &labels, &preds, 3, 2).unwrap().violation, 0.0);
    let eq = pairwise_eqodds_viol(&attrs, &labels, &preds, 3, 2).unwrap();
    // With constant predictions both non-strict conditions always hold, so
    // the loose gap is 0 as well.
    assert_eq!(Some(eq.violation), naive_viol(FairnessNotion::PairwiseEqOdds, &attrs, &labels, &preds, 2));
    assert_eq!(eq.violation, 0.0);
}

#[test]
fn three_point_pairwise_but_not_standard_dp() {
    let attrs = [0, 1, 0];
    let preds = [1, 2, 3];
    assert_eq!(pairwise_dp_viol(&attrs, &preds, 3, 2).unwrap().violation, 0.0);
    assert!(standard_viol(FairnessNotion::StandardDp, &attrs, &[1, 1, 1], &preds, 3, 2).unwrap() > 0.0);
}

#[test]
fn binary_eo_fixtures_in_both_directions() {
    let labels = [1, 1, 1, 2, 2, 2];
    let attrs = [0, 0, 1, 0, 1, 0];
    let preds = [2, 1, 1, 2, 2, 1];
    assert_eq!(pairwise_eo_viol(&attrs, &labels, &preds, 2, 2).unwrap().violation, 0.0);
    assert!(standard_viol(FairnessNotion::StandardEo, &attrs, &labels, &preds, 2, 2).unwrap() > 0.0);

    let flipped = [1, 1, 1, 2, 2, 1];
    assert!(pairwise_eo_viol(&attrs, &labels, &flipped, 2, 2).unwrap().violation > 0.0);
    assert_eq!(standard_viol(FairnessNotion::StandardEo, &attrs, &labels, &flipped, 2, 2).unwrap(), 0.0);
}

#[test]
fn nine_point_equalized_odds_but_not_pairwise_eo() {
    let labels = [1, 2, 3, 3, 1, 2, 2, 3, 3];
    let attrs = [0, 0, 0, 0, 1, 1, 1, 1, 1];
    let preds = [1, 2, 3, 2, 1, 2, 2, 3, 2];
    assert_eq!(standard_viol(FairnessNotion::EqualizedOdds, &attrs, &labels, &preds, 3, 2).unwrap(), 0.0);
    assert!(pairwise_eo_viol(&attrs, &labels, &preds, 3, 2).unwrap().violation > 0.0);
}

// Properties.

fn instance(max_n: usize, max_k: usize, max_g: usize) -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, usize)>)> {
    (2..=max_k, 1..=max_g).prop_flat_map(move |(k, g)| {
        (
            Just(k),
            Just(g),
            prop::collection::vec((0..g, 1..=k, 1..=k), 1..=max_n),
        )
    })
}

fn unzip3(rows: &[(usize, usize, usize)]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    (
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
        rows.iter().map(|r| r.2).collect(),
    )
}

proptest! {
    #[test]
    fn oracle_equivalence_prop((k, g, rows) in instance(30, 5, 3)) {
        let (attrs, labels, preds) = unzip3(&rows);
        check_against_oracle(&attrs, &labels, &preds, k, g);
    }

    #[test]
    fn violations_are_probability_gaps((k, g, rows) in instance(25, 5, 3)) {
        let (attrs, labels, preds) = unzip3(&rows);
        for notion in PAIRWISE {
            if let Ok(r) = pairwise_viol(notion, &attrs, &labels, &preds, k, g) {
                prop_assert!((0.0..=1.0).contains(&r.violation));
                for p in r.per_pair.iter().filter(|p| p.valid) {
                    prop_assert!((0.0..=1.0).contains(&p.forward) && (0.0..=1.0).contains(&p.backward));
                    prop_assert!(p.diff <= r.violation);
                    // Swapping the groups swaps the two probabilities.
                    let q = r.pair(p.a2, p.a1).unwrap();
                    prop_assert_eq!(q.diff, p.diff);
                }
            }
        }
    }

    #[test]
    fn constant_and_perfect_predictors((k, g, rows) in instance(25, 5, 3), c in 1usize..=5) {
        let (attrs, labels, _) = unzip3(&rows);
        let constant = vec![c.min(k); attrs.len()];
        for notion in PAIRWISE {
            if let Ok(r) = pairwise_viol(notion, &attrs, &labels, &constant, k, g) {
                prop_assert_eq!(r.violation, 0.0);
            }
        }
        for notion in [FairnessNotion::PairwiseEo, FairnessNotion::PairwiseEqOdds] {
            if let Ok(r) = pairwise_viol(notion, &attrs, &labels, &labels, k, g) {
                prop_assert_eq!(r.violation, 0.0);
            }
        }
    }

    #[test]
    fn equalized_odds_dominates_eo((k, g, rows) in instance(12, 4, 3)) {
        let (attrs, labels, preds) = unzip3(&rows);
        if let (Ok(eo), Ok(eq)) = (
            pairwise_eo_viol(&attrs, &labels, &preds, k, g),
            pairwise_eqodds_viol(&attrs, &labels, &preds, k, g),
        ) {
            prop_assert!(eq.violation >= eo.violation);
        }
    }

    #[test]
    fn standard_dp_implies_pairwise_dp((k, g, rows) in instance(20, 4, 3)) {
        let (attrs, labels, preds) = unzip3(&rows);
        let std = standard_viol(FairnessNotion::StandardDp, &attrs, &labels, &preds, k, g).unwrap();
        if let Ok(p) = pairwise_dp_viol(&attrs, &preds, k, g) {
            if std == 0.0 {
                prop_assert!(p.violation < 1e-12);
            }
            if k == 2 {
                prop_assert_eq!(p.violation < 1e-12, std < 1e-12);
            }
        }
    }

    #[test]
    fn binary_equalized_odds_implies_pairwise_eo((g, rows) in (1usize..=3).prop_flat_map(|g| (Just(g), prop::collection::vec((0..g, 1usize..=2, 1usize..=2), 1..=16)))) {
        let (attrs, labels, preds) = unzip3(&rows);
        let eq = standard_viol(FairnessNotion::EqualizedOdds, &attrs, &labels, &preds, 2, g).unwrap();
        if let Ok(eo) = pairwise_eo_viol(&attrs, &labels, &preds, 2, g) {
            if eq == 0.0 {
                prop_assert!(eo.violation < 1e-12);
            }
        }
    }
}
