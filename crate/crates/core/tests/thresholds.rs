mod support;

use ordfair::metrics::scorer_violation;
use ordfair::thresholds::{cost_only_dp, exact_dp, local_search, local_search_from, InitPolicy, LocalSearchState, ScoredSamples, ThresholdObjectiveConfig};
use ordfair::{CostMatrix, Error, FairnessNotion};
use proptest::prelude::*;
use rand::Rng;
use support::*;

const NOTIONS: [FairnessNotion; 2] = [FairnessNotion::PairwiseDp, FairnessNotion::PairwiseEo];

fn cost_for(i: usize, k: usize) -> CostMatrix {
    match i % 3 {
        0 => CostMatrix::absolute(k),
        1 => CostMatrix::binary(k),
        _ => CostMatrix::asymmetric(k),
    }
}

#[test]
fn dynamic_programs_match_enumeration() {
    let mut r = rng(21);
    let mut compared = 0;
    for case in 0..100 {
        let n = r.gen_range(2..=10);
        let k = r.gen_range(2..=4);
        let (labels, attrs) = random_instance(&mut r, n, k, 2);
        let scores = random_scores(&mut r, n, 5);
        let cost = cost_for(case, k);
        let samples = ScoredSamples::new(&scores, &labels, &attrs, 2).unwrap();

        let fast = cost_only_dp(&samples, &cost).unwrap();
        assert!((fast.cost - brute_force_min_cost(&scores, &labels, &cost)).abs() < 1e-12);

        for notion in NOTIONS {
            for lambda in [0.0, 0.7, 2.0] {
                let config = ThresholdObjectiveConfig::new(lambda, cost.clone(), notion);
                let oracle = brute_force_objective(&scores, &labels, &attrs, 2, &cost, lambda, notion);
                match (exact_dp(&samples, &config), oracle) {
                    (Ok(sol), Some((best, _, _))) => {
                        assert!((sol.value.objective - best).abs() < 1e-12, "case {case}: {} vs {best}", sol.value.objective);
                        let preds: Vec<usize> = scores.iter().map(|&s| predict(sol.thresholds.values(), s)).collect();
                        let v = naive_viol(notion, &attrs, &labels, &preds, 2).unwrap();
                        assert!((naive_cost(&labels, &preds, &cost) + lambda * v - best).abs() < 1e-12);
                        compared += 1;
                    }
                    (Err(Error::UndefinedViolation { .. }), None) => {}
                    (got, want) => panic!("case {case}: {got:?} vs {want:?}"),
                }
            }
        }
    }
    assert!(compared > 400);
}

#[test]
fn exact_dp_refuses_large_inputs() {
    let n = 41;
    let scores: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let labels: Vec<usize> = (0..n).map(|i| 1 + i % 2).collect();
    let attrs: Vec<usize> = (0..n).map(|i| (i / 2) % 2).collect();
    let samples = ScoredSamples::new(&scores, &labels, &attrs, 2).unwrap();
    let config = ThresholdObjectiveConfig::new(1.0, CostMatrix::absolute(2), FairnessNotion::PairwiseDp);
    assert!(matches!(exact_dp(&samples, &config), Err(Error::SizeGuard { .. })));
    let mut relaxed = config.clone();
    relaxed.exact_size_limit = Some(50);
    assert!(exact_dp(&samples, &relaxed).is_ok());
}

/// Runs single local searches from random starts and checks every accepted
/// move against a from-scratch recomputation.
#[test]
fn local_search_moves_are_sound() {
    let mut r = rng(22);
    for case in 0..100 {
        let n = r.gen_range(2..=12);
        let k = r.gen_range(2..=4);
        let (labels, attrs) = random_instance(&mut r, n, k, 2);
        let scores = random_scores(&mut r, n, 6);
        let notion = NOTIONS[case % 2];
        let config = ThresholdObjectiveConfig::new(r.gen_range(0.0..3.0), cost_for(case, k), notion);
        let samples = ScoredSamples::new(&scores, &labels, &attrs, 2).unwrap();
        let feasible = samples.feasible_positions();
        let mut start: Vec<usize> = (0..k - 1).map(|_| feasible[r.gen_range(0..feasible.len())]).collect();
        start.sort_unstable();
        let Ok(initial) = LocalSearchState::from_positions(&samples, &config, &start) else { continue };
        let mut last = initial.objective();
        let mut moves = 0;
        let mut observer = |s: &LocalSearchState| {
            assert!(s.objective() < last, "objective must strictly decrease");
            last = s.objective();
            moves += 1;
            let fresh = LocalSearchState::from_positions(&samples, &config, s.positions()).unwrap();
            assert_eq!(s.counts(), fresh.counts());
            assert_eq!(s.p(), fresh.p());
            assert_eq!(s.q(), fresh.q());
            assert_eq!(s.cost(), fresh.cost());
            assert_eq!(s.violation(), fresh.violation());
            // And against the pair-enumeration oracle.
            let preds = samples.predictions_at(s.positions());
            let sorted_attrs = samples.attrs();
            let sorted_labels = samples.labels();
            let v = naive_viol(notion, sorted_attrs, sorted_labels, &preds, 2).unwrap();
            assert!((s.violation() - v).abs() < 1e-12);
            assert!((s.cost() - naive_cost(sorted_labels, &preds, &config.cost)).abs() < 1e-12);
        };
        let result = local_search_from(&samples, &config, &start, &mut observer).unwrap();
        assert_eq!(result.trace.len(), moves);
        assert!((result.value.objective - last).abs() < 1e-12);
    }
}

#[test]
fn restarts_never_beat_the_exact_optimum() {
    let mut r = rng(23);
    let (mut equal, mut total) = (0, 0);
    for case in 0..100 {
        let n = r.gen_range(3..=10);
        let k = r.gen_range(2..=4);
        let (labels, attrs) = random_instance(&mut r, n, k, 2);
        let scores = random_scores(&mut r, n, 5);
        let notion = NOTIONS[case % 2];
        let mut config = ThresholdObjectiveConfig::new(1.0, CostMatrix::absolute(k), notion);
        config.seed = case as u64;
        let samples = ScoredSamples::new(&scores, &labels, &attrs, 2).unwrap();
        let (Ok(exact), Ok(ls)) = (exact_dp(&samples, &config), local_search(&samples, &config)) else { continue };
        total += 1;
        assert!(ls.value.objective >= exact.value.objective - 1e-12);
        if ls.value.objective <= exact.value.objective + 1e-12 {
            equal += 1;
        }
        for (i, restart) in ls.restarts.iter().enumerate() {
            assert!(restart.final_objective <= restart.initial_objective);
            let objectives: Vec<f64> = ls.trace.iter().filter(|t| t.restart == i).map(|t| t.objective).collect();
            assert!(objectives.windows(2).all(|w| w[1] < w[0]));
        }
    }
    assert!(equal * 2 > total, "{equal} of {total}");
}

#[test]
fn cost_only_start_is_used_for_the_first_restart() {
    let mut r = rng(24);
    for _ in 0..20 {
        let n = r.gen_range(3..=12);
        let (labels, attrs) = random_instance(&mut r, n, 3, 2);
        let scores = random_scores(&mut r, n, 5);
        let samples = ScoredSamples::new(&scores, &labels, &attrs, 2).unwrap();
        let mut config = ThresholdObjectiveConfig::new(0.0, CostMatrix::absolute(3), FairnessNotion::PairwiseDp);
        config.init = InitPolicy::CostOnlyDp;
        config.restarts = 3;
        let dp = cost_only_dp(&samples, &config.cost).unwrap();
        let ls = local_search(&samples, &config).unwrap();
        assert_eq!(ls.restarts[0].initial_positions, dp.positions);
        assert!((ls.value.cost - dp.cost).abs() < 1e-12);
    }
}

/// DPviol of any thresholding is at most 1/2 + DPviol(s)/2.
#[test]
fn thresholding_bound_holds_for_every_placement() {
    let mut r = rng(25);
    for _ in 0..50 {
        let n = r.gen_range(2..=10);
        let k = r.gen_range(2..=4);
        let (labels, attrs) = random_instance(&mut r, n, k, 2);
        let scores = random_scores(&mut r, n, 5);
        let sv = naive_scorer_viol(FairnessNotion::PairwiseDp, &attrs, &labels, &scores, 2, false).unwrap();
        let fast = scorer_violation(FairnessNotion::PairwiseDp, &attrs, &labels, &scores, k, 2, false).unwrap();
        assert_eq!(fast.violation, sv);
        for theta in all_threshold_vectors(&scores, k) {
            let preds: Vec<usize> = scores.iter().map(|&s| predict(&theta, s)).collect();
            let v = naive_viol(FairnessNotion::PairwiseDp, &attrs, &labels, &preds, 2).unwrap();
            assert!(v <= 0.5 + sv / 2.0 + 1e-12, "{v} > 1/2 + {sv}/2");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn local_search_is_deterministic_and_feasible(
        rows in prop::collection::vec((-4i32..=4, 1usize..=3, 0usize..2), 2..=15),
        seed in 0u64..1000,
    ) {
        let scores: Vec<f64> = rows.iter().map(|r| f64::from(r.0)).collect();
        let labels: Vec<usize> = rows.iter().map(|r| r.1).collect();
        let attrs: Vec<usize> = rows.iter().map(|r| r.2).collect();
        let samples = ScoredSamples::new(&scores, &labels, &attrs, 2).unwrap();
        let mut config = ThresholdObjectiveConfig::new(1.5, CostMatrix::absolute(3), FairnessNotion::PairwiseDp);
        config.seed = seed;
        config.restarts = 4;
        let a = local_search(&samples, &config);
        let b = local_search(&samples, &config);
        prop_assert_eq!(&a.as_ref().ok().map(|x| x.positions.clone()), &b.as_ref().ok().map(|x| x.positions.clone()));
        if let Ok(res) = a {
            prop_assert!(res.thresholds.values().windows(2).all(|w| w[0] <= w[1]));
            for &p in &res.positions {
                prop_assert!(samples.is_feasible(p));
            }
            // Thresholds reproduce the reported objective through the public prediction rule.
            let preds: Vec<usize> = samples.scores().iter().map(|&s| predict(res.thresholds.values(), s)).collect();
            prop_assert_eq!(preds, samples.predictions_at(&res.positions));
            prop_assert!(res.value.violation >= 0.0 && res.value.violation <= 1.0);
        }
    }

    #[test]
    fn raising_lambda_never_raises_the_optimal_violation(
        rows in prop::collection::vec((-3i32..=3, 1usize..=3, 0usize..2), 4..=9),
    ) {
        let scores: Vec<f64> = rows.iter().map(|r| f64::from(r.0)).collect();
        let labels: Vec<usize> = rows.iter().map(|r| r.1).collect();
        let attrs: Vec<usize> = rows.iter().map(|r| r.2).collect();
        let samples = ScoredSamples::new(&scores, &labels, &attrs, 2).unwrap();
        let solve = |lambda| exact_dp(&samples, &ThresholdObjectiveConfig::new(lambda, CostMatrix::absolute(3), FairnessNotion::PairwiseDp));
        if let (Ok(lo), Ok(hi)) = (solve(0.5), solve(5.0)) {
            prop_assert!(hi.value.violation <= lo.value.violation + 1e-12);
            prop_assert!(hi.value.cost >= lo.value.cost - 1e-12);
        }
    }
}
