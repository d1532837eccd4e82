//! Cross-module invariants and property tests.

use oucpd::sim::presets::{self, PresetCase};
use oucpd::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn preset_series(
    case: PresetCase,
    m: usize,
    t: f64,
    sigma: f64,
    dt: f64,
    seed: u64,
) -> (TimeSeries, BasisSet) {
    let scenario = presets::scenario(case, m, t, sigma, dt).unwrap();
    let basis = presets::basis(case, dt).unwrap();
    let series = simulate(&scenario, &basis, seed).unwrap();
    (series, basis)
}

fn two_regime_scenario(sigma: f64, t: f64, dt: f64) -> RegimeScenario {
    RegimeScenario {
        regimes: vec![
            DriftParams::new(vec![0.08], 0.10).unwrap(),
            DriftParams::new(vec![2.50], 1.00).unwrap(),
        ],
        change_fractions: vec![0.5],
        sigma,
        x0: Some(0.3),
        horizon: t,
        delta_t: dt,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn basis_periodicity_holds_at_random_times(raw in 0.0f64..1.0) {
        for basis in [BasisSet::constant(), BasisSet::cosine_pair(0.01).unwrap()] {
            let v = basis.period();
            let t = raw * 10.0 * v;
            let full = basis.evaluate(t);
            let folded = basis.evaluate(t % v);
            for (a, b) in full.iter().zip(&folded) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn statistics_are_additive_at_any_split(split in 1usize..199) {
        let (series, basis) = preset_series(PresetCase::Classical, 2, 2.0, 0.2, 0.01, 99);
        let whole = accumulate(&series, &basis, 0, 200).unwrap();
        let left = accumulate(&series, &basis, 0, split).unwrap();
        let right = accumulate(&series, &basis, split, 200).unwrap();
        let merged = left.merge(&right).unwrap();
        for (w, m) in whole.q.iter().zip(&merged.q) {
            prop_assert!((w - m).abs() <= 1e-12 * w.abs().max(1e-12));
        }
        for (w, m) in whole.r.iter().zip(&merged.r) {
            prop_assert!((w - m).abs() <= 1e-12 * w.abs().max(1e-9));
        }
        prop_assert!((whole.yy - merged.yy).abs() <= 1e-12 * whole.yy.max(1e-12));
    }

    #[test]
    fn simulation_is_deterministic_per_seed(seed in any::<u64>()) {
        let scenario = two_regime_scenario(0.2, 1.0, 0.01);
        let basis = BasisSet::constant();
        let a = simulate(&scenario, &basis, seed).unwrap();
        let b = simulate(&scenario, &basis, seed).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }
}

#[test]
fn mle_equals_independent_ols_on_random_segments() {
    // 50 random small segments, both bases: the prefix-statistics MLE must
    // match the oracle's dense normal-equations solve to 1e-8 relative.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..50 {
        let case = if trial % 2 == 0 {
            PresetCase::Classical
        } else {
            PresetCase::Periodic
        };
        let (series, basis) = preset_series(case, 2, 2.0, 0.15, 0.01, 300 + trial);
        let prefix = PrefixStats::new(&series, &basis);
        let n = series.n_rows();
        let len = rng.random_range(3 * (basis.p() + 1)..60);
        let a = rng.random_range(0..n - len);
        let b = a + len;
        let fast = segment_mle(&prefix.range(a, b).unwrap()).unwrap();
        let rows: Vec<DesignRow> = (a..b).map(|i| design_row(&series, &basis, i)).collect();
        let slow = oracle::ols_direct(&rows).unwrap();
        for (x, y) in fast.theta().iter().zip(slow.theta().iter()) {
            assert!(
                (x - y).abs() <= 1e-8 * y.abs().max(1e-8),
                "trial {trial}: {x} vs {y}"
            );
        }
    }
}

#[test]
fn segment_sse_matches_residual_oracle() {
    // 20-point synthetic segment: SSE against an independent OLS-residual
    // computation.
    let (series, basis) = preset_series(PresetCase::Classical, 2, 2.0, 0.25, 0.01, 7);
    for (a, b) in [(0usize, 20usize), (57, 77), (140, 200)] {
        let sse = segment_sse(&series, &basis, a, b).unwrap();
        let rows: Vec<DesignRow> = (a..b).map(|i| design_row(&series, &basis, i)).collect();
        let params = oracle::ols_direct(&rows).unwrap();
        let theta = params.theta();
        let oracle_sse: f64 = rows
            .iter()
            .map(|r| {
                let fit: f64 = r.z.iter().zip(&theta).map(|(z, t)| z * t).sum();
                (r.y - fit) * (r.y - fit)
            })
            .sum();
        assert!(
            (sse - oracle_sse).abs() <= 1e-9 * oracle_sse.max(1e-12),
            "[{a},{b}): {sse} vs {oracle_sse}"
        );
    }
}

#[test]
fn dp_agrees_with_exhaustive_search_small() {
    // Small smoke version of the oracle-agreement gate (the full 50-instance
    // sweep lives in the acceptance suite).
    for (seed, m) in [(1u64, 1usize), (2, 2), (3, 2)] {
        let (series, basis) = preset_series(PresetCase::Classical, 2, 0.5, 0.1, 0.01, seed);
        let min_seg = MinSegLen::Rows(6);
        let objective = Objective::lsse();
        let dp = detect_known_m(
            &series,
            &basis,
            m,
            objective,
            &DpOptions {
                min_seg,
                ..DpOptions::default()
            },
        )
        .unwrap();
        let (seg, cost) =
            oracle::exhaustive_search(&series, &basis, m, objective, &min_seg).unwrap();
        assert_eq!(dp.segmentation.change_indices(), seg.change_indices());
        assert!((dp.total_cost - cost).abs() <= 1e-9 * cost.abs().max(1e-15));
    }
}

#[test]
fn lsse_and_mll_pick_identical_segmentations() {
    for seed in 0..10u64 {
        let (series, basis) = preset_series(PresetCase::Classical, 2, 5.0, 0.1, 0.01, 50 + seed);
        let sigma = realized_volatility(&series);
        let opts = DpOptions {
            min_seg: MinSegLen::Fraction(0.15),
            ..DpOptions::default()
        };
        let lsse = detect_known_m(&series, &basis, 2, Objective::lsse(), &opts).unwrap();
        let mll =
            detect_known_m(&series, &basis, 2, Objective::mll(sigma).unwrap(), &opts).unwrap();
        assert_eq!(
            lsse.segmentation.change_indices(),
            mll.segmentation.change_indices(),
            "seed {seed}"
        );
    }
}

#[test]
fn pelt_matches_sns_selection() {
    // Cross-detector equivalence on random series with zero, one or two
    // true changes.
    let mut checked = 0;
    for trial in 0..30u64 {
        let m0 = (trial % 3) as usize;
        let dt = 0.005;
        let scenario = match m0 {
            0 => RegimeScenario {
                regimes: vec![DriftParams::new(vec![75.0], 30.0).unwrap()],
                change_fractions: vec![],
                sigma: 0.2,
                x0: None,
                horizon: 5.0,
                delta_t: dt,
            },
            1 => RegimeScenario {
                regimes: vec![
                    DriftParams::new(vec![0.08], 0.10).unwrap(),
                    DriftParams::new(vec![2.50], 1.00).unwrap(),
                ],
                change_fractions: vec![0.5],
                sigma: 0.05,
                x0: None,
                horizon: 5.0,
                delta_t: dt,
            },
            _ => presets::scenario(PresetCase::Classical, 2, 5.0, 0.05, dt).unwrap(),
        };
        let basis = BasisSet::constant();
        let series = simulate(&scenario, &basis, 7000 + trial).unwrap();
        let sigma = realized_volatility(&series);
        let min_seg = MinSegLen::Fraction(0.15);
        let sns = detect_unknown_m_sns(
            &series,
            &basis,
            sigma,
            &SnsOptions {
                min_seg,
                m_max: 5,
                ..SnsOptions::default()
            },
        )
        .unwrap();
        let pelt = detect_pelt(
            &series,
            &basis,
            sigma,
            &PeltOptions {
                min_seg,
                ..PeltOptions::default()
            },
        )
        .unwrap();
        assert_eq!(pelt.m_hat, sns.m_hat, "trial {trial} (m0 = {m0})");
        assert_eq!(
            pelt.segmentation.change_indices(),
            sns.segmentation.change_indices(),
            "trial {trial}"
        );
        checked += 1;
    }
    assert_eq!(checked, 30);
}

#[test]
fn pelt_selection_is_conditionally_optimal() {
    // Feed the PELT-selected m back into the exhaustive oracle on capped
    // instances: conditional on its m_hat, PELT's segmentation must be the
    // optimum of the fixed-m problem.
    let mut fed_back = 0;
    for seed in 0..10u64 {
        let scenario = RegimeScenario {
            regimes: vec![
                DriftParams::new(vec![0.08], 0.10).unwrap(),
                DriftParams::new(vec![2.50], 1.00).unwrap(),
            ],
            change_fractions: vec![0.5],
            sigma: 0.05,
            x0: None,
            horizon: 1.0,
            delta_t: 0.01,
        };
        let basis = BasisSet::constant();
        let series = simulate(&scenario, &basis, 8_800 + seed).unwrap();
        let sigma = realized_volatility(&series);
        let min_seg = MinSegLen::Rows(10);
        let pelt = detect_pelt(
            &series,
            &basis,
            sigma,
            &PeltOptions {
                min_seg,
                ..PeltOptions::default()
            },
        )
        .unwrap();
        if pelt.m_hat == 0 {
            continue;
        }
        let (seg, _) = oracle::exhaustive_search(
            &series,
            &basis,
            pelt.m_hat,
            Objective::mll(sigma).unwrap(),
            &min_seg,
        )
        .unwrap();
        assert_eq!(
            pelt.segmentation.change_indices(),
            seg.change_indices(),
            "seed {seed}"
        );
        fed_back += 1;
    }
    assert!(fed_back >= 8, "only {fed_back} instances exercised the oracle");
}

#[test]
fn confidence_interval_brackets_the_mean() {
    let scenario = presets::scenario(PresetCase::Classical, 2, 5.0, 0.1, 0.005).unwrap();
    let exp = RateExperiment {
        scenario,
        method: ObjectiveKind::Lsse,
        iterations: 40,
        seed0: 31,
        min_seg: MinSegLen::Fraction(0.15),
    };
    let summary = run_rate_experiment(&exp, &BasisSet::constant()).unwrap();
    for cp in &summary.per_change {
        assert!(cp.ci_lower <= cp.mean && cp.mean <= cp.ci_upper);
        assert!(cp.mse >= 0.0);
    }
}

#[test]
fn rate_experiment_methods_agree_per_iteration() {
    let scenario = presets::scenario(PresetCase::Classical, 2, 5.0, 0.1, 0.01).unwrap();
    let basis = BasisSet::constant();
    let mk = |method| RateExperiment {
        scenario: scenario.clone(),
        method,
        iterations: 20,
        seed0: 1234,
        min_seg: MinSegLen::Fraction(0.15),
    };
    let lsse = run_rate_experiment(&mk(ObjectiveKind::Lsse), &basis).unwrap();
    let mll = run_rate_experiment(&mk(ObjectiveKind::Mll), &basis).unwrap();
    for (a, b) in lsse.per_change.iter().zip(&mll.per_change) {
        assert_eq!(a.estimates, b.estimates);
    }
}

#[test]
fn drift_mle_consistency_on_true_segmentation() {
    // Monte-Carlo mean over 200 seeds of the per-regime MLE on the true
    // segmentation of a long path; each regime's (mu, a) within 0.1.
    let scenario = presets::scenario(PresetCase::Classical, 2, 300.0, 0.2, 0.01).unwrap();
    let basis = BasisSet::constant();
    let n = scenario.n_rows().unwrap();
    let ks = scenario.change_rows().unwrap();
    let bounds = [0, ks[0], ks[1], n];
    let mut mean_mu = [0.0f64; 3];
    let mut mean_a = [0.0f64; 3];
    for seed in 0..200u64 {
        let series = simulate(&scenario, &basis, 40_000 + seed).unwrap();
        let prefix = PrefixStats::new(&series, &basis);
        for j in 0..3 {
            let params = segment_mle(&prefix.range(bounds[j], bounds[j + 1]).unwrap()).unwrap();
            mean_mu[j] += params.mu[0] / 200.0;
            mean_a[j] += params.a / 200.0;
        }
    }
    for j in 0..3 {
        let truth = &scenario.regimes[j];
        assert!(
            (mean_mu[j] - truth.mu[0]).abs() < 0.1,
            "regime {}: mean mu {} vs {}",
            j + 1,
            mean_mu[j],
            truth.mu[0]
        );
        assert!(
            (mean_a[j] - truth.a).abs() < 0.1,
            "regime {}: mean a {} vs {}",
            j + 1,
            mean_a[j],
            truth.a
        );
    }
}

#[test]
fn all_singular_iterations_fail_the_batch() {
    // Noiseless scenario starting at the first regime's fixed point: the
    // first regime is exactly constant, every detection hits singular
    // statistics, and the failure budget (1%) rejects the batch.
    let scenario = RegimeScenario {
        regimes: vec![
            DriftParams::new(vec![0.08], 0.10).unwrap(),
            DriftParams::new(vec![2.50], 1.00).unwrap(),
        ],
        change_fractions: vec![0.5],
        sigma: 0.0,
        x0: Some(0.8),
        horizon: 1.0,
        delta_t: 0.01,
    };
    let exp = RateExperiment {
        scenario,
        method: ObjectiveKind::Lsse,
        iterations: 5,
        seed0: 0,
        min_seg: MinSegLen::Fraction(0.2),
    };
    let err = run_rate_experiment(&exp, &BasisSet::constant());
    assert!(
        matches!(
            err,
            Err(Error::TooManyFailures {
                failed: 5,
                total: 5
            })
        ),
        "{err:?}"
    );
}
