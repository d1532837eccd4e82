//! Monte-Carlo experiment harness: repeated simulate-detect runs with
//! summary statistics for change-point locations (known m) and for the
//! estimated number of change points (unknown m).
//!
//! Iteration `i` simulates with seed `seed0 + i`; iterations run on a
//! worker pool and are aggregated in iteration order, so a fixed `seed0`
//! reproduces every summary exactly. Detection uses the realized
//! volatility of each simulated path as its sigma.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSet;
use crate::detect::{
    CachePolicy, DpOptions, MinSegLen, Objective, ObjectiveKind, PeltOptions, SnsOptions,
    detect_known_m, detect_pelt, detect_unknown_m_sns,
};
use crate::error::{Error, Result};
use crate::sim::{RegimeScenario, simulate};
use crate::stats::realized_volatility;

/// Which unknown-m detector the count experiment drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountAlgorithm {
    Sns,
    Pelt,
}

/// Nearest-rank percentile of a sorted sample: the `ceil(q n)`-th order
/// statistic.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Summary of one change point's estimated arrival fraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChangePointSummary {
    pub true_fraction: f64,
    pub mean: f64,
    /// 2.5th percentile (nearest rank).
    pub ci_lower: f64,
    /// 97.5th percentile (nearest rank).
    pub ci_upper: f64,
    pub mse: f64,
    /// Per-iteration estimates, in iteration order (failures excluded).
    pub estimates: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McRateSummary {
    pub method: ObjectiveKind,
    pub iterations: usize,
    pub failures: usize,
    pub per_change: Vec<ChangePointSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McCountSummary {
    pub algorithm: CountAlgorithm,
    pub iterations: usize,
    pub failures: usize,
    /// Cumulative frequency of `m_hat == m0`.
    pub cf: usize,
    /// `100 * cf / iterations`.
    pub rf_percent: f64,
    /// Estimated counts per iteration (failures excluded).
    pub m_hats: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct RateExperiment {
    pub scenario: RegimeScenario,
    pub method: ObjectiveKind,
    pub iterations: usize,
    pub seed0: u64,
    pub min_seg: MinSegLen,
}

#[derive(Debug, Clone)]
pub struct CountExperiment {
    pub scenario: RegimeScenario,
    pub algorithm: CountAlgorithm,
    pub m_max: usize,
    pub iterations: usize,
    pub seed0: u64,
    pub min_seg: MinSegLen,
}

fn collect_iterations<T: Send>(
    iterations: usize,
    run: impl Fn(u64) -> Result<T> + Sync,
) -> Result<(Vec<T>, usize)> {
    if iterations == 0 {
        return Err(Error::InvalidParameter(
            "at least one iteration is required".to_owned(),
        ));
    }
    let outcomes: Vec<Result<T>> = (0..iterations as u64).into_par_iter().map(&run).collect();
    let mut ok = Vec::with_capacity(iterations);
    let mut failures = 0usize;
    for outcome in outcomes {
        match outcome {
            Ok(v) => ok.push(v),
            Err(_) => failures += 1,
        }
    }
    if failures * 100 > iterations {
        return Err(Error::TooManyFailures {
            failed: failures,
            total: iterations,
        });
    }
    Ok((ok, failures))
}

/// Estimates the change fractions with known `m` over repeated simulations
/// and summarises mean, 95% empirical interval and MSE per change point.
pub fn run_rate_experiment(exp: &RateExperiment, basis: &BasisSet) -> Result<McRateSummary> {
    exp.scenario.validate()?;
    let m = exp.scenario.change_fractions.len();
    if m == 0 {
        return Err(Error::InvalidParameter(
            "the rate experiment needs at least one change point".to_owned(),
        ));
    }
    let (estimates, failures) = collect_iterations(exp.iterations, |i| {
        let series = simulate(&exp.scenario, basis, exp.seed0.wrapping_add(i))?;
        let objective = match exp.method {
            ObjectiveKind::Lsse => Objective::lsse(),
            ObjectiveKind::Mll => Objective::mll(realized_volatility(&series))?,
        };
        let det = detect_known_m(
            &series,
            basis,
            m,
            objective,
            &DpOptions {
                min_seg: exp.min_seg,
                cache: CachePolicy::Lazy,
            },
        )?;
        Ok(det.segmentation.fractions())
    })?;

    let used = estimates.len();
    let per_change = (0..m)
        .map(|j| {
            let mut sample: Vec<f64> = estimates.iter().map(|e| e[j]).collect();
            let mean = sample.iter().sum::<f64>() / used as f64;
            let true_fraction = exp.scenario.change_fractions[j];
            let mse = sample
                .iter()
                .map(|s| (s - true_fraction) * (s - true_fraction))
                .sum::<f64>()
                / used as f64;
            let mut sorted = sample.clone();
            sorted.sort_by(f64::total_cmp);
            let ci_lower = nearest_rank(&sorted, 0.025);
            let ci_upper = nearest_rank(&sorted, 0.975);
            sample.shrink_to_fit();
            ChangePointSummary {
                true_fraction,
                mean,
                ci_lower,
                ci_upper,
                mse,
                estimates: sample,
            }
        })
        .collect();

    Ok(McRateSummary {
        method: exp.method,
        iterations: exp.iterations,
        failures,
        per_change,
    })
}

/// Counts how often the unknown-m detector recovers the scenario's true
/// number of change points.
pub fn run_count_experiment(exp: &CountExperiment, basis: &BasisSet) -> Result<McCountSummary> {
    exp.scenario.validate()?;
    let m_true = exp.scenario.change_fractions.len();
    let (m_hats, failures) = collect_iterations(exp.iterations, |i| {
        let series = simulate(&exp.scenario, basis, exp.seed0.wrapping_add(i))?;
        let sigma = realized_volatility(&series);
        match exp.algorithm {
            CountAlgorithm::Sns => {
                let det = detect_unknown_m_sns(
                    &series,
                    basis,
                    sigma,
                    &SnsOptions {
                        min_seg: exp.min_seg,
                        m_max: exp.m_max,
                        ..SnsOptions::default()
                    },
                )?;
                Ok(det.m_hat)
            }
            CountAlgorithm::Pelt => {
                let det = detect_pelt(
                    &series,
                    basis,
                    sigma,
                    &PeltOptions {
                        min_seg: exp.min_seg,
                        ..PeltOptions::default()
                    },
                )?;
                Ok(det.m_hat)
            }
        }
    })?;

    let cf = m_hats.iter().filter(|&&m| m == m_true).count();
    Ok(McCountSummary {
        algorithm: exp.algorithm,
        iterations: exp.iterations,
        failures,
        cf,
        rf_percent: 100.0 * cf as f64 / exp.iterations as f64,
        m_hats,
    })
}
