//! Modified PELT: penalised optimal partitioning with a minimum segment
//! length, candidate pruning and backtracking.
//!
//! With `t_h` the minimum length in rows and `pen = (p+1) ln(n)`:
//!
//! - `F(i) = 0` for `i < t_h`;
//! - `F(i) = -2 loglik([0, i)) + pen` for `i` in `[t_h, 2 t_h)`;
//! - `F(i) = min over t in SS_i of F(t) - 2 loglik([t, i)) + pen` afterwards,
//!   with the arg-min stored for backtracking;
//! - the candidate set update keeps `t` iff
//!   `F(t) - 2 loglik([t, i)) <= F(i)` (the penalty constant sits outside
//!   the pruning inequality, as printed), always keeps 0, and admits the new
//!   candidate `i - t_h + 1`.
//!
//! Backtracking from `F(n)` recovers the change points. Because each
//! segment carries one penalty and `F(0) = 0`, the final `F(n)` equals
//! `-2 sum_j loglik(segment j) + (m_hat + 1)(p+1) ln(n)`.

use crate::basis::BasisSet;
use crate::detect::cost::{SegmentCost, StatsCost};
use crate::detect::{MinSegLen, Objective, Segmentation};
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::stats::PrefixStats;

/// Row index of the candidate admitted while processing step `i`.
///
/// `AsPrinted` admits `i - t_h + 1`, transcribing the algorithm verbatim;
/// `Shifted` admits `i - t_h` and exists to demonstrate the results are
/// insensitive to the off-by-one reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidateAdmission {
    #[default]
    AsPrinted,
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeltOptions {
    pub min_seg: MinSegLen,
    pub admission: CandidateAdmission,
    pub pruning: bool,
}

impl Default for PeltOptions {
    fn default() -> Self {
        Self {
            min_seg: MinSegLen::default(),
            admission: CandidateAdmission::AsPrinted,
            pruning: true,
        }
    }
}

/// Size of the surviving candidate set over the recursion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PruningStats {
    pub candidates_mean: f64,
    pub candidates_max: usize,
}

#[derive(Debug, Clone)]
pub struct PeltDetection {
    pub m_hat: usize,
    pub segmentation: Segmentation,
    /// `F(n)`, the optimal penalised cost.
    pub penalized_cost: f64,
    pub pruning: PruningStats,
    pub sigma: f64,
}

#[allow(clippy::needless_range_loop)]
pub fn detect_pelt(
    series: &TimeSeries,
    basis: &BasisSet,
    sigma: f64,
    options: &PeltOptions,
) -> Result<PeltDetection> {
    let n = series.n_rows();
    let t_h = options.min_seg.resolve(n, basis.p())?;
    if n < 2 * t_h {
        return Err(Error::Infeasible {
            required: 2 * t_h,
            available: n,
        });
    }
    let prefix = PrefixStats::new(series, basis);
    let mut cost = StatsCost::new(&prefix, Objective::mll(sigma)?);
    let penalty = (basis.p() as f64 + 1.0) * (n as f64).ln();
    let mut neg2ll = |a: usize, b: usize| -> Result<f64> { Ok(-2.0 * cost.cost(a, b)?) };

    let mut f = vec![0.0f64; n + 1];
    let mut arg = vec![0usize; n + 1];
    for i in t_h..(2 * t_h).min(n) {
        f[i] = neg2ll(0, i)? + penalty;
    }

    let mut candidates: Vec<usize> = vec![0];
    let mut scores: Vec<f64> = Vec::new();
    let mut cand_total = 0usize;
    let mut cand_max = 0usize;
    let mut steps = 0usize;

    for i in (2 * t_h)..=n {
        cand_total += candidates.len();
        cand_max = cand_max.max(candidates.len());
        steps += 1;

        scores.clear();
        let mut best = f64::INFINITY;
        let mut best_t = usize::MAX;
        for &t in &candidates {
            let s = f[t] + neg2ll(t, i)?;
            scores.push(s);
            if s < best {
                best = s;
                best_t = t;
            }
        }
        if best_t == usize::MAX {
            return Err(Error::Numerical(format!(
                "no admissible candidate at step {i}"
            )));
        }
        f[i] = best + penalty;
        arg[i] = best_t;

        if i < n {
            let new_candidate = match options.admission {
                CandidateAdmission::AsPrinted => i - t_h + 1,
                CandidateAdmission::Shifted => i - t_h,
            };
            let mut next = Vec::with_capacity(candidates.len() + 1);
            next.push(0);
            if options.pruning {
                for (&t, &s) in candidates.iter().zip(&scores) {
                    if t != 0 && s <= f[i] {
                        next.push(t);
                    }
                }
                if new_candidate != 0 && f[new_candidate] + neg2ll(new_candidate, i)? <= f[i] {
                    next.push(new_candidate);
                }
            } else {
                next.extend(candidates.iter().copied().filter(|&t| t != 0));
                next.push(new_candidate);
            }
            candidates = next;
        }
    }

    let mut change_indices = Vec::new();
    let mut t = n;
    let mut hops = 0usize;
    while arg[t] != 0 {
        change_indices.push(arg[t]);
        t = arg[t];
        hops += 1;
        if hops > n / t_h + 1 {
            return Err(Error::Numerical(
                "backtracking did not terminate".to_owned(),
            ));
        }
    }
    change_indices.reverse();

    let segmentation = Segmentation::new(change_indices, n, t_h)?;
    Ok(PeltDetection {
        m_hat: segmentation.m(),
        segmentation,
        penalized_cost: f[n],
        pruning: PruningStats {
            candidates_mean: cand_total as f64 / steps.max(1) as f64,
            candidates_max: cand_max,
        },
        sigma,
    })
}
