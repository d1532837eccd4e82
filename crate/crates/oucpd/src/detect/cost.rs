//! Segment-cost evaluation for the detectors: the H2(a, b) of the dynamic
//! programs, backed by prefix statistics, with an optional cache.

use crate::detect::{Objective, ObjectiveKind};
use crate::error::{Error, Result};
use crate::stats::{PrefixStats, linalg};

/// A segment objective evaluated on row ranges `[a, b)`.
pub trait SegmentCost {
    fn cost(&mut self, a: usize, b: usize) -> Result<f64>;
}

/// Cost function computed from prefix statistics in O(p^2) per call:
/// the segment SSE for the LSSE objective, the Riemann-sum log-likelihood
/// at the segment MLE for the MLL objective.
pub struct StatsCost<'a> {
    prefix: &'a PrefixStats,
    objective: Objective,
    q: Vec<f64>,
    r: Vec<f64>,
    theta: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> StatsCost<'a> {
    pub fn new(prefix: &'a PrefixStats, objective: Objective) -> Self {
        let d = prefix.dim();
        Self {
            prefix,
            objective,
            q: vec![0.0; d * d],
            r: vec![0.0; d],
            theta: vec![0.0; d],
            scratch: vec![0.0; d * d],
        }
    }
}

impl SegmentCost for StatsCost<'_> {
    fn cost(&mut self, a: usize, b: usize) -> Result<f64> {
        if a >= b || b > self.prefix.n_rows() {
            return Err(Error::EmptySegment { a, b });
        }
        let d = self.prefix.dim();
        let yy = self.prefix.write_range(a, b, &mut self.q, &mut self.r);
        if !linalg::spd_solve(d, &self.q, &self.r, &mut self.theta, &mut self.scratch) {
            return Err(Error::SingularStatistics { a, b });
        }
        let lin: f64 = self.theta.iter().zip(&self.r).map(|(t, r)| t * r).sum();
        let mut quad = 0.0;
        for j in 0..d {
            let mut row = 0.0;
            for k in 0..d {
                row += self.q[j * d + k] * self.theta[k];
            }
            quad += self.theta[j] * row;
        }
        let value = match self.objective.kind() {
            ObjectiveKind::Lsse => yy - self.prefix.delta_t() * (2.0 * lin - quad),
            ObjectiveKind::Mll => {
                let sigma = self.objective.sigma().expect("MLL objective carries sigma");
                (lin - 0.5 * quad) / (sigma * sigma)
            }
        };
        if !value.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite segment cost on rows [{a}, {b}): {value}"
            )));
        }
        Ok(value)
    }
}

/// Cache population policy.
///
/// `Eager` computes every admissible pair upfront (the dynamic program's
/// precomputation step); `Lazy` fills entries on first use. Both return
/// bit-identical values since they memoise the same cost function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CachePolicy {
    #[default]
    Lazy,
    Eager,
}

/// Caps the dense memo at (2^11 + 1)^2 entries (~34 MB); larger lazy caches
/// degrade to pass-through evaluation, larger eager caches are refused.
const MAX_DENSE_SIDE: usize = (1 << 11) + 1;

/// Memoising wrapper around a [`SegmentCost`].
pub struct CachedCost<C> {
    inner: C,
    memo: Option<Vec<f64>>,
    n_rows: usize,
    min_len: usize,
}

impl<C: SegmentCost> CachedCost<C> {
    pub fn new(inner: C, n_rows: usize, min_len: usize, policy: CachePolicy) -> Result<Self> {
        let side = n_rows + 1;
        let memo = match policy {
            CachePolicy::Lazy if side <= MAX_DENSE_SIDE => Some(vec![f64::NAN; side * side]),
            CachePolicy::Lazy => None,
            CachePolicy::Eager => {
                if side > MAX_DENSE_SIDE {
                    return Err(Error::InvalidParameter(format!(
                        "eager cost cache of {side}x{side} exceeds the dense cap"
                    )));
                }
                Some(vec![f64::NAN; side * side])
            }
        };
        let mut cache = Self {
            inner,
            memo,
            n_rows,
            min_len,
        };
        if policy == CachePolicy::Eager {
            for a in 0..n_rows {
                for b in (a + cache.min_len)..=n_rows {
                    let v = cache.inner.cost(a, b)?;
                    cache.memo.as_mut().expect("eager memo")[a * side + b] = v;
                }
            }
        }
        Ok(cache)
    }
}

impl<C: SegmentCost> SegmentCost for CachedCost<C> {
    fn cost(&mut self, a: usize, b: usize) -> Result<f64> {
        match &mut self.memo {
            None => self.inner.cost(a, b),
            Some(memo) => {
                let idx = a * (self.n_rows + 1) + b;
                let v = memo[idx];
                if v.is_nan() {
                    let fresh = self.inner.cost(a, b)?;
                    memo[idx] = fresh;
                    Ok(fresh)
                } else {
                    Ok(v)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSet;
    use crate::detect::Objective;
    use crate::sim::{DriftParams, RegimeScenario, simulate};
    use crate::stats::{segment_loglik, segment_sse};

    fn series() -> crate::series::TimeSeries {
        let sc = RegimeScenario {
            regimes: vec![DriftParams::new(vec![0.5], 0.8).unwrap()],
            change_fractions: vec![],
            sigma: 0.3,
            x0: Some(0.2),
            horizon: 2.0,
            delta_t: 0.02,
        };
        simulate(&sc, &BasisSet::constant(), 17).unwrap()
    }

    #[test]
    fn stats_cost_matches_definitional_ops() {
        let s = series();
        let b = BasisSet::constant();
        let prefix = PrefixStats::new(&s, &b);
        let mut lsse = StatsCost::new(&prefix, Objective::lsse());
        let mut mll = StatsCost::new(&prefix, Objective::mll(0.3).unwrap());
        for (a, bnd) in [(0usize, 100usize), (10, 40), (55, 100)] {
            let fast = lsse.cost(a, bnd).unwrap();
            let slow = segment_sse(&s, &b, a, bnd).unwrap();
            assert!(
                (fast - slow).abs() <= 1e-9 * slow.abs().max(1e-12),
                "sse {fast} vs {slow}"
            );
            let fast = mll.cost(a, bnd).unwrap();
            let slow = segment_loglik(&s, &b, a, bnd, 0.3).unwrap();
            assert!(
                (fast - slow).abs() <= 1e-9 * slow.abs().max(1.0),
                "ll {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn lazy_and_eager_caches_are_bit_identical() {
        let s = series();
        let b = BasisSet::constant();
        let prefix = PrefixStats::new(&s, &b);
        let n = s.n_rows();
        let mut lazy = CachedCost::new(
            StatsCost::new(&prefix, Objective::lsse()),
            n,
            5,
            CachePolicy::Lazy,
        )
        .unwrap();
        let mut eager = CachedCost::new(
            StatsCost::new(&prefix, Objective::lsse()),
            n,
            5,
            CachePolicy::Eager,
        )
        .unwrap();
        let mut fresh = StatsCost::new(&prefix, Objective::lsse());
        for a in (0..n - 5).step_by(7) {
            let bnd = (a + 5 + a % 13).min(n);
            let l = lazy.cost(a, bnd).unwrap();
            let e = eager.cost(a, bnd).unwrap();
            let f = fresh.cost(a, bnd).unwrap();
            assert_eq!(l.to_bits(), e.to_bits());
            assert_eq!(l.to_bits(), f.to_bits());
            // Second lookup returns the cached value bit for bit.
            assert_eq!(lazy.cost(a, bnd).unwrap().to_bits(), l.to_bits());
        }
    }
}
