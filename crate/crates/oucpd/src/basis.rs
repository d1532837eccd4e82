//! Periodic basis function sets for the time-dependent drift level.
//!
//! A [`BasisSet`] holds `p` bounded functions `phi_1, ..., phi_p`, each
//! periodic with the set's period `v` and orthogonal in the sense
//! `integral_0^v phi_j phi_k dt = v * delta_jk`. The drift of the process is
//! `L(t) - a x` with `L(t) = sum_k mu_k phi_k(t)`, so the basis fixes the
//! regression design used everywhere downstream.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type BasisFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Whether [`BasisSet::from_functions`] verifies periodicity, boundedness and
/// orthogonality before accepting the set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionCheck {
    Verified,
    Unchecked,
}

/// A set of `p` periodic, orthogonal, bounded basis functions.
///
/// Immutable after construction and safe to share across threads.
pub struct BasisSet {
    evaluators: Vec<Box<BasisFn>>,
    period: f64,
    bound: f64,
    label: String,
}

impl std::fmt::Debug for BasisSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BasisSet")
            .field("p", &self.p())
            .field("period", &self.period)
            .field("bound", &self.bound)
            .field("label", &self.label)
            .finish()
    }
}

/// Tolerance for the construction-time periodicity and boundedness checks on
/// user-supplied evaluators. The shipped sets meet far tighter bounds (see
/// the module tests).
const CHECK_POINTWISE_TOL: f64 = 1e-9;
/// Relative tolerance of the Gram check: `|G - v I| <= tol * v` entrywise.
const CHECK_GRAM_TOL: f64 = 1e-6;
const CHECK_GRAM_POINTS: usize = 10_000;

impl BasisSet {
    /// The classical-OU basis: a single constant function, period 1.
    pub fn constant() -> Self {
        Self {
            evaluators: vec![Box::new(|_t| 1.0)],
            period: 1.0,
            bound: 1.0,
            label: "constant".to_owned(),
        }
    }

    /// The two-function set `{1, sqrt(2) cos(pi t / (2 dt))}` whose cosine
    /// frequency is tied to the sampling step; its period is `4 dt`.
    pub fn cosine_pair(delta_t: f64) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cosine_pair needs a positive delta_t, got {delta_t}"
            )));
        }
        let omega = PI / (2.0 * delta_t);
        let scale = 2.0f64.sqrt();
        Ok(Self {
            evaluators: vec![
                Box::new(|_t| 1.0),
                Box::new(move |t| scale * (omega * t).cos()),
            ],
            period: 4.0 * delta_t,
            bound: scale,
            label: "case2".to_owned(),
        })
    }

    /// Builds a basis from user-supplied evaluators.
    ///
    /// With [`ConstructionCheck::Verified`] the set must pass periodicity,
    /// boundedness and orthogonality checks; `Unchecked` skips them.
    pub fn from_functions(
        evaluators: Vec<Box<BasisFn>>,
        period: f64,
        bound: f64,
        check: ConstructionCheck,
    ) -> Result<Self> {
        if evaluators.is_empty() {
            return Err(Error::InvalidParameter("empty basis".to_owned()));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "period must be finite and positive, got {period}"
            )));
        }
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bound must be finite and positive, got {bound}"
            )));
        }
        let set = Self {
            evaluators,
            period,
            bound,
            label: "custom".to_owned(),
        };
        if check == ConstructionCheck::Verified {
            set.verify()?;
        }
        Ok(set)
    }

    pub fn p(&self) -> usize {
        self.evaluators.len()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// The uniform bound `K` with `|phi_k(t)| <= K`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates all `p` functions at `t`.
    pub fn evaluate(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.p()];
        self.evaluate_into(t, &mut out);
        out
    }

    pub fn evaluate_into(&self, t: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.p());
        for (o, f) in out.iter_mut().zip(&self.evaluators) {
            *o = f(t);
        }
    }

    /// Trapezoid-rule approximation of the Gram matrix
    /// `G[j][k] = integral_0^v phi_j phi_k dt` over one period.
    #[allow(clippy::needless_range_loop)]
    pub fn gram_matrix(&self, n_points: usize) -> Result<Vec<Vec<f64>>> {
        if n_points < 100 {
            return Err(Error::InvalidParameter(format!(
                "gram_matrix needs at least 100 quadrature points, got {n_points}"
            )));
        }
        let p = self.p();
        let step = self.period / n_points as f64;
        let mut gram = vec![vec![0.0; p]; p];
        let mut vals = vec![0.0; p];
        for i in 0..=n_points {
            let t = i as f64 * step;
            self.evaluate_into(t, &mut vals);
            let w = if i == 0 || i == n_points { 0.5 } else { 1.0 };
            for j in 0..p {
                for k in j..p {
                    gram[j][k] += w * vals[j] * vals[k] * step;
                }
            }
        }
        for j in 0..p {
            for k in 0..j {
                gram[j][k] = gram[k][j];
            }
        }
        Ok(gram)
    }

    fn verify(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6f75_6263);
        let mut vals = vec![0.0; self.p()];
        let mut folded = vec![0.0; self.p()];
        for _ in 0..1_000 {
            let t: f64 = rng.random::<f64>() * 10.0 * self.period;
            self.evaluate_into(t, &mut vals);
            self.evaluate_into(t % self.period, &mut folded);
            for (k, (&v, &f)) in vals.iter().zip(folded.iter()).enumerate() {
                if !v.is_finite() {
                    return Err(Error::BasisCheck(format!(
                        "phi_{} is not finite at t={t}",
                        k + 1
                    )));
                }
                if v.abs() > self.bound + CHECK_POINTWISE_TOL {
                    return Err(Error::BasisCheck(format!(
                        "phi_{} exceeds the stated bound {} at t={t}: |{v}|",
                        k + 1,
                        self.bound
                    )));
                }
                if (v - f).abs() > CHECK_POINTWISE_TOL {
                    return Err(Error::BasisCheck(format!(
                        "phi_{} is not {}-periodic at t={t}: {v} vs {f}",
                        k + 1,
                        self.period
                    )));
                }
            }
        }
        let gram = self.gram_matrix(CHECK_GRAM_POINTS)?;
        let v = self.period;
        for (j, row) in gram.iter().enumerate() {
            for (k, &g) in row.iter().enumerate() {
                let target = if j == k { v } else { 0.0 };
                if (g - target).abs() > CHECK_GRAM_TOL * v {
                    return Err(Error::BasisCheck(format!(
                        "orthogonality failed at ({j},{k}): Gram entry {g}, expected {target}"
                    )));
                }
            }
        }
        Ok(())
    }
}
