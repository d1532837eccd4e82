//! Euler-Maruyama simulation of the regime-switching mean-reverting process
//! `dX = (sum_k mu_k phi_k(t) - a X) dt + sigma dW` with piecewise-constant
//! drift parameters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// One regime's drift parameters: basis weights `mu` and mean-reversion
/// rate `a` (held positive-signed; the sign flip on the state column lives
/// in the design row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftParams {
    pub mu: Vec<f64>,
    pub a: f64,
}

impl DriftParams {
    pub fn new(mu: Vec<f64>, a: f64) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidParameter(
                "drift parameters need at least one basis weight".to_owned(),
            ));
        }
        if mu.iter().any(|m| !m.is_finite()) || !a.is_finite() {
            return Err(Error::InvalidParameter(
                "drift parameters must be finite".to_owned(),
            ));
        }
        Ok(Self { mu, a })
    }

    /// Number of basis weights `p`.
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Non-fatal: `a <= 0` means the process does not mean-revert.
    pub fn stationarity_warning(&self) -> Option<String> {
        (self.a <= 0.0).then(|| {
            format!(
                "mean-reversion rate a = {} is not positive; the process is non-stationary",
                self.a
            )
        })
    }

    /// Instantaneous drift `sum_k mu_k phi_k(t) - a x`.
    pub fn drift(&self, basis: &BasisSet, t: f64, x: f64) -> f64 {
        debug_assert_eq!(basis.p(), self.dim());
        let phi = basis.evaluate(t);
        let s: f64 = self.mu.iter().zip(&phi).map(|(m, v)| m * v).sum();
        s - self.a * x
    }

    /// The regression coefficient vector on the design `(phi_1, ..., phi_p, -x)`:
    /// `(mu_1, ..., mu_p, a)`.
    pub fn theta(&self) -> Vec<f64> {
        let mut th = self.mu.clone();
        th.push(self.a);
        th
    }

    /// Inverse of [`DriftParams::theta`].
    pub fn from_theta(theta: &[f64]) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::InvalidParameter(
                "theta needs at least 2 components".to_owned(),
            ));
        }
        let (mu, a) = theta.split_at(theta.len() - 1);
        Self::new(mu.to_vec(), a[0])
    }
}

/// Simulation setup: regimes, change fractions, diffusion and grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimeScenario {
    pub regimes: Vec<DriftParams>,
    /// Strictly increasing change fractions `s_1 < ... < s_m` in (0, 1);
    /// regime `j+1` starts at row `round(s_j * n)`.
    pub change_fractions: Vec<f64>,
    pub sigma: f64,
    /// Initial value; defaults to the first regime's long-run level
    /// `mu_1 / a` when unset.
    pub x0: Option<f64>,
    pub horizon: f64,
    pub delta_t: f64,
}

impl RegimeScenario {
    pub fn validate(&self) -> Result<()> {
        if self.regimes.is_empty() {
            return Err(Error::InvalidParameter("no regimes".to_owned()));
        }
        if self.regimes.len() != self.change_fractions.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} regimes require {} change fractions, got {}",
                self.regimes.len(),
                self.regimes.len() - 1,
                self.change_fractions.len()
            )));
        }
        let p = self.regimes[0].dim();
        if self.regimes.iter().any(|r| r.dim() != p) {
            return Err(Error::InvalidParameter(
                "all regimes must share the basis dimension".to_owned(),
            ));
        }
        let mut prev = 0.0;
        for &s in &self.change_fractions {
            if !(s > prev && s < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "change fractions must satisfy 0 < s_1 < ... < s_m < 1, got {:?}",
                    self.change_fractions
                )));
            }
            prev = s;
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and non-negative, got {}",
                self.sigma
            )));
        }
        if !(self.delta_t.is_finite() && self.delta_t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta_t must be finite and positive, got {}",
                self.delta_t
            )));
        }
        let n = self.n_rows()?;
        let rows = self.change_rows()?;
        let mut prev = 0usize;
        for &k in rows.iter().chain(std::iter::once(&n)) {
            if k <= prev {
                return Err(Error::InvalidParameter(format!(
                    "regime [{prev}, {k}) spans less than one full step after snapping"
                )));
            }
            prev = k;
        }
        if self.x0.is_none() && self.regimes[0].a <= 0.0 {
            return Err(Error::InvalidParameter(
                "x0 must be given explicitly when the first regime has a <= 0".to_owned(),
            ));
        }
        Ok(())
    }

    /// `n = T / delta_t`, which must be an integer >= 2.
    pub fn n_rows(&self) -> Result<usize> {
        let ratio = self.horizon / self.delta_t;
        let n = ratio.round();
        if !(ratio.is_finite() && (ratio - n).abs() <= 1e-6 * n.max(1.0)) {
            return Err(Error::InvalidParameter(format!(
                "horizon / delta_t = {ratio} is not an integer"
            )));
        }
        if n < 2.0 {
            return Err(Error::InvalidParameter(format!(
                "horizon / delta_t = {ratio} but at least 2 steps are required"
            )));
        }
        Ok(n as usize)
    }

    /// Change indices snapped to the grid: `k_j = round(s_j * n)`.
    pub fn change_rows(&self) -> Result<Vec<usize>> {
        let n = self.n_rows()? as f64;
        Ok(self
            .change_fractions
            .iter()
            .map(|s| (s * n).round() as usize)
            .collect())
    }

    pub fn initial_value(&self) -> f64 {
        self.x0
            .unwrap_or_else(|| self.regimes[0].mu[0] / self.regimes[0].a)
    }
}

/// Simulates the scenario on its grid with seeded standard-normal draws.
///
/// Row `i` (the step from `t_i` to `t_{i+1}`) uses the drift of the regime
/// whose row interval `[k_{j-1}, k_j)` contains `i`, the same row convention
/// the estimators use. The same seed reproduces the path bit for bit.
pub fn simulate(scenario: &RegimeScenario, basis: &BasisSet, seed: u64) -> Result<TimeSeries> {
    scenario.validate()?;
    let p = scenario.regimes[0].dim();
    if basis.p() != p {
        return Err(Error::DimensionMismatch {
            basis_p: basis.p(),
            param_p: p,
        });
    }
    let n = scenario.n_rows()?;
    let bounds = {
        let mut b = vec![0usize];
        b.extend(scenario.change_rows()?);
        b.push(n);
        b
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = scenario.delta_t;
    let noise_scale = scenario.sigma * dt.sqrt();
    let mut values = Vec::with_capacity(n + 1);
    let mut x = scenario.initial_value();
    values.push(x);
    let mut phi = vec![0.0; p];
    for (j, regime) in scenario.regimes.iter().enumerate() {
        for i in bounds[j]..bounds[j + 1] {
            let t = i as f64 * dt;
            basis.evaluate_into(t, &mut phi);
            let mut drift = -regime.a * x;
            for (k, &mu) in regime.mu.iter().enumerate() {
                drift += mu * phi[k];
            }
            let w: f64 = StandardNormal.sample(&mut rng);
            x += drift * dt + noise_scale * w;
            values.push(x);
        }
    }
    TimeSeries::new(dt, values)
}

/// The coefficient presets used throughout the simulation study.
pub mod presets {
    use super::*;

    /// Which drift family to simulate: a constant level (`p = 1`) or the
    /// constant-plus-cosine level (`p = 2`). On the CLI these are cases 1
    /// and 2.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    pub enum PresetCase {
        Classical,
        Periodic,
    }

    impl PresetCase {
        pub fn id(self) -> u8 {
            match self {
                PresetCase::Classical => 1,
                PresetCase::Periodic => 2,
            }
        }

        pub fn from_id(id: u8) -> Result<Self> {
            match id {
                1 => Ok(PresetCase::Classical),
                2 => Ok(PresetCase::Periodic),
                other => Err(Error::InvalidParameter(format!(
                    "unknown case {other}; expected 1 or 2"
                ))),
            }
        }
    }

    const MU1: [f64; 4] = [0.08, 2.50, 0.08, 2.50];
    const MU2: [f64; 4] = [0.02, 1.20, 0.02, 1.20];
    const ALPHA: [f64; 4] = [0.10, 1.00, 0.50, 1.00];

    /// Per-regime coefficients for `m` change points (`m + 1` regimes).
    /// Only `m = 2` and `m = 3` are tabulated.
    pub fn regimes(case: PresetCase, m: usize) -> Result<Vec<DriftParams>> {
        if !(m == 2 || m == 3) {
            return Err(Error::InvalidParameter(format!(
                "preset coefficients exist for m = 2 or 3 change points, got {m}"
            )));
        }
        (0..=m)
            .map(|j| match case {
                PresetCase::Classical => DriftParams::new(vec![MU1[j]], ALPHA[j]),
                PresetCase::Periodic => DriftParams::new(vec![MU1[j], MU2[j]], ALPHA[j]),
            })
            .collect()
    }

    pub fn default_fractions(m: usize) -> Result<Vec<f64>> {
        match m {
            2 => Ok(vec![0.35, 0.70]),
            3 => Ok(vec![0.25, 0.50, 0.75]),
            other => Err(Error::InvalidParameter(format!(
                "preset change fractions exist for m = 2 or 3, got {other}"
            ))),
        }
    }

    pub fn basis(case: PresetCase, delta_t: f64) -> Result<BasisSet> {
        match case {
            PresetCase::Classical => Ok(BasisSet::constant()),
            PresetCase::Periodic => BasisSet::cosine_pair(delta_t),
        }
    }

    /// A ready-to-run scenario with the preset coefficients and fractions.
    pub fn scenario(
        case: PresetCase,
        m: usize,
        horizon: f64,
        sigma: f64,
        delta_t: f64,
    ) -> Result<RegimeScenario> {
        let s = RegimeScenario {
            regimes: regimes(case, m)?,
            change_fractions: default_fractions(m)?,
            sigma,
            x0: None,
            horizon,
            delta_t,
        };
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn single_regime(mu: f64, a: f64, sigma: f64, x0: f64, t: f64, dt: f64) -> RegimeScenario {
        RegimeScenario {
            regimes: vec![DriftParams::new(vec![mu], a).unwrap()],
            change_fractions: vec![],
            sigma,
            x0: Some(x0),
            horizon: t,
            delta_t: dt,
        }
    }

    #[test]
    fn drift_known_values() {
        let b = BasisSet::constant();
        let p = DriftParams::new(vec![0.08], 0.10).unwrap();
        assert_abs_diff_eq!(p.drift(&b, 3.3, 0.0), 0.08, epsilon = 1e-15);

        let p = DriftParams::new(vec![2.50], 1.00).unwrap();
        assert_abs_diff_eq!(p.drift(&b, 0.0, 2.5), 0.0, epsilon = 1e-15);

        // Hand evaluation: 0.08 + 0.02*sqrt(2) - 0.10 * 1.
        let b2 = BasisSet::cosine_pair(0.25).unwrap();
        let p = DriftParams::new(vec![0.08, 0.02], 0.10).unwrap();
        assert_abs_diff_eq!(
            p.drift(&b2, 0.0, 1.0),
            0.008284271247461902,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_noise_follows_euler_recursion() {
        let sc = single_regime(0.08, 0.10, 0.0, 0.3, 1.0, 0.01);
        let series = simulate(&sc, &BasisSet::constant(), 1).unwrap();
        let mut x = 0.3;
        for (i, &v) in series.values().iter().enumerate().skip(1) {
            x += (0.08 - 0.10 * x) * 0.01;
            assert!((v - x).abs() < 1e-12, "step {i}");
        }
        // Closed form: x_n = mu/a + (x0 - mu/a) (1 - a dt)^n.
        let closed = 0.8 + (0.3 - 0.8) * 0.999f64.powi(100);
        assert_abs_diff_eq!(*series.values().last().unwrap(), closed, epsilon = 1e-12);
    }

    #[test]
    fn zero_noise_fixed_point_stays_constant() {
        let sc = single_regime(0.08, 0.10, 0.0, 0.8, 1.0, 0.01);
        let series = simulate(&sc, &BasisSet::constant(), 1).unwrap();
        for &v in series.values() {
            assert_abs_diff_eq!(v, 0.8, epsilon = 1e-14);
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let sc = presets::scenario(presets::PresetCase::Classical, 2, 5.0, 0.2, 0.005).unwrap();
        let b = BasisSet::constant();
        let s1 = simulate(&sc, &b, 42).unwrap();
        let s2 = simulate(&sc, &b, 42).unwrap();
        assert_eq!(s1.values(), s2.values());
        let s3 = simulate(&sc, &b, 43).unwrap();
        assert_ne!(s1.values(), s3.values());
    }

    #[test]
    fn change_points_snap_to_grid() {
        let b = BasisSet::constant();
        let mut sc = presets::scenario(presets::PresetCase::Classical, 2, 5.0, 0.2, 0.005).unwrap();
        // 0.35 and 0.3502 both snap to row 350 of 1000.
        let base = simulate(&sc, &b, 7).unwrap();
        sc.change_fractions = vec![0.3502, 0.7001];
        let nudged = simulate(&sc, &b, 7).unwrap();
        assert_eq!(base.values(), nudged.values());
    }

    #[test]
    fn rejects_mismatched_basis() {
        let sc = presets::scenario(presets::PresetCase::Periodic, 2, 5.0, 0.2, 0.005).unwrap();
        let err = simulate(&sc, &BasisSet::constant(), 0);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_non_integer_grid_and_bad_fractions() {
        let mut sc = single_regime(0.08, 0.1, 0.2, 0.8, 1.0, 0.3);
        assert!(sc.validate().is_err());
        sc = single_regime(0.08, 0.1, 0.2, 0.8, 1.0, 0.6);
        assert!(sc.validate().is_err()); // n < 2
        let mut sc = presets::scenario(presets::PresetCase::Classical, 2, 5.0, 0.2, 0.005).unwrap();
        sc.change_fractions = vec![0.7, 0.35];
        assert!(sc.validate().is_err());
        sc.change_fractions = vec![0.35, 0.35];
        assert!(sc.validate().is_err());
    }

    #[test]
    fn preset_tables() {
        let r = presets::regimes(presets::PresetCase::Classical, 3).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r[3].mu, vec![2.50]);
        assert_eq!(r[3].a, 1.00);
        let r = presets::regimes(presets::PresetCase::Periodic, 2).unwrap();
        assert_eq!(r[1].mu, vec![2.50, 1.20]);
        assert!(presets::regimes(presets::PresetCase::Classical, 4).is_err());
    }
}
