//! Per-segment sufficient statistics and drift estimation.
//!
//! Each row `i` of the Euler-discretised regression is
//! `y_i = z_i theta + eps_i` with `y_i = x_{i+1} - x_i` and
//! `z_i = (phi_1(t_i), ..., phi_p(t_i), -x_i) * dt`. A segment's sufficient
//! statistics are
//!
//! - `q  = sum z_i' z_i / dt` (the discretised Q matrix),
//! - `r  = sum z_i' y_i / dt` (the discretised r vector),
//! - `yy = sum y_i^2`,
//!
//! from which the maximum-likelihood drift estimate is `theta_hat = q^-1 r`,
//! the segment SSE is `yy - dt (2 theta'r - theta'q theta)` and the
//! Riemann-sum log-likelihood at `theta_hat` is
//! `(theta'r - theta'q theta / 2) / sigma^2`.
//!
//! Row membership convention, used everywhere: row `i` belongs to the
//! segment `[a, b)` iff `a <= i < b`.

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::sim::DriftParams;

/// One regression row.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRow {
    /// `(phi_1(t_i), ..., phi_p(t_i), -x_i) * dt`.
    pub z: Vec<f64>,
    /// Increment `x_{i+1} - x_i`.
    pub y: f64,
}

/// Builds the regression row for increment `i`.
pub fn design_row(series: &TimeSeries, basis: &BasisSet, i: usize) -> DesignRow {
    assert!(i < series.n_rows(), "row {i} out of range");
    let dt = series.delta_t();
    let x = series.values();
    let mut z = basis.evaluate(series.time_at(i));
    z.push(-x[i]);
    for v in &mut z {
        *v *= dt;
    }
    DesignRow {
        z,
        y: x[i + 1] - x[i],
    }
}

/// Sufficient statistics of a row range `[a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentStatistics {
    /// Row-major symmetric `d x d` matrix, `d = p + 1`.
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub yy: f64,
    pub count: usize,
    pub a_idx: usize,
    pub b_idx: usize,
    pub delta_t: f64,
}

impl SegmentStatistics {
    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn q_at(&self, j: usize, k: usize) -> f64 {
        self.q[j * self.dim() + k]
    }

    /// Entrywise sum of adjacent ranges: `stats(a,b) (+) stats(b,c) = stats(a,c)`.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.b_idx != other.a_idx || self.delta_t != other.delta_t {
            return Err(Error::InvalidParameter(format!(
                "cannot merge statistics of [{}, {}) and [{}, {})",
                self.a_idx, self.b_idx, other.a_idx, other.b_idx
            )));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                basis_p: self.dim() - 1,
                param_p: other.dim() - 1,
            });
        }
        Ok(Self {
            q: self.q.iter().zip(&other.q).map(|(x, y)| x + y).collect(),
            r: self.r.iter().zip(&other.r).map(|(x, y)| x + y).collect(),
            yy: self.yy + other.yy,
            count: self.count + other.count,
            a_idx: self.a_idx,
            b_idx: other.b_idx,
            delta_t: self.delta_t,
        })
    }
}

fn check_range(series: &TimeSeries, a: usize, b: usize) -> Result<()> {
    if a >= b || b > series.n_rows() {
        return Err(Error::EmptySegment { a, b });
    }
    Ok(())
}

/// Accumulates the statistics of rows `[a, b)` by direct summation.
pub fn accumulate(
    series: &TimeSeries,
    basis: &BasisSet,
    a: usize,
    b: usize,
) -> Result<SegmentStatistics> {
    check_range(series, a, b)?;
    let p = basis.p();
    let d = p + 1;
    let dt = series.delta_t();
    let x = series.values();
    let mut q = vec![0.0; d * d];
    let mut r = vec![0.0; d];
    let mut yy = 0.0;
    let mut phi = vec![0.0; p];
    for i in a..b {
        basis.evaluate_into(series.time_at(i), &mut phi);
        let y = x[i + 1] - x[i];
        // q accumulates dt * v'v and r accumulates v'y for v = (phi, -x).
        for j in 0..p {
            for k in j..p {
                q[j * d + k] += dt * phi[j] * phi[k];
            }
            q[j * d + p] -= dt * phi[j] * x[i];
            r[j] += phi[j] * y;
        }
        q[p * d + p] += dt * x[i] * x[i];
        r[p] -= x[i] * y;
        yy += y * y;
    }
    for j in 0..d {
        for k in 0..j {
            q[j * d + k] = q[k * d + j];
        }
    }
    Ok(SegmentStatistics {
        q,
        r,
        yy,
        count: b - a,
        a_idx: a,
        b_idx: b,
        delta_t: dt,
    })
}

/// Prefix sums over the series enabling O(p^2) statistics for any row range.
///
/// Immutable after construction; range queries are read-only.
pub struct PrefixStats {
    /// `pp[j][k]` for j <= k, flattened: cumulative `phi_j phi_k`.
    pp: Vec<Vec<f64>>,
    /// Cumulative `phi_j * x`.
    px: Vec<Vec<f64>>,
    /// Cumulative `phi_j * y`.
    py: Vec<Vec<f64>>,
    xx: Vec<f64>,
    xy: Vec<f64>,
    yy: Vec<f64>,
    p: usize,
    n_rows: usize,
    delta_t: f64,
}

impl PrefixStats {
    pub fn new(series: &TimeSeries, basis: &BasisSet) -> Self {
        let p = basis.p();
        let n = series.n_rows();
        let x = series.values();
        let npp = p * (p + 1) / 2;
        let mut pp = vec![vec![0.0; n + 1]; npp];
        let mut px = vec![vec![0.0; n + 1]; p];
        let mut py = vec![vec![0.0; n + 1]; p];
        let mut xx = vec![0.0; n + 1];
        let mut xy = vec![0.0; n + 1];
        let mut yy = vec![0.0; n + 1];
        let mut phi = vec![0.0; p];
        for i in 0..n {
            basis.evaluate_into(series.time_at(i), &mut phi);
            let y = x[i + 1] - x[i];
            let mut idx = 0;
            for j in 0..p {
                for k in j..p {
                    pp[idx][i + 1] = pp[idx][i] + phi[j] * phi[k];
                    idx += 1;
                }
                px[j][i + 1] = px[j][i] + phi[j] * x[i];
                py[j][i + 1] = py[j][i] + phi[j] * y;
            }
            xx[i + 1] = xx[i] + x[i] * x[i];
            xy[i + 1] = xy[i] + x[i] * y;
            yy[i + 1] = yy[i] + y * y;
        }
        Self {
            pp,
            px,
            py,
            xx,
            xy,
            yy,
            p,
            n_rows: n,
            delta_t: series.delta_t(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    /// `p + 1`.
    pub fn dim(&self) -> usize {
        self.p + 1
    }

    /// Writes `q` (row-major `d x d`) and `r` for rows `[a, b)`; returns `yy`.
    ///
    /// Buffers must have lengths `d*d` and `d`.
    pub(crate) fn write_range(&self, a: usize, b: usize, q: &mut [f64], r: &mut [f64]) -> f64 {
        let p = self.p;
        let d = p + 1;
        let dt = self.delta_t;
        let mut idx = 0;
        for j in 0..p {
            for k in j..p {
                let v = dt * (self.pp[idx][b] - self.pp[idx][a]);
                q[j * d + k] = v;
                q[k * d + j] = v;
                idx += 1;
            }
            let v = -dt * (self.px[j][b] - self.px[j][a]);
            q[j * d + p] = v;
            q[p * d + j] = v;
            r[j] = self.py[j][b] - self.py[j][a];
        }
        q[p * d + p] = dt * (self.xx[b] - self.xx[a]);
        r[p] = -(self.xy[b] - self.xy[a]);
        self.yy[b] - self.yy[a]
    }

    /// Statistics of rows `[a, b)` from the prefix arrays.
    pub fn range(&self, a: usize, b: usize) -> Result<SegmentStatistics> {
        if a >= b || b > self.n_rows {
            return Err(Error::EmptySegment { a, b });
        }
        let d = self.dim();
        let mut q = vec![0.0; d * d];
        let mut r = vec![0.0; d];
        let yy = self.write_range(a, b, &mut q, &mut r);
        Ok(SegmentStatistics {
            q,
            r,
            yy,
            count: b - a,
            a_idx: a,
            b_idx: b,
            delta_t: self.delta_t,
        })
    }
}

pub(crate) mod linalg {
    /// Pivots this small relative to the original diagonal entry mean the
    /// matrix is rank deficient up to rounding.
    const PIVOT_REL_TOL: f64 = 1e-12;

    /// In-place Cholesky factorisation of a symmetric matrix (row-major,
    /// lower triangle). Returns false when the matrix is not positive
    /// definite (including numerically rank-deficient input, whose pivot
    /// residual is rounding noise around zero).
    pub fn cholesky(d: usize, m: &mut [f64]) -> bool {
        for j in 0..d {
            let orig = m[j * d + j];
            let mut diag = orig;
            for k in 0..j {
                diag -= m[j * d + k] * m[j * d + k];
            }
            if !(diag.is_finite() && diag > PIVOT_REL_TOL * orig) {
                return false;
            }
            let diag = diag.sqrt();
            m[j * d + j] = diag;
            for i in (j + 1)..d {
                let mut v = m[i * d + j];
                for k in 0..j {
                    v -= m[i * d + k] * m[j * d + k];
                }
                m[i * d + j] = v / diag;
            }
        }
        true
    }

    /// Solves `L L' x = b` given the factor from [`cholesky`]; overwrites `b`.
    pub fn cholesky_solve(d: usize, l: &[f64], b: &mut [f64]) {
        for i in 0..d {
            let mut v = b[i];
            for k in 0..i {
                v -= l[i * d + k] * b[k];
            }
            b[i] = v / l[i * d + i];
        }
        for i in (0..d).rev() {
            let mut v = b[i];
            for k in (i + 1)..d {
                v -= l[k * d + i] * b[k];
            }
            b[i] = v / l[i * d + i];
        }
    }

    /// Solves the SPD system `q x = r`; `scratch` must hold `d*d` entries.
    /// Returns false when `q` is not positive definite.
    pub fn spd_solve(d: usize, q: &[f64], r: &[f64], x: &mut [f64], scratch: &mut [f64]) -> bool {
        scratch.copy_from_slice(q);
        if !cholesky(d, scratch) {
            return false;
        }
        x.copy_from_slice(r);
        cholesky_solve(d, scratch, x);
        true
    }
}

/// Maximum-likelihood drift estimate `theta_hat = q^-1 r`, unpacked into
/// basis weights and the mean-reversion rate.
pub fn segment_mle(stats: &SegmentStatistics) -> Result<DriftParams> {
    let d = stats.dim();
    let mut theta = vec![0.0; d];
    let mut scratch = vec![0.0; d * d];
    if !linalg::spd_solve(d, &stats.q, &stats.r, &mut theta, &mut scratch) {
        return Err(Error::SingularStatistics {
            a: stats.a_idx,
            b: stats.b_idx,
        });
    }
    DriftParams::from_theta(&theta)
}

pub(crate) fn quadratic_forms(stats: &SegmentStatistics, theta: &[f64]) -> (f64, f64) {
    let d = stats.dim();
    let lin: f64 = theta.iter().zip(&stats.r).map(|(t, r)| t * r).sum();
    let mut quad = 0.0;
    for j in 0..d {
        let row: f64 = stats.q[j * d..(j + 1) * d]
            .iter()
            .zip(theta)
            .map(|(q, t)| q * t)
            .sum();
        quad += theta[j] * row;
    }
    (lin, quad)
}

/// Sum of squared residuals of the segment at its own MLE, computed row by
/// row (the definitional form; detectors use the algebraically equal
/// statistics form).
pub fn segment_sse(series: &TimeSeries, basis: &BasisSet, a: usize, b: usize) -> Result<f64> {
    let stats = accumulate(series, basis, a, b)?;
    let params = segment_mle(&stats)?;
    let theta = params.theta();
    let mut sse = 0.0;
    for i in a..b {
        let row = design_row(series, basis, i);
        let fit: f64 = row.z.iter().zip(&theta).map(|(z, t)| z * t).sum();
        let res = row.y - fit;
        sse += res * res;
    }
    Ok(sse)
}

/// Riemann-sum log-likelihood of the segment at its MLE.
///
/// Two algebraically equal forms are computed: the Riemann form
/// `(theta'r - theta'q theta / 2) / sigma^2` and the SSE identity
/// `(yy - SSE) / (2 dt sigma^2)`. They must agree to 1e-9 relative; a
/// violation is reported as an error rather than a result.
pub fn segment_loglik(
    series: &TimeSeries,
    basis: &BasisSet,
    a: usize,
    b: usize,
    sigma: f64,
) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let stats = accumulate(series, basis, a, b)?;
    let params = segment_mle(&stats)?;
    let theta = params.theta();
    let (lin, quad) = quadratic_forms(&stats, &theta);
    let riemann = (lin - 0.5 * quad) / (sigma * sigma);
    let sse = segment_sse(series, basis, a, b)?;
    let identity = (stats.yy - sse) / (2.0 * series.delta_t() * sigma * sigma);
    let tol = 1e-9 * riemann.abs().max(1.0);
    if (riemann - identity).abs() > tol {
        return Err(Error::LikelihoodIdentity {
            a,
            b,
            riemann,
            identity,
        });
    }
    Ok(riemann)
}

/// Plug-in diffusion estimate `sigma_hat = sqrt(sum y_i^2 / T)`.
pub fn realized_volatility(series: &TimeSeries) -> f64 {
    let x = series.values();
    let mut s = 0.0;
    for i in 0..series.n_rows() {
        let y = x[i + 1] - x[i];
        s += y * y;
    }
    (s / series.horizon()).sqrt()
}

/// Fit of one segment: parameters, SSE and (optionally) log-likelihood.
#[derive(Debug, Clone)]
pub struct SegmentFit {
    pub a_idx: usize,
    pub b_idx: usize,
    pub params: DriftParams,
    pub sse: f64,
    pub loglik: Option<f64>,
}

/// Fits every segment of a tiling given by interior change indices.
pub fn fit_segments(
    series: &TimeSeries,
    basis: &BasisSet,
    change_indices: &[usize],
    sigma: Option<f64>,
) -> Result<Vec<SegmentFit>> {
    let n = series.n_rows();
    let mut bounds = vec![0usize];
    bounds.extend_from_slice(change_indices);
    bounds.push(n);
    let mut fits = Vec::with_capacity(bounds.len() - 1);
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let stats = accumulate(series, basis, a, b)?;
        let params = segment_mle(&stats)?;
        let sse = segment_sse(series, basis, a, b)?;
        let loglik = match sigma {
            Some(s) => Some(segment_loglik(series, basis, a, b, s)?),
            None => None,
        };
        fits.push(SegmentFit {
            a_idx: a,
            b_idx: b,
            params,
            sse,
            loglik,
        });
    }
    Ok(fits)
}
