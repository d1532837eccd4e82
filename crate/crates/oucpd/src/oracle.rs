//! Brute-force reference implementations used to validate the detectors.
//!
//! Everything here recomputes from scratch: rows are rebuilt per segment,
//! normal equations are assembled densely and solved by Gaussian
//! elimination, and segmentations are enumerated exhaustively. No code is
//! shared with the prefix-sum path the detectors use.

use crate::basis::BasisSet;
use crate::detect::{MinSegLen, Objective, ObjectiveKind, Segmentation};
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::sim::DriftParams;
use crate::stats::{DesignRow, design_row};

pub const MAX_N: usize = 120;
pub const MAX_M: usize = 3;

/// Ordinary least squares on raw design rows via dense normal equations and
/// partial-pivot Gaussian elimination.
pub fn ols_direct(rows: &[DesignRow]) -> Result<DriftParams> {
    if rows.is_empty() {
        return Err(Error::InvalidData("no rows".to_owned()));
    }
    let d = rows[0].z.len();
    if rows.len() < d {
        return Err(Error::InvalidData(format!(
            "{} rows cannot identify {d} coefficients",
            rows.len()
        )));
    }
    let mut ata = vec![0.0; d * d];
    let mut aty = vec![0.0; d];
    for row in rows {
        for j in 0..d {
            for k in 0..d {
                ata[j * d + k] += row.z[j] * row.z[k];
            }
            aty[j] += row.z[j] * row.y;
        }
    }
    let theta = gauss_solve(d, &mut ata, &mut aty)?;
    DriftParams::from_theta(&theta)
}

fn gauss_solve(d: usize, a: &mut [f64], b: &mut [f64]) -> Result<Vec<f64>> {
    for col in 0..d {
        let mut pivot = col;
        for row in (col + 1)..d {
            if a[row * d + col].abs() > a[pivot * d + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * d + col].abs() < 1e-13 * scale_of(d, a) {
            return Err(Error::InvalidData(
                "rank-deficient design in direct OLS".to_owned(),
            ));
        }
        if pivot != col {
            for k in 0..d {
                a.swap(col * d + k, pivot * d + k);
            }
            b.swap(col, pivot);
        }
        for row in (col + 1)..d {
            let factor = a[row * d + col] / a[col * d + col];
            for k in col..d {
                a[row * d + k] -= factor * a[col * d + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; d];
    for row in (0..d).rev() {
        let mut v = b[row];
        for k in (row + 1)..d {
            v -= a[row * d + k] * x[k];
        }
        x[row] = v / a[row * d + row];
    }
    Ok(x)
}

fn scale_of(d: usize, a: &[f64]) -> f64 {
    a.iter()
        .take(d * d)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300)
}

fn segment_cost_direct(
    series: &TimeSeries,
    basis: &BasisSet,
    a: usize,
    b: usize,
    objective: &Objective,
) -> Result<f64> {
    let rows: Vec<DesignRow> = (a..b).map(|i| design_row(series, basis, i)).collect();
    let params = ols_direct(&rows)?;
    let theta = params.theta();
    match objective.kind() {
        ObjectiveKind::Lsse => {
            let mut sse = 0.0;
            for row in &rows {
                let fit: f64 = row.z.iter().zip(&theta).map(|(z, t)| z * t).sum();
                let res = row.y - fit;
                sse += res * res;
            }
            Ok(sse)
        }
        ObjectiveKind::Mll => {
            let sigma = objective.sigma().expect("MLL objective carries sigma");
            let dt = series.delta_t();
            let mut lin = 0.0;
            let mut quad = 0.0;
            for row in &rows {
                let fit: f64 = row.z.iter().zip(&theta).map(|(z, t)| z * t).sum();
                lin += fit * row.y;
                quad += fit * fit;
            }
            Ok((lin - 0.5 * quad) / (dt * sigma * sigma))
        }
    }
}

/// True when `cand` beats `best`: strictly better cost, or an exactly equal
/// cost with a change vector that is smaller read from the last index
/// backwards (the dynamic program's tie-break).
fn improves(kind: ObjectiveKind, cand: (f64, &[usize]), best: (f64, &[usize])) -> bool {
    if kind.better(cand.0, best.0) {
        return true;
    }
    if cand.0 == best.0 {
        for (c, b) in cand.1.iter().rev().zip(best.1.iter().rev()) {
            match c.cmp(b) {
                std::cmp::Ordering::Less => return true,
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    false
}

/// Enumerates every admissible placement of `m` change points and returns
/// the best, under the same tie-break as the dynamic program.
///
/// Refuses instances beyond `n <= 120`, `m <= 3`.
pub fn exhaustive_search(
    series: &TimeSeries,
    basis: &BasisSet,
    m: usize,
    objective: Objective,
    min_seg: &MinSegLen,
) -> Result<(Segmentation, f64)> {
    let n = series.n_rows();
    if n > MAX_N || m > MAX_M {
        return Err(Error::EnumerationCap {
            n,
            m,
            max_n: MAX_N,
            max_m: MAX_M,
        });
    }
    let h = min_seg.resolve(n, basis.p())?;
    if n < (m + 1) * h {
        return Err(Error::Infeasible {
            required: (m + 1) * h,
            available: n,
        });
    }

    let mut ks = vec![0usize; m];
    let mut best: Option<(f64, Vec<usize>)> = None;
    enumerate(series, basis, &objective, h, n, &mut ks, 0, &mut best)?;
    let (cost, change_indices) =
        best.ok_or_else(|| Error::Numerical("enumeration found no candidate".to_owned()))?;
    Ok((Segmentation::new(change_indices, n, h)?, cost))
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    series: &TimeSeries,
    basis: &BasisSet,
    objective: &Objective,
    h: usize,
    n: usize,
    ks: &mut Vec<usize>,
    level: usize,
    best: &mut Option<(f64, Vec<usize>)>,
) -> Result<()> {
    let m = ks.len();
    if level == m {
        let mut bounds = vec![0usize];
        bounds.extend_from_slice(ks);
        bounds.push(n);
        let mut total = 0.0;
        for w in bounds.windows(2) {
            total += segment_cost_direct(series, basis, w[0], w[1], objective)?;
        }
        let replace = match best {
            None => true,
            Some((c, v)) => improves(objective.kind(), (total, ks), (*c, v.as_slice())),
        };
        if replace {
            *best = Some((total, ks.clone()));
        }
        return Ok(());
    }
    let lo = if level == 0 { h } else { ks[level - 1] + h };
    let hi = n - (m - level) * h;
    for k in lo..=hi {
        ks[level] = k;
        enumerate(series, basis, objective, h, n, ks, level + 1, best)?;
    }
    Ok(())
}
