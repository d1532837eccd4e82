//! Change-point detectors: exact dynamic programming for a known number of
//! change points, segment-neighbourhood search and a modified PELT for an
//! unknown number.

mod cost;
mod dp;
mod pelt;
mod sns;

pub use cost::{CachePolicy, CachedCost, SegmentCost, StatsCost};
pub use dp::{DpOptions, DpTable, KnownMDetection, detect_known_m, detect_known_m_all_prefixes};
pub use pelt::{CandidateAdmission, PeltDetection, PeltOptions, PruningStats, detect_pelt};
pub use sns::{IcEntry, PenaltyKind, SnsDetection, SnsOptions, detect_unknown_m_sns};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which segment objective the search optimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// Minimise the total sum of squared Euler-increment errors.
    Lsse,
    /// Maximise the total Riemann-sum log-likelihood (needs sigma).
    Mll,
}

impl ObjectiveKind {
    /// True when `a` is strictly better than `b` under this objective.
    #[inline]
    pub(crate) fn better(self, a: f64, b: f64) -> bool {
        match self {
            ObjectiveKind::Lsse => a < b,
            ObjectiveKind::Mll => a > b,
        }
    }
}

/// Objective plus the diffusion level the log-likelihood needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    kind: ObjectiveKind,
    sigma: Option<f64>,
}

impl Objective {
    pub fn lsse() -> Self {
        Self {
            kind: ObjectiveKind::Lsse,
            sigma: None,
        }
    }

    pub fn mll(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "the log-likelihood objective needs a positive sigma, got {sigma}"
            )));
        }
        Ok(Self {
            kind: ObjectiveKind::Mll,
            sigma: Some(sigma),
        })
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }
}

/// Minimum permissible regime length, as a fraction of the horizon or an
/// absolute number of rows. Either way the resolved length is floored at
/// `p + 2` rows so each segment's Q matrix is generically invertible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MinSegLen {
    Fraction(f64),
    Rows(usize),
}

impl Default for MinSegLen {
    fn default() -> Self {
        MinSegLen::Fraction(0.05)
    }
}

impl MinSegLen {
    /// Resolves to a row count `h_idx` for a series of `n_rows` rows and a
    /// basis of `p` functions.
    pub fn resolve(&self, n_rows: usize, p: usize) -> Result<usize> {
        let raw = match *self {
            MinSegLen::Fraction(f) => {
                if !(f.is_finite() && f > 0.0 && f < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "minimum segment fraction must lie in (0, 1), got {f}"
                    )));
                }
                (f * n_rows as f64).ceil() as usize
            }
            MinSegLen::Rows(r) => {
                if r == 0 {
                    return Err(Error::InvalidParameter(
                        "minimum segment length must be at least one row".to_owned(),
                    ));
                }
                r
            }
        };
        Ok(raw.max(p + 2))
    }
}

/// Ordered interior change indices `0 < k_1 < ... < k_m < n` with the
/// minimum spacing enforced against the virtual boundaries `k_0 = 0`,
/// `k_{m+1} = n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    change_indices: Vec<usize>,
    n_rows: usize,
    min_len: usize,
}

impl Segmentation {
    pub fn new(change_indices: Vec<usize>, n_rows: usize, min_len: usize) -> Result<Self> {
        let mut prev = 0usize;
        for (j, &k) in change_indices.iter().enumerate() {
            if k < prev + min_len {
                return Err(Error::InvalidParameter(format!(
                    "change index k_{} = {k} is within {min_len} rows of {prev}",
                    j + 1
                )));
            }
            prev = k;
        }
        if n_rows < prev + min_len {
            return Err(Error::InvalidParameter(format!(
                "last change index {prev} is within {min_len} rows of the end {n_rows}"
            )));
        }
        Ok(Self {
            change_indices,
            n_rows,
            min_len,
        })
    }

    /// Number of change points `m`.
    pub fn m(&self) -> usize {
        self.change_indices.len()
    }

    pub fn change_indices(&self) -> &[usize] {
        &self.change_indices
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn min_len(&self) -> usize {
        self.min_len
    }

    /// `s_j = k_j / n`.
    pub fn fractions(&self) -> Vec<f64> {
        self.change_indices
            .iter()
            .map(|&k| k as f64 / self.n_rows as f64)
            .collect()
    }

    pub fn change_times(&self, delta_t: f64) -> Vec<f64> {
        self.change_indices
            .iter()
            .map(|&k| k as f64 * delta_t)
            .collect()
    }

    /// Row ranges `[k_{j-1}, k_j)` tiling `[0, n)`.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let mut bounds = vec![0usize];
        bounds.extend_from_slice(&self.change_indices);
        bounds.push(self.n_rows);
        bounds.windows(2).map(|w| (w[0], w[1])).collect()
    }
}
