//! Exact dynamic-programming search for a known number of change points.
//!
//! The table `H1(r, t)` holds the optimal total cost of segmenting the
//! prefix rows `[0, t)` with exactly `r` change points, each segment at
//! least `h_idx` rows long. Row `r = 0` is the single-segment cost
//! `H2(0, t)`; for `r >= 1`
//!
//! `H1(r, t) = opt over a in [r h, t - h] of H1(r-1, a) + H2(a, t)`
//!
//! minimising for the SSE objective and maximising for the log-likelihood
//! one. The scan keeps the first optimum it meets (strict comparison), so
//! backtracking yields the candidate vector that is smallest when compared
//! from the last change index backwards; the brute-force oracle applies the
//! same tie-break.

use crate::basis::BasisSet;
use crate::detect::cost::{CachePolicy, CachedCost, SegmentCost, StatsCost};
use crate::detect::{MinSegLen, Objective, ObjectiveKind, Segmentation};
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::stats::PrefixStats;

/// Options shared by the known-m search and the table builder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpOptions {
    pub min_seg: MinSegLen,
    pub cache: CachePolicy,
}

impl Default for DpOptions {
    fn default() -> Self {
        Self {
            min_seg: MinSegLen::default(),
            cache: CachePolicy::Lazy,
        }
    }
}

const UNSET: usize = usize::MAX;

/// The filled `H1` table.
#[derive(Debug, Clone)]
pub struct DpTable {
    kind: ObjectiveKind,
    n_rows: usize,
    h_idx: usize,
    m_max: usize,
    /// `cost[r][t]`, NaN where `(r, t)` is inadmissible or not computed.
    cost: Vec<Vec<f64>>,
    /// Arg-opt split `a` for `(r, t)`, `r >= 1`.
    back: Vec<Vec<usize>>,
}

impl DpTable {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn h_idx(&self) -> usize {
        self.h_idx
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    /// `H1(r, prefix_end)` when computed.
    pub fn optimal_cost(&self, r: usize, prefix_end: usize) -> Option<f64> {
        let v = *self.cost.get(r)?.get(prefix_end)?;
        v.is_finite().then_some(v)
    }

    /// Recovers the optimal change indices for `(r, prefix_end)`.
    pub fn backtrack(&self, r: usize, prefix_end: usize) -> Result<Vec<usize>> {
        if self.optimal_cost(r, prefix_end).is_none() {
            return Err(Error::InvalidParameter(format!(
                "no table entry for r={r}, prefix end {prefix_end}"
            )));
        }
        let mut ks = vec![0usize; r];
        let mut t = prefix_end;
        for level in (1..=r).rev() {
            let a = self.back[level][t];
            debug_assert_ne!(a, UNSET);
            ks[level - 1] = a;
            t = a;
        }
        Ok(ks)
    }
}

enum FillMode {
    /// Paper-shaped restricted ranges for one target `m`; the last row is
    /// computed only at the full prefix.
    KnownM,
    /// Full ranges for every `r`, reusable by the neighbourhood search.
    AllPrefixes,
}

#[allow(clippy::needless_range_loop)]
fn fill_table<C: SegmentCost>(
    cost_fn: &mut C,
    kind: ObjectiveKind,
    n: usize,
    h: usize,
    m_max: usize,
    mode: FillMode,
) -> Result<DpTable> {
    let mut cost = vec![vec![f64::NAN; n + 1]; m_max + 1];
    let mut back = vec![vec![UNSET; n + 1]; m_max + 1];

    // Row 0: single-segment prefixes.
    let row0_hi = match mode {
        FillMode::KnownM => n - m_max * h,
        FillMode::AllPrefixes => n,
    };
    for t in h..=row0_hi {
        cost[0][t] = cost_fn.cost(0, t)?;
    }

    for r in 1..=m_max {
        let (lo, hi) = match mode {
            FillMode::KnownM if r == m_max => (n, n),
            FillMode::KnownM => ((r + 1) * h, n - (m_max - r) * h),
            FillMode::AllPrefixes => ((r + 1) * h, n),
        };
        for t in lo..=hi {
            let mut best = f64::NAN;
            let mut arg = UNSET;
            for a in (r * h)..=(t - h) {
                let prev = cost[r - 1][a];
                debug_assert!(prev.is_finite(), "missing H1({},{a})", r - 1);
                let c = prev + cost_fn.cost(a, t)?;
                if arg == UNSET || kind.better(c, best) {
                    best = c;
                    arg = a;
                }
            }
            cost[r][t] = best;
            back[r][t] = arg;
        }
    }

    Ok(DpTable {
        kind,
        n_rows: n,
        h_idx: h,
        m_max,
        cost,
        back,
    })
}

fn prepare(
    series: &TimeSeries,
    basis: &BasisSet,
    m: usize,
    options: &DpOptions,
) -> Result<(PrefixStats, usize)> {
    let n = series.n_rows();
    let h = options.min_seg.resolve(n, basis.p())?;
    let required = (m + 1) * h;
    if n < required {
        return Err(Error::Infeasible {
            required,
            available: n,
        });
    }
    Ok((PrefixStats::new(series, basis), h))
}

/// Result of the known-m search.
#[derive(Debug, Clone)]
pub struct KnownMDetection {
    pub segmentation: Segmentation,
    pub total_cost: f64,
}

/// Finds the globally optimal locations of exactly `m >= 1` change points.
pub fn detect_known_m(
    series: &TimeSeries,
    basis: &BasisSet,
    m: usize,
    objective: Objective,
    options: &DpOptions,
) -> Result<KnownMDetection> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "detect_known_m needs m >= 1".to_owned(),
        ));
    }
    let (prefix, h) = prepare(series, basis, m, options)?;
    let n = series.n_rows();
    let mut cost = CachedCost::new(StatsCost::new(&prefix, objective), n, h, options.cache)?;
    let table = fill_table(&mut cost, objective.kind(), n, h, m, FillMode::KnownM)?;
    let total_cost = table
        .optimal_cost(m, n)
        .ok_or_else(|| Error::Numerical("dynamic program left no optimum".to_owned()))?;
    let segmentation = Segmentation::new(table.backtrack(m, n)?, n, h)?;
    Ok(KnownMDetection {
        segmentation,
        total_cost,
    })
}

/// Builds the full `H1` table for `r = 0..=m_max` over every admissible
/// prefix end, so the number of change points can be varied without
/// recomputation.
pub fn detect_known_m_all_prefixes(
    series: &TimeSeries,
    basis: &BasisSet,
    m_max: usize,
    objective: Objective,
    options: &DpOptions,
) -> Result<DpTable> {
    let (prefix, h) = prepare(series, basis, m_max, options)?;
    let n = series.n_rows();
    let mut cost = CachedCost::new(StatsCost::new(&prefix, objective), n, h, options.cache)?;
    fill_table(
        &mut cost,
        objective.kind(),
        n,
        h,
        m_max,
        FillMode::AllPrefixes,
    )
}
