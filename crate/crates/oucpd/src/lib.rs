//! Offline change-point detection for generalised Ornstein-Uhlenbeck
//! processes.
//!
//! The model is `dX = (L(t) - a X) dt + sigma dW` where the level
//! `L(t) = sum_k mu_k phi_k(t)` is a weighted sum of periodic, orthogonal
//! basis functions and the drift parameters `(mu, a)` switch at unknown
//! change points. This crate provides:
//!
//! - [`basis`]: the basis sets and their construction-time checks;
//! - [`sim`]: Euler-Maruyama simulation of regime-switching scenarios;
//! - [`stats`]: per-segment sufficient statistics, drift MLEs, SSE,
//!   Riemann-sum log-likelihood and realized volatility;
//! - [`detect`]: exact dynamic programming for a known number of change
//!   points, segment-neighbourhood search and a modified PELT with a
//!   Schwarz information criterion for an unknown number;
//! - [`oracle`]: brute-force references used by the test suite;
//! - [`montecarlo`]: the repeated simulate-detect experiment harness.

pub mod basis;
pub mod detect;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod series;
pub mod sim;
pub mod stats;

pub use basis::{BasisSet, ConstructionCheck};
pub use detect::{
    CachePolicy, CandidateAdmission, DpOptions, DpTable, IcEntry, KnownMDetection, MinSegLen,
    Objective, ObjectiveKind, PeltDetection, PeltOptions, PenaltyKind, PruningStats, Segmentation,
    SnsDetection, SnsOptions, detect_known_m, detect_known_m_all_prefixes, detect_pelt,
    detect_unknown_m_sns,
};
pub use error::{Error, Result};
pub use montecarlo::{
    ChangePointSummary, CountAlgorithm, CountExperiment, McCountSummary, McRateSummary,
    RateExperiment, run_count_experiment, run_rate_experiment,
};
pub use series::TimeSeries;
pub use sim::{DriftParams, RegimeScenario, simulate};
pub use stats::{
    DesignRow, PrefixStats, SegmentFit, SegmentStatistics, accumulate, design_row, fit_segments,
    realized_volatility, segment_loglik, segment_mle, segment_sse,
};
