use thiserror::Error;

/// Errors produced by simulation, estimation and detection.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("empty or reversed row range [{a}, {b})")]
    EmptySegment { a: usize, b: usize },

    #[error(
        "singular statistics on segment rows [{a}, {b}): the Q matrix is not positive definite"
    )]
    SingularStatistics { a: usize, b: usize },

    #[error("basis has {basis_p} functions but drift parameters have dimension {param_p}")]
    DimensionMismatch { basis_p: usize, param_p: usize },

    #[error("infeasible configuration: needs at least {required} rows, series has {available}")]
    Infeasible { required: usize, available: usize },

    #[error("basis construction check failed: {0}")]
    BasisCheck(String),

    #[error(
        "log-likelihood identity violated on rows [{a}, {b}): riemann form {riemann} vs SSE form {identity}"
    )]
    LikelihoodIdentity {
        a: usize,
        b: usize,
        riemann: f64,
        identity: f64,
    },

    #[error(
        "exhaustive enumeration refused: n={n}, m={m} exceeds the cap (n <= {max_n}, m <= {max_m})"
    )]
    EnumerationCap {
        n: usize,
        m: usize,
        max_n: usize,
        max_m: usize,
    },

    #[error("{failed} of {total} Monte-Carlo iterations failed (more than 1% tolerated)")]
    TooManyFailures { failed: usize, total: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
