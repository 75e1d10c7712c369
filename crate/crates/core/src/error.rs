use thiserror::Error;

/// Errors surfaced by the numerical operations in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be >= 1 (got {0})")]
    InvalidDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "quadrature did not converge: achieved relative error {achieved:.3e}, target {target:.3e}"
    )]
    QuadratureNonConvergence { achieved: f64, target: f64 },

    #[error("degenerate Monte-Carlo estimate: zero hits out of {samples} samples")]
    DegenerateEstimate { samples: u64 },

    #[error("design matrix is rank deficient (condition number {cond:.3e})")]
    RankDeficient { cond: f64 },

    #[error("conjugate maximizer escaped the search bracket after {widenings} widenings")]
    BracketViolation { widenings: u32 },

    #[error("linear minorant certificate failed after {halvings} slope halvings")]
    MinorantCertificate { halvings: u32 },

    #[error("operation requires a non-uniform density")]
    UniformRejected,

    #[error("unsupported family pair: {0}")]
    UnsupportedFamilyPair(String),

    #[error("entropy integral diverged: {0}")]
    DivergentIntegral(String),
}

pub type Result<T> = std::result::Result<T, Error>;
