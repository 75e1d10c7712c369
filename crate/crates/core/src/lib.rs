//! Numerical laboratory for intrinsic volumes of convex bodies and the
//! intrinsic entropy curves of log-concave distributions.
//!
//! The pipeline: a log-concave density X defines one-sided typical sets
//! 𝒯^ε_n ⊂ ℝⁿ; their intrinsic volume sequences {μ^ε_n} are
//! super-convolutive, so the normalized log generating functions g_n(t)
//! converge to a limit Λ^ε with convex conjugate supported on `[0,1]`; the
//! negated conjugate, followed by the ε → 0 limit, is the intrinsic entropy
//! curve h_X(θ) with h_X(0) = 0 and h_X(1) = h(X).
//!
//! Modules:
//! - [`bodies`]: closed-form intrinsic volumes (ball/cube/crosspolytope,
//!   products), Steiner tube polynomial, membership oracles.
//! - [`sampling`] / [`steiner`]: Monte-Carlo tube volumes and the
//!   nonnegative-least-squares Steiner fit for oracle bodies.
//! - [`superconv`]: super-convolutive families, Fekete limits, numerical
//!   Legendre–Fenchel conjugates, rate curves, interval-mass bounds.
//! - [`logconcave`]: densities, typical sets, linear minorants, the
//!   containing crosspolytope, projection bounds, the bloating check.
//! - [`curve`]: the h_X(θ) closed forms, the ε-ladder pipeline, endpoint
//!   checks, and the entropy-power-inequality conjecture evidence.
//! - [`suites`]: the property suites behind `verify`.
//!
//! All logarithms are natural; all sequence arithmetic is log-domain.

pub mod bodies;
pub mod curve;
pub mod error;
pub mod logconcave;
pub mod logdomain;
pub mod nnls;
pub mod quad;
pub mod rng;
pub mod sampling;
pub mod sequence;
pub mod steiner;
pub mod suites;
pub mod superconv;

pub use bodies::{
    ball_intrinsic_volumes, crosspolytope_intrinsic_volumes, cube_intrinsic_volumes,
    log_unit_ball_volume, product_intrinsic_volumes, steiner_volume, ConvexBodySpec, OracleBody,
};
pub use curve::{
    concavity_diagnostics, endpoint_checks, epi_conjecture_check, estimate_curve, gaussian_h_theta,
    uniform_h_theta, CurveOptions, IntrinsicEntropyCurve,
};
pub use error::{Error, Result};
pub use logconcave::{
    bloat_check, crosspolytope_bound, linear_minorant, loomis_whitney_check,
    projection_volume_bound, typical_family, LogConcaveDensity, LwMethod, TypicalSetSpec,
};
pub use logdomain::binary_entropy;
pub use sampling::mc_tube_volume;
pub use sequence::IntrinsicVolumeSequence;
pub use steiner::{chebyshev_radii, steiner_fit, SteinerFitReport};
pub use superconv::{
    legendre_conjugate, LambdaEstimate, Provenance, RateCurve, RateMode, SuperConvFamily,
};
