//! Convex body specifications and closed-form intrinsic volumes.
//!
//! Canonical bodies:
//! - `Ball(n, r)`: V_j = C(n,j)·(ω_n/ω_{n−j})·r^j
//! - `Cube(n, A)` = `[0,A]^n`: V_j = C(n,j)·A^j
//! - `Crosspolytope(n, A)` = {x : Σ|x_i| ≤ An}:
//!   V_i = 2^{i+1}·C(n,i+1)·(√(i+1)/i!)·((nA)^i/√π)·I(n,i) for i < n, with
//!   inner integral I(n,i) = ∫_0^∞ e^{−x²}·erf(x/√(i+1))^{n−i−1} dx, and
//!   V_n = 2^n (nA)^n / n!
//!
//! Everything is computed in log-domain; see [`crate::sequence`].

use std::f64::consts::PI;
use std::sync::Arc;

use statrs::function::erf::erf;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::logdomain::{ln_binomial, ln_factorial, logsumexp};
use crate::quad::integrate;
use crate::sequence::IntrinsicVolumeSequence;

/// Relative tolerance for the crosspolytope inner integral.
const CROSSPOLYTOPE_QUAD_TOL: f64 = 1e-10;
/// The integrand e^{−x²}·erf(·)^k is below 1e−60 past x = 12.
const CROSSPOLYTOPE_QUAD_CUT: f64 = 12.0;

/// log ω_j, the log-volume of the j-dimensional unit ball:
/// ω_j = π^{j/2} / Γ(j/2 + 1), with ω_0 = 1.
pub fn log_unit_ball_volume(j: usize) -> f64 {
    let jf = j as f64;
    0.5 * jf * PI.ln() - ln_gamma(0.5 * jf + 1.0)
}

/// V_j(B_n(r)) in log-domain.
pub fn ball_intrinsic_volumes(dim: usize, radius: f64) -> Result<IntrinsicVolumeSequence> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ball radius must be > 0, got {radius}"
        )));
    }
    let log_wn = log_unit_ball_volume(dim);
    let logv = (0..=dim)
        .map(|j| {
            ln_binomial(dim, j) + log_wn - log_unit_ball_volume(dim - j) + j as f64 * radius.ln()
        })
        .collect();
    Ok(IntrinsicVolumeSequence::from_log(dim, logv))
}

/// V_j of the cube `[0,A]^n` in log-domain.
pub fn cube_intrinsic_volumes(dim: usize, side: f64) -> Result<IntrinsicVolumeSequence> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    if !(side > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cube side must be > 0, got {side}"
        )));
    }
    let logv = (0..=dim)
        .map(|j| ln_binomial(dim, j) + j as f64 * side.ln())
        .collect();
    Ok(IntrinsicVolumeSequence::from_log(dim, logv))
}

/// Inner integral of the crosspolytope formula,
/// I(n,i) = ∫_0^∞ e^{−x²}·erf(x/√(i+1))^{n−i−1} dx.
///
/// For i = 0 the substitution u = erf(x) gives the exact value √π/(2n),
/// which the tests use as an independent oracle.
pub fn crosspolytope_inner_integral(dim: usize, i: usize) -> Result<f64> {
    let k = (dim - i - 1) as i32;
    let root = ((i + 1) as f64).sqrt();
    let (value, _) = integrate(
        |x| (-x * x).exp() * erf(x / root).powi(k),
        0.0,
        CROSSPOLYTOPE_QUAD_CUT,
        CROSSPOLYTOPE_QUAD_TOL,
    )?;
    if !(value > 0.0) {
        return Err(Error::QuadratureNonConvergence {
            achieved: f64::INFINITY,
            target: CROSSPOLYTOPE_QUAD_TOL,
        });
    }
    Ok(value)
}

/// V_i({x : Σ|x_i| ≤ An}) in log-domain.
pub fn crosspolytope_intrinsic_volumes(dim: usize, scale: f64) -> Result<IntrinsicVolumeSequence> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "crosspolytope scale must be > 0, got {scale}"
        )));
    }
    let log_na = (dim as f64 * scale).ln();
    let mut logv = Vec::with_capacity(dim + 1);
    for i in 0..dim {
        let inner = crosspolytope_inner_integral(dim, i)?;
        let lv =
            (i as f64 + 1.0) * 2.0f64.ln() + ln_binomial(dim, i + 1) + 0.5 * ((i + 1) as f64).ln()
                - ln_factorial(i as f64)
                + i as f64 * log_na
                - 0.5 * PI.ln()
                + inner.ln();
        logv.push(lv);
    }
    logv.push(dim as f64 * 2.0f64.ln() + dim as f64 * log_na - ln_factorial(dim as f64));
    Ok(IntrinsicVolumeSequence::from_log(dim, logv))
}

/// Intrinsic volumes of a Cartesian product: convolution of the factors.
pub fn product_intrinsic_volumes(
    a: &IntrinsicVolumeSequence,
    b: &IntrinsicVolumeSequence,
) -> IntrinsicVolumeSequence {
    a.convolve(b)
}

/// Steiner's tube-volume polynomial |K ⊕ tB_n| = Σ_j V_{n−j}(K)·ω_j·t^j,
/// evaluated in log-domain and exponentiated.
pub fn steiner_volume(seq: &IntrinsicVolumeSequence, t: f64) -> f64 {
    assert!(t >= 0.0, "tube radius must be nonnegative");
    let n = seq.dim();
    let terms: Vec<f64> = (0..=n)
        .map(|j| {
            // t^0 = 1 even at t = 0 (0·ln 0 would be NaN).
            let power = if j == 0 { 0.0 } else { j as f64 * t.ln() };
            seq.log_v(n - j) + log_unit_ball_volume(j) + power
        })
        .collect();
    logsumexp(&terms).exp()
}

type MembershipFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
type DistanceFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A convex body given only through predicates: a membership test, a bounding
/// radius R with K ⊆ B(0, R), and a strictly interior point. An exact
/// point-to-body distance can be attached where the geometry is known
/// (polytopes, balls); otherwise distances fall back to bisection along the
/// ray to the interior point, which upper-bounds the true distance.
#[derive(Clone)]
pub struct OracleBody {
    dim: usize,
    contains: MembershipFn,
    bounding_radius: f64,
    interior_point: Vec<f64>,
    distance: Option<DistanceFn>,
}

impl std::fmt::Debug for OracleBody {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleBody")
            .field("dim", &self.dim)
            .field("bounding_radius", &self.bounding_radius)
            .field("interior_point", &self.interior_point)
            .field("exact_distance", &self.distance.is_some())
            .finish()
    }
}

impl OracleBody {
    pub fn new(
        dim: usize,
        contains: MembershipFn,
        bounding_radius: f64,
        interior_point: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(bounding_radius > 0.0) {
            return Err(Error::InvalidParameter(
                "bounding radius must be > 0".into(),
            ));
        }
        if interior_point.len() != dim {
            return Err(Error::InvalidParameter(
                "interior point has wrong dimension".into(),
            ));
        }
        if !contains(&interior_point) {
            return Err(Error::InvalidParameter(
                "membership predicate rejects the declared interior point".into(),
            ));
        }
        Ok(Self {
            dim,
            contains,
            bounding_radius,
            interior_point,
            distance: None,
        })
    }

    pub fn with_distance(mut self, distance: DistanceFn) -> Self {
        self.distance = Some(distance);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (self.contains)(x)
    }

    pub fn has_exact_distance(&self) -> bool {
        self.distance.is_some()
    }

    /// Distance from `x` to the body: 0 for members, the attached exact
    /// distance when present, else the ray-bisection upper bound.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            return 0.0;
        }
        if let Some(dist) = &self.distance {
            return dist(x);
        }
        // The segment from an exterior point to an interior point crosses the
        // boundary of a convex body exactly once, so membership is monotone
        // along it and bisection finds the crossing.
        let z = &self.interior_point;
        let mut lo = 0.0f64; // x side, outside
        let mut hi = 1.0f64; // z side, inside
        let mut p = vec![0.0; self.dim];
        for _ in 0..60 {
            let s = 0.5 * (lo + hi);
            for (pi, (&xi, &zi)) in p.iter_mut().zip(x.iter().zip(z.iter())) {
                *pi = xi + s * (zi - xi);
            }
            if self.contains(&p) {
                hi = s;
            } else {
                lo = s;
            }
        }
        let seg: f64 = x
            .iter()
            .zip(z.iter())
            .map(|(&xi, &zi)| (zi - xi) * (zi - xi))
            .sum();
        hi * seg.sqrt()
    }
}

/// Symbolic description of a convex body.
#[derive(Debug, Clone)]
pub enum ConvexBodySpec {
    Ball { dim: usize, radius: f64 },
    Cube { dim: usize, side: f64 },
    Crosspolytope { dim: usize, scale: f64 },
    Product(Box<ConvexBodySpec>, Box<ConvexBodySpec>),
    Oracle(OracleBody),
}

impl ConvexBodySpec {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("radius must be > 0".into()));
        }
        Ok(Self::Ball { dim, radius })
    }

    pub fn cube(dim: usize, side: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(side > 0.0) {
            return Err(Error::InvalidParameter("side must be > 0".into()));
        }
        Ok(Self::Cube { dim, side })
    }

    pub fn crosspolytope(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter("scale must be > 0".into()));
        }
        Ok(Self::Crosspolytope { dim, scale })
    }

    pub fn product(a: ConvexBodySpec, b: ConvexBodySpec) -> Self {
        Self::Product(Box::new(a), Box::new(b))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { dim, .. } | Self::Cube { dim, .. } | Self::Crosspolytope { dim, .. } => {
                *dim
            }
            Self::Product(a, b) => a.dim() + b.dim(),
            Self::Oracle(o) => o.dim(),
        }
    }

    /// Diameter of the body (used to scale default tube-radius grids).
    pub fn diameter(&self) -> f64 {
        match self {
            Self::Ball { radius, .. } => 2.0 * radius,
            Self::Cube { dim, side } => side * (*dim as f64).sqrt(),
            Self::Crosspolytope { dim, scale } => 2.0 * scale * *dim as f64,
            Self::Product(a, b) => a.diameter().hypot(b.diameter()),
            Self::Oracle(o) => 2.0 * o.bounding_radius(),
        }
    }

    /// Closed-form intrinsic volumes. Oracle bodies have none; estimate them
    /// with [`crate::steiner::steiner_fit`].
    pub fn intrinsic_volumes(&self) -> Result<IntrinsicVolumeSequence> {
        match self {
            Self::Ball { dim, radius } => ball_intrinsic_volumes(*dim, *radius),
            Self::Cube { dim, side } => cube_intrinsic_volumes(*dim, *side),
            Self::Crosspolytope { dim, scale } => crosspolytope_intrinsic_volumes(*dim, *scale),
            Self::Product(a, b) => Ok(product_intrinsic_volumes(
                &a.intrinsic_volumes()?,
                &b.intrinsic_volumes()?,
            )),
            Self::Oracle(_) => Err(Error::InvalidParameter(
                "oracle bodies have no closed-form intrinsic volumes".into(),
            )),
        }
    }

    /// Wrap a closed-form body as a membership oracle with an exact distance,
    /// so that Monte-Carlo estimates can be cross-checked against the closed
    /// forms through exactly the same sampling path as user oracles.
    pub fn to_oracle(&self) -> Result<OracleBody> {
        match self {
            Self::Ball { dim, radius } => {
                let r = *radius;
                let contains: MembershipFn = Arc::new(move |x: &[f64]| norm2(x) <= r);
                let distance: DistanceFn = Arc::new(move |x: &[f64]| (norm2(x) - r).max(0.0));
                Ok(OracleBody::new(*dim, contains, r, vec![0.0; *dim])?.with_distance(distance))
            }
            Self::Cube { dim, side } => {
                let a = *side;
                let contains: MembershipFn =
                    Arc::new(move |x: &[f64]| x.iter().all(|&xi| (0.0..=a).contains(&xi)));
                let distance: DistanceFn = Arc::new(move |x: &[f64]| {
                    x.iter()
                        .map(|&xi| {
                            let c = xi.clamp(0.0, a);
                            (xi - c) * (xi - c)
                        })
                        .sum::<f64>()
                        .sqrt()
                });
                let interior = vec![a / 2.0; *dim];
                Ok(
                    OracleBody::new(*dim, contains, a * (*dim as f64).sqrt(), interior)?
                        .with_distance(distance),
                )
            }
            Self::Crosspolytope { dim, scale } => {
                let r = scale * *dim as f64;
                let contains: MembershipFn =
                    Arc::new(move |x: &[f64]| x.iter().map(|xi| xi.abs()).sum::<f64>() <= r);
                let distance: DistanceFn = Arc::new(move |x: &[f64]| l1_ball_distance(x, r));
                Ok(OracleBody::new(*dim, contains, r, vec![0.0; *dim])?.with_distance(distance))
            }
            Self::Product(sa, sb) => {
                let oa = sa.to_oracle()?;
                let ob = sb.to_oracle()?;
                let split = oa.dim();
                let (ca, cb) = (oa.clone(), ob.clone());
                let contains: MembershipFn =
                    Arc::new(move |x: &[f64]| ca.contains(&x[..split]) && cb.contains(&x[split..]));
                // dist((x,y), K₁×K₂)² = dist(x,K₁)² + dist(y,K₂)²
                let (da, db) = (oa.clone(), ob.clone());
                let distance: DistanceFn = Arc::new(move |x: &[f64]| {
                    da.distance_to(&x[..split])
                        .hypot(db.distance_to(&x[split..]))
                });
                let mut interior = oa.interior_point.clone();
                interior.extend_from_slice(&ob.interior_point);
                let radius = oa.bounding_radius().hypot(ob.bounding_radius());
                Ok(
                    OracleBody::new(oa.dim() + ob.dim(), contains, radius, interior)?
                        .with_distance(distance),
                )
            }
            Self::Oracle(o) => Ok(o.clone()),
        }
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|&v| v * v).sum::<f64>().sqrt()
}

/// Euclidean distance from `x` to the ℓ1 ball {‖y‖₁ ≤ r}, via projection by
/// soft thresholding: y_i = sign(x_i)·max(|x_i| − λ, 0) with λ chosen so that
/// ‖y‖₁ = r.
pub fn l1_ball_distance(x: &[f64], r: f64) -> f64 {
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= r {
        return 0.0;
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // Find λ: among the k largest magnitudes, λ = (Σ_k mags − r)/k once
    // mags[k] ≤ λ (or all coordinates are active).
    let mut acc = 0.0;
    let mut lambda = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        acc += m;
        let cand = (acc - r) / (k as f64 + 1.0);
        if k + 1 == mags.len() || cand >= mags[k + 1] {
            lambda = cand;
            break;
        }
    }
    x.iter()
        .map(|&xi| {
            let shrunk = (xi.abs() - lambda).max(0.0);
            let d = xi.abs() - shrunk;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}
