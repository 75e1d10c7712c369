//! Log-concave densities p(x) = e^{−Φ(x)} and their one-sided typical sets
//! 𝒯^ε_n = {x ∈ ℝⁿ : Σ Φ(x_i) ≤ n(h(X)+ε)}.
//!
//! Typical sets of log-concave densities are compact convex level sets, so
//! they have intrinsic volumes; for the Gaussian and uniform families they
//! are balls and cubes with closed forms, and everything else is handled
//! through membership oracles plus a crosspolytope {Σ|x_i| ≤ An} that
//! provably contains 𝒯^ε_n once Φ(x) ≥ c₁|x| + c₂ is certified.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bodies::{l1_ball_distance, ConvexBodySpec, OracleBody};
use crate::error::{Error, Result};
use crate::logdomain::ln_binomial;
use crate::quad::integrate;
use crate::rng::stream_rng;
use crate::steiner::{chebyshev_radii, steiner_fit};
use crate::superconv::{Provenance, SuperConvFamily};

type PhiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Built-in families plus user-supplied potentials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DensityFamily {
    Gaussian { nu: f64 },
    Uniform { side: f64 },
    Laplace { b: f64 },
    Exponential { lambda: f64 },
    Custom { label: String },
}

/// A log-concave density, described by its convex potential Φ (extended-real,
/// +∞ outside the support), the support interval, the minimum η = min Φ and
/// a minimizer, the differential entropy h(X), and a length scale.
#[derive(Clone)]
pub struct LogConcaveDensity {
    family: DensityFamily,
    phi: PhiFn,
    support: (f64, f64),
    eta: f64,
    argmin: f64,
    entropy: f64,
    scale: f64,
}

impl std::fmt::Debug for LogConcaveDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LogConcaveDensity")
            .field("family", &self.family)
            .field("support", &self.support)
            .field("eta", &self.eta)
            .field("argmin", &self.argmin)
            .field("entropy", &self.entropy)
            .field("scale", &self.scale)
            .finish()
    }
}

impl LogConcaveDensity {
    /// N(0, ν): Φ(x) = x²/2ν + ½ log 2πν, h = ½ log 2πeν.
    pub fn gaussian(nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "variance must be > 0, got {nu}"
            )));
        }
        let norm = 0.5 * (2.0 * std::f64::consts::PI * nu).ln();
        Ok(Self {
            family: DensityFamily::Gaussian { nu },
            phi: Arc::new(move |x| x * x / (2.0 * nu) + norm),
            support: (f64::NEG_INFINITY, f64::INFINITY),
            eta: norm,
            argmin: 0.0,
            entropy: norm + 0.5,
            scale: nu.sqrt(),
        })
    }

    /// Uniform on `[0, A]`: Φ = log A on the support, h = η = log A.
    pub fn uniform(side: f64) -> Result<Self> {
        if !(side > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "side must be > 0, got {side}"
            )));
        }
        let la = side.ln();
        Ok(Self {
            family: DensityFamily::Uniform { side },
            phi: Arc::new(move |x| {
                if (0.0..=side).contains(&x) {
                    la
                } else {
                    f64::INFINITY
                }
            }),
            support: (0.0, side),
            eta: la,
            // Φ is flat; any minimizer works and ties break to the midpoint.
            argmin: side / 2.0,
            entropy: la,
            scale: side,
        })
    }

    /// Laplace(b): Φ(x) = |x|/b + log 2b, h = 1 + log 2b.
    pub fn laplace(b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must be > 0, got {b}"
            )));
        }
        let norm = (2.0 * b).ln();
        Ok(Self {
            family: DensityFamily::Laplace { b },
            phi: Arc::new(move |x| x.abs() / b + norm),
            support: (f64::NEG_INFINITY, f64::INFINITY),
            eta: norm,
            argmin: 0.0,
            entropy: 1.0 + norm,
            scale: b,
        })
    }

    /// Exp(λ) on [0, ∞): Φ(x) = λx − log λ, h = 1 − log λ.
    pub fn exponential(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rate must be > 0, got {lambda}"
            )));
        }
        Ok(Self {
            family: DensityFamily::Exponential { lambda },
            phi: Arc::new(move |x| {
                if x >= 0.0 {
                    lambda * x - lambda.ln()
                } else {
                    f64::INFINITY
                }
            }),
            support: (0.0, f64::INFINITY),
            eta: -lambda.ln(),
            argmin: 0.0,
            entropy: 1.0 - lambda.ln(),
            scale: 1.0 / lambda,
        })
    }

    /// A user-supplied potential on a declared support. Convexity is
    /// spot-checked by midpoint tests on random pairs, normalization
    /// ∫e^{−Φ} = 1 is verified by quadrature to 1e−8, and the entropy is
    /// computed as E[Φ(X)] with a minorant-certified tail cutoff.
    pub fn custom<F>(label: &str, phi: F, support: (f64, f64), scale: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter("scale must be > 0".into()));
        }
        if !(support.0 < support.1) {
            return Err(Error::InvalidParameter(
                "support must be a nondegenerate interval".into(),
            ));
        }
        let (lo, hi) = support;
        let raw = Arc::new(phi);
        let inner = raw.clone();
        let wrapped: PhiFn = Arc::new(move |x| {
            if x < lo || x > hi {
                f64::INFINITY
            } else {
                inner(x)
            }
        });

        let mut d = Self {
            family: DensityFamily::Custom {
                label: label.to_string(),
            },
            phi: wrapped,
            support,
            eta: 0.0,
            argmin: 0.0,
            entropy: 0.0,
            scale,
        };
        d.convexity_spot_check(2000, 0xC0FFEE)?;
        let (argmin, eta) = d.locate_minimum();
        d.argmin = argmin;
        d.eta = eta;

        let z = d.normalization_integral()?;
        if (z - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "density is not normalized: ∫e^(-Φ) = {z:.12} (shift Φ by ln Z or use normalized())"
            )));
        }
        d.entropy = d.entropy_by_quadrature()?;
        Ok(d)
    }

    /// Piecewise-linear potential from tabulated (x, Φ(x)) pairs plus declared
    /// tail slopes beyond the table. Slopes must be nondecreasing overall.
    pub fn custom_from_table(
        label: &str,
        points: &[(f64, f64)],
        tail_slopes: (f64, f64),
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(
                "need at least two table points".into(),
            ));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidParameter(
                "table x values must be strictly increasing".into(),
            ));
        }
        let (sl, sr) = tail_slopes;
        if !(sl < 0.0 && sr > 0.0) {
            return Err(Error::InvalidParameter(
                "tail slopes must be negative on the left and positive on the right".into(),
            ));
        }
        let mut slopes = vec![sl];
        for w in points.windows(2) {
            slopes.push((w[1].1 - w[0].1) / (w[1].0 - w[0].0));
        }
        slopes.push(sr);
        if slopes.windows(2).any(|w| w[0] > w[1] + 1e-12) {
            return Err(Error::InvalidParameter(
                "tabulated Φ is not convex (segment slopes must be nondecreasing)".into(),
            ));
        }
        let table: Vec<(f64, f64)> = points.to_vec();
        let span = table.last().unwrap().0 - table[0].0;
        let scale = (span / 2.0).max(1e-3);
        let phi = move |x: f64| -> f64 {
            let (x0, p0) = table[0];
            let (x1, p1) = *table.last().unwrap();
            if x < x0 {
                return p0 + sl * (x - x0);
            }
            if x > x1 {
                return p1 + sr * (x - x1);
            }
            let idx = table
                .partition_point(|&(xi, _)| xi <= x)
                .min(table.len() - 1);
            let (xa, pa) = table[idx - 1];
            let (xb, pb) = table[idx];
            pa + (pb - pa) * (x - xa) / (xb - xa)
        };
        Self::custom(label, phi, (f64::NEG_INFINITY, f64::INFINITY), scale)
    }

    /// Shift Φ by log ∫e^{−Φ} so the density integrates to one, then rebuild.
    pub fn normalized(self) -> Result<Self> {
        let z = self.normalization_integral()?;
        let log_z = z.ln();
        let inner = self.phi.clone();
        let label = match &self.family {
            DensityFamily::Custom { label } => label.clone(),
            _ => return Ok(self), // built-ins are already normalized
        };
        Self::custom(&label, move |x| inner(x) + log_z, self.support, self.scale)
    }

    pub fn family(&self) -> &DensityFamily {
        &self.family
    }

    /// Φ(x), +∞ outside the support.
    pub fn phi(&self, x: f64) -> f64 {
        (self.phi)(x)
    }

    /// Differential entropy h(X) (closed form for built-ins, quadrature for
    /// custom potentials).
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    /// η = min_x Φ(x) = −log max p.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn argmin(&self) -> f64 {
        self.argmin
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// h(X) = η exactly characterizes the uniform family.
    pub fn is_uniform(&self) -> bool {
        matches!(self.family, DensityFamily::Uniform { .. }) || (self.entropy - self.eta) <= 1e-12
    }

    /// A point strictly inside the support with Φ within a hair of η; ray
    /// searches start here.
    pub fn interior_anchor(&self) -> f64 {
        let (lo, hi) = self.support;
        let width = hi - lo;
        let nudge = if width.is_finite() {
            (self.scale * 1e-6).min(width * 1e-3)
        } else {
            self.scale * 1e-6
        };
        self.argmin.clamp(
            if lo.is_finite() {
                lo + nudge
            } else {
                f64::NEG_INFINITY
            },
            if hi.is_finite() {
                hi - nudge
            } else {
                f64::INFINITY
            },
        )
    }

    /// h(X) = E[Φ(X)] by adaptive quadrature over the region where
    /// e^{−Φ} ≥ 1e−16; the linear minorant certifies the discarded tail mass
    /// is below 1e−12.
    pub fn entropy_by_quadrature(&self) -> Result<f64> {
        let (lo, hi) = self.integration_window()?;
        let phi = self.phi.clone();
        let (value, _) = integrate(
            |x| {
                let p = phi(x);
                if p.is_finite() {
                    p * (-p).exp()
                } else {
                    0.0
                }
            },
            lo,
            hi,
            1e-10,
        )?;
        if !value.is_finite() {
            return Err(Error::DivergentIntegral("E[Φ(X)] is not finite".into()));
        }
        Ok(value)
    }

    /// ∫ e^{−Φ} over the same certified window.
    pub fn normalization_integral(&self) -> Result<f64> {
        let (lo, hi) = self.integration_window()?;
        let phi = self.phi.clone();
        let (value, _) = integrate(
            |x| {
                let p = phi(x);
                if p.is_finite() {
                    (-p).exp()
                } else {
                    0.0
                }
            },
            lo,
            hi,
            1e-10,
        )?;
        Ok(value)
    }

    // Truncation points where the minorant guarantees e^{−Φ} < 1e−16 and the
    // remaining tail integrals are < 1e−12.
    fn integration_window(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.support;
        if lo.is_finite() && hi.is_finite() {
            return Ok((lo, hi));
        }
        let (c1, c2) = linear_minorant(self)?;
        // c₁|x| + c₂ ≥ 40 makes both e^{−Φ} and the ∫(c₁x+c₂+1)e^{−(c₁x+c₂)}
        // tail bound comfortably below the targets.
        let cut = (40.0 - c2) / c1;
        let a = self.argmin;
        Ok((
            lo.max(-cut.max(a.abs() + 1.0)),
            hi.min(cut.max(a.abs() + 1.0)),
        ))
    }

    // Midpoint convexity on random pairs inside an effective window.
    fn convexity_spot_check(&self, trials: u32, seed: u64) -> Result<()> {
        let (lo, hi) = self.support;
        let a = if lo.is_finite() {
            lo
        } else {
            self.argmin - 50.0 * self.scale
        };
        let b = if hi.is_finite() {
            hi
        } else {
            self.argmin + 50.0 * self.scale
        };
        let mut rng = stream_rng(seed, 0);
        for _ in 0..trials {
            let x = a + (b - a) * rng.gen::<f64>();
            let y = a + (b - a) * rng.gen::<f64>();
            let (px, py, pm) = (self.phi(x), self.phi(y), self.phi(0.5 * (x + y)));
            if !px.is_finite() || !py.is_finite() {
                continue;
            }
            if pm > 0.5 * (px + py) + 1e-9 * (1.0 + px.abs() + py.abs()) {
                return Err(Error::InvalidParameter(format!(
                    "midpoint convexity violated between x={x} and y={y}"
                )));
            }
        }
        Ok(())
    }

    // Golden-section minimization of Φ over (a clipped window of) the support;
    // ties break toward the support midpoint.
    fn locate_minimum(&self) -> (f64, f64) {
        let (lo, hi) = self.support;
        let a = if lo.is_finite() {
            lo
        } else {
            -1e6 * self.scale
        };
        let b = if hi.is_finite() { hi } else { 1e6 * self.scale };
        let inv = 0.618_033_988_749_894_9;
        let (mut lo_s, mut hi_s) = (a, b);
        let mut x1 = hi_s - inv * (hi_s - lo_s);
        let mut x2 = lo_s + inv * (hi_s - lo_s);
        let (mut f1, mut f2) = (self.phi(x1), self.phi(x2));
        for _ in 0..200 {
            if hi_s - lo_s < 1e-12 * (1.0 + lo_s.abs().max(hi_s.abs())) {
                break;
            }
            if f1 <= f2 {
                hi_s = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi_s - inv * (hi_s - lo_s);
                f1 = self.phi(x1);
            } else {
                lo_s = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo_s + inv * (hi_s - lo_s);
                f2 = self.phi(x2);
            }
        }
        let x = 0.5 * (lo_s + hi_s);
        let fx = self.phi(x);
        if lo.is_finite() && hi.is_finite() {
            let mid = 0.5 * (lo + hi);
            if self.phi(mid) <= fx + 1e-12 * (1.0 + fx.abs()) {
                return (mid, self.phi(mid));
            }
        }
        (x, fx)
    }
}

/// The one-sided typical set 𝒯^ε_n of a density.
#[derive(Debug, Clone)]
pub struct TypicalSetSpec {
    pub density: LogConcaveDensity,
    pub n: usize,
    pub eps: f64,
    /// n·(h(X)+ε).
    pub threshold: f64,
}

impl TypicalSetSpec {
    pub fn new(density: LogConcaveDensity, n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be > 0".into()));
        }
        let threshold = n as f64 * (density.entropy() + eps);
        Ok(Self {
            density,
            n,
            eps,
            threshold,
        })
    }

    /// Membership: Σ Φ(x_i) ≤ n(h+ε).
    pub fn contains(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.n);
        let mut acc = 0.0;
        for &xi in x {
            acc += self.density.phi(xi);
            if acc > self.threshold {
                return false;
            }
        }
        acc <= self.threshold
    }

    /// The typical set as a body: a ball for Gaussian, a cube for uniform,
    /// and a membership oracle otherwise. The Laplace oracle carries the
    /// exact distance to its ℓ1-ball level set; generic oracles get their
    /// bounding radius from the crosspolytope containment.
    pub fn body(&self) -> Result<ConvexBodySpec> {
        let n = self.n;
        match *self.density.family() {
            DensityFamily::Gaussian { nu } => {
                ConvexBodySpec::ball(n, (n as f64 * nu * (1.0 + 2.0 * self.eps)).sqrt())
            }
            DensityFamily::Uniform { side } => ConvexBodySpec::cube(n, side),
            DensityFamily::Laplace { b } => {
                // Σ(|x|/b + log 2b) ≤ n(h+ε) ⟺ ‖x‖₁ ≤ n·b·(1+ε).
                let r1 = n as f64 * b * (1.0 + self.eps);
                let spec = self.clone();
                let contains = Arc::new(move |x: &[f64]| spec.contains(x));
                let oracle = OracleBody::new(n, contains, r1, vec![0.0; n])?
                    .with_distance(Arc::new(move |x: &[f64]| l1_ball_distance(x, r1)));
                Ok(ConvexBodySpec::Oracle(oracle))
            }
            _ => {
                let (body, _) = crosspolytope_bound(self)?;
                let radius = match body {
                    ConvexBodySpec::Crosspolytope { scale, .. } => scale * n as f64,
                    _ => unreachable!(),
                };
                let anchor = self.density.interior_anchor();
                let spec = self.clone();
                let contains = Arc::new(move |x: &[f64]| spec.contains(x));
                Ok(ConvexBodySpec::Oracle(OracleBody::new(
                    n,
                    contains,
                    radius,
                    vec![anchor; n],
                )?))
            }
        }
    }
}

/// Constants (c₁ > 0, c₂) with Φ(x) ≥ c₁|x| + c₂ everywhere.
///
/// c₁ starts at half the smaller secant slope of Φ measured at 10·scale and
/// 100·scale from the minimizer (1 for compactly supported densities); c₂ is
/// the exact infimum of Φ(x) − c₁|x|. The pair is certified on a dense grid,
/// at random points, and by edge-slope checks that extend the certificate to
/// the tails; certification failure halves c₁ and retries.
pub fn linear_minorant(d: &LogConcaveDensity) -> Result<(f64, f64)> {
    let (lo, hi) = d.support();
    let x_star = d.argmin();
    let scale = d.scale();

    let mut slope_candidates = Vec::new();
    if hi.is_infinite() {
        for r in [10.0 * scale, 100.0 * scale] {
            slope_candidates.push((d.phi(x_star + r) - d.phi(x_star + r / 2.0)) / (r / 2.0));
        }
    }
    if lo.is_infinite() {
        for r in [10.0 * scale, 100.0 * scale] {
            slope_candidates.push((d.phi(x_star - r) - d.phi(x_star - r / 2.0)) / (r / 2.0));
        }
    }
    let mut c1 = match slope_candidates
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
    {
        s if s.is_finite() && s > 0.0 => 0.5 * s,
        _ => 1.0, // compact support: any positive slope admits a minorant
    };

    for halvings in 0..=20u32 {
        let c2 = minorant_offset(d, c1);
        if c2.is_finite() && certify_minorant(d, c1, c2) {
            return Ok((c1, c2));
        }
        c1 *= 0.5;
        let _ = halvings;
    }
    Err(Error::MinorantCertificate { halvings: 20 })
}

// inf_x (Φ(x) − c₁|x|): convex on each half-line, minimized piecewise.
fn minorant_offset(d: &LogConcaveDensity, c1: f64) -> f64 {
    let (lo, hi) = d.support();
    let reach = d.argmin().abs() + 1000.0 * d.scale();
    let mut best = f64::INFINITY;
    let pos = (lo.max(0.0), hi.min(reach));
    if pos.0 <= pos.1 {
        best = best.min(golden_min(|x| d.phi(x) - c1 * x, pos.0, pos.1));
    }
    let neg = (lo.max(-reach), hi.min(0.0));
    if neg.0 <= neg.1 {
        best = best.min(golden_min(|x| d.phi(x) + c1 * x, neg.0, neg.1));
    }
    best
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let inv = 0.618_033_988_749_894_9;
    if lo == hi {
        return f(lo);
    }
    let mut x1 = hi - inv * (hi - lo);
    let mut x2 = lo + inv * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-11 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

fn certify_minorant(d: &LogConcaveDensity, c1: f64, c2: f64) -> bool {
    let (lo, hi) = d.support();
    let x_star = d.argmin();
    let scale = d.scale();
    let glo = lo.max((x_star - 200.0 * scale).min(-scale));
    let ghi = hi.min((x_star + 200.0 * scale).max(scale));
    let tol = 1e-9 * (1.0 + c2.abs());

    let holds_at = |x: f64| {
        let p = d.phi(x);
        !p.is_finite() || p >= c1 * x.abs() + c2 - tol
    };

    let grid_n = 4001;
    for i in 0..grid_n {
        let x = glo + (ghi - glo) * i as f64 / (grid_n - 1) as f64;
        if !holds_at(x) {
            return false;
        }
    }
    let mut rng = stream_rng(0xD1CE, 1);
    for _ in 0..512 {
        if !holds_at(glo + (ghi - glo) * rng.gen::<f64>()) {
            return false;
        }
    }
    // Tail extension: if Φ climbs at least as fast as the minorant at the
    // window edge, convexity carries the inequality to the whole tail.
    let delta = 0.01 * scale;
    if hi.is_infinite() {
        let edge_slope = (d.phi(ghi) - d.phi(ghi - delta)) / delta;
        if edge_slope < c1 {
            return false;
        }
    }
    if lo.is_infinite() {
        let edge_slope = (d.phi(glo) - d.phi(glo + delta)) / delta;
        if edge_slope < c1 {
            return false;
        }
    }
    true
}

/// The containing crosspolytope 𝒞_n = {x : Σ|x_i| ≤ An} with
/// A = (h(X)+ε−c₂)/c₁, together with the minorant that certifies
/// 𝒯^ε_n ⊆ 𝒞_n.
pub fn crosspolytope_bound(spec: &TypicalSetSpec) -> Result<(ConvexBodySpec, (f64, f64))> {
    let (c1, c2) = linear_minorant(&spec.density)?;
    let a = (spec.density.entropy() + spec.eps - c2) / c1;
    Ok((ConvexBodySpec::crosspolytope(spec.n, a)?, (c1, c2)))
}

/// Sample points of 𝒯^ε_n and verify each satisfies the ℓ1 bound of its
/// containing crosspolytope. Returns the failure count (expected 0).
pub fn crosspolytope_containment_failures(
    spec: &TypicalSetSpec,
    trials: u32,
    seed: u64,
) -> Result<u32> {
    let (body, _) = crosspolytope_bound(spec)?;
    let r1 = match body {
        ConvexBodySpec::Crosspolytope { scale, .. } => scale * spec.n as f64,
        _ => unreachable!(),
    };
    let mut rng = stream_rng(seed, 2);
    let mut failures = 0;
    for _ in 0..trials {
        let x = sample_typical_point(spec, &mut rng);
        if x.iter().map(|v| v.abs()).sum::<f64>() > r1 + 1e-9 {
            failures += 1;
        }
    }
    Ok(failures)
}

/// log of the §-projection bound: |𝒯^ε_n restricted to m coordinates| ≤
/// e^{n(h+ε) − (n−m)η}.
pub fn projection_volume_bound(spec: &TypicalSetSpec, m: usize) -> f64 {
    assert!(m <= spec.n, "projection dimension exceeds n");
    spec.threshold - (spec.n - m) as f64 * spec.density.eta()
}

/// How V_m(𝒯^ε_n) is obtained for the Loomis–Whitney comparison.
#[derive(Debug, Clone)]
pub enum LwMethod {
    /// Closed-form typical body (Gaussian or uniform families).
    ClosedForm,
    /// Steiner fit of the membership oracle (any family, small n).
    SteinerFit { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct LoomisWhitneyReport {
    pub m: usize,
    pub log_vm: f64,
    /// log C(n,m) + [n(h+ε) − (n−m)η].
    pub log_bound: f64,
    /// log_bound − log_vm; the inequality asks for ≥ 0.
    pub margin: f64,
    /// Relative (log-domain) standard error of V_m when Monte-Carlo was used.
    pub stderr_log: Option<f64>,
}

/// Check V_m(𝒯^ε_n) ≤ C(n,m)·|projection| via the projection volume bound.
pub fn loomis_whitney_check(
    spec: &TypicalSetSpec,
    m: usize,
    method: LwMethod,
) -> Result<LoomisWhitneyReport> {
    if m > spec.n {
        return Err(Error::InvalidParameter("m must be at most n".into()));
    }
    let log_bound = ln_binomial(spec.n, m) + projection_volume_bound(spec, m);
    let (log_vm, stderr_log) = match method {
        LwMethod::ClosedForm => (spec.body()?.intrinsic_volumes()?.log_v(m), None),
        LwMethod::SteinerFit { samples, seed } => {
            let oracle = spec.body()?.to_oracle()?;
            let t_grid = chebyshev_radii(2.0 * oracle.bounding_radius(), spec.n + 3);
            let fit = steiner_fit(&oracle, &t_grid, samples, seed)?;
            let lv = fit.estimates.log_v(m);
            let rel = fit.stderrs[m] / lv.exp();
            (lv, Some(rel))
        }
    };
    Ok(LoomisWhitneyReport {
        m,
        log_vm,
        log_bound,
        margin: log_bound - log_vm,
        stderr_log,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BloatReport {
    pub alpha: f64,
    pub trials: u32,
    pub failures: u32,
}

/// The bloating check behind the alternate-typical-set theorem: boundary
/// points of the lower set {ΣΦ ≤ n(h−ε)}, scaled by (1+α) about the
/// minimizer with α = 2ε/(h−ε−η), must leave the upper set
/// {ΣΦ ≤ n(h+ε)}. Uniform densities are rejected (their lower sets are
/// empty).
pub fn bloat_check(
    density: &LogConcaveDensity,
    eps: f64,
    n: usize,
    trials: u32,
    seed: u64,
) -> Result<BloatReport> {
    if density.is_uniform() {
        return Err(Error::UniformRejected);
    }
    let h = density.entropy();
    let eta = density.eta();
    if !(eps > 0.0 && eps < h - eta) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eps < h - η = {}",
            h - eta
        )));
    }
    let alpha = 2.0 * eps / (h - eps - eta);
    let lower = n as f64 * (h - eps);
    let upper = n as f64 * (h + eps);
    let x_star = density.argmin();
    let anchor = density.interior_anchor();
    let tol = 1e-6 * (1.0 + upper.abs());

    let mut rng = stream_rng(seed, 3);
    let mut failures = 0;
    let mut x = vec![0.0; n];
    for _ in 0..trials {
        let dir = random_unit_vector(n, &mut rng);
        let boundary = ray_boundary(density, anchor, &dir, lower);
        for (xi, di) in x.iter_mut().zip(&dir) {
            *xi = anchor + boundary * di;
        }
        let scaled_sum: f64 = x
            .iter()
            .map(|&xi| density.phi(x_star + (1.0 + alpha) * (xi - x_star)))
            .sum();
        if scaled_sum < upper - tol {
            failures += 1;
        }
    }
    Ok(BloatReport {
        alpha,
        trials,
        failures,
    })
}

/// Draw a point of 𝒯^ε_n: pick a random direction from the anchor diagonal,
/// find where the ray crosses the level set, and step a uniform fraction of
/// the way. Convexity keeps every returned point inside the set; the sampler
/// is a coverage device for containment tests, not a uniform sampler.
pub fn sample_typical_point(spec: &TypicalSetSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let anchor = spec.density.interior_anchor();
    let dir = random_unit_vector(spec.n, rng);
    let s = ray_boundary(&spec.density, anchor, &dir, spec.threshold);
    let u = rng.gen::<f64>();
    dir.iter().map(|&di| anchor + u * s * di).collect()
}

// Largest s with Σ Φ(anchor + s·d_i) ≤ threshold along the ray, to ~1e-14
// relative. The sum is convex in s and below threshold at s = 0.
fn ray_boundary(density: &LogConcaveDensity, anchor: f64, dir: &[f64], threshold: f64) -> f64 {
    let value = |s: f64| -> f64 {
        let mut acc = 0.0;
        for &di in dir {
            acc += density.phi(anchor + s * di);
            if !acc.is_finite() {
                return f64::INFINITY;
            }
        }
        acc
    };
    debug_assert!(value(0.0) <= threshold);
    let mut s_in = 0.0f64;
    let mut s_out = density.scale().max(1e-6);
    let mut expansions = 0;
    while value(s_out) <= threshold {
        s_in = s_out;
        s_out *= 2.0;
        expansions += 1;
        assert!(
            expansions < 600,
            "level set appears unbounded along the ray"
        );
    }
    for _ in 0..100 {
        let mid = 0.5 * (s_in + s_out);
        if value(mid) <= threshold {
            s_in = mid;
        } else {
            s_out = mid;
        }
    }
    s_in
}

fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; u1 is kept away from 0.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Materialize the intrinsic-volume family of typical sets n = 1..=maxN for
/// densities whose typical bodies have closed forms.
pub fn typical_family(
    density: &LogConcaveDensity,
    eps: f64,
    max_n: usize,
) -> Result<SuperConvFamily> {
    match density.family() {
        DensityFamily::Gaussian { .. } | DensityFamily::Uniform { .. } => {
            SuperConvFamily::from_fn(max_n, Provenance::ClosedForm, |n| {
                TypicalSetSpec::new(density.clone(), n, eps)?
                    .body()?
                    .intrinsic_volumes()
            })
        }
        _ => Err(Error::InvalidParameter(
            "no closed-form typical family for this density; use fitted_typical_family".into(),
        )),
    }
}

/// Steiner-fit family for oracle-only densities; n is capped at 3 because
/// tube-volume estimation degrades quickly with dimension.
pub fn fitted_typical_family(
    density: &LogConcaveDensity,
    eps: f64,
    max_n: usize,
    samples: u64,
    seed: u64,
) -> Result<SuperConvFamily> {
    if max_n > 3 {
        return Err(Error::InvalidParameter(
            "fitted families are limited to n <= 3".into(),
        ));
    }
    SuperConvFamily::from_fn(max_n, Provenance::SteinerFit, |n| {
        let spec = TypicalSetSpec::new(density.clone(), n, eps)?;
        let oracle = spec.body()?.to_oracle()?;
        let t_grid = chebyshev_radii(2.0 * oracle.bounding_radius(), n + 3);
        Ok(steiner_fit(&oracle, &t_grid, samples, seed + n as u64)?.estimates)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn builtin_entropies() {
        assert_abs_diff_eq!(LogConcaveDensity::uniform(1.0).unwrap().entropy(), 0.0);
        let g = LogConcaveDensity::gaussian(1.0).unwrap();
        assert_abs_diff_eq!(
            g.entropy(),
            0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(g.entropy(), 1.4189385332046727, epsilon = 1e-12);
        let l = LogConcaveDensity::laplace(1.0).unwrap();
        assert_abs_diff_eq!(l.entropy(), 1.0 + 2.0f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn entropy_quadrature_cross_checks_closed_forms() {
        for d in [
            LogConcaveDensity::gaussian(1.0).unwrap(),
            LogConcaveDensity::gaussian(2.5).unwrap(),
            LogConcaveDensity::laplace(1.0).unwrap(),
            LogConcaveDensity::exponential(0.7).unwrap(),
        ] {
            let q = d.entropy_by_quadrature().unwrap();
            assert_abs_diff_eq!(q, d.entropy(), epsilon = 1e-8);
            assert_abs_diff_eq!(d.normalization_integral().unwrap(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn eta_below_entropy_strict_unless_uniform() {
        for d in [
            LogConcaveDensity::gaussian(0.5).unwrap(),
            LogConcaveDensity::laplace(2.0).unwrap(),
            LogConcaveDensity::exponential(1.0).unwrap(),
        ] {
            assert!(d.eta() < d.entropy());
            assert!(!d.is_uniform());
        }
        let u = LogConcaveDensity::uniform(2.0).unwrap();
        assert_eq!(u.eta(), u.entropy());
        assert!(u.is_uniform());
    }

    #[test]
    fn custom_density_matches_builtin_gaussian() {
        let norm = 0.5 * (2.0 * std::f64::consts::PI).ln();
        let d = LogConcaveDensity::custom(
            "gauss-by-hand",
            move |x| 0.5 * x * x + norm,
            (f64::NEG_INFINITY, f64::INFINITY),
            1.0,
        )
        .unwrap();
        let g = LogConcaveDensity::gaussian(1.0).unwrap();
        assert_abs_diff_eq!(d.entropy(), g.entropy(), epsilon = 1e-8);
        assert_abs_diff_eq!(d.eta(), g.eta(), epsilon = 1e-9);
        assert_abs_diff_eq!(d.argmin(), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn custom_rejects_nonconvex_and_unnormalized() {
        let bad_convex = LogConcaveDensity::custom(
            "bump",
            |x: f64| -(x * x) + x.powi(4),
            (f64::NEG_INFINITY, f64::INFINITY),
            1.0,
        );
        assert!(bad_convex.is_err());

        let unnormalized = LogConcaveDensity::custom(
            "double-gauss",
            |x: f64| 0.5 * x * x, // missing the ½log 2π term
            (f64::NEG_INFINITY, f64::INFINITY),
            1.0,
        );
        assert!(unnormalized.is_err());
    }

    #[test]
    fn tabulated_potential_round_trips_laplace() {
        // |x| + log 2 sampled on a grid, linear tails with slope ±1.
        let pts: Vec<(f64, f64)> = (-8..=8)
            .map(|k| (k as f64, (k as f64).abs() + 2.0f64.ln()))
            .collect();
        let d = LogConcaveDensity::custom_from_table("laplace-table", &pts, (-1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(d.entropy(), 1.0 + 2.0f64.ln(), epsilon = 1e-7);
        assert_abs_diff_eq!(d.eta(), 2.0f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn typical_membership_matches_closed_forms() {
        let g = LogConcaveDensity::gaussian(1.3).unwrap();
        let spec = TypicalSetSpec::new(g, 4, 0.07).unwrap();
        let r2 = 4.0 * 1.3 * (1.0 + 0.14);
        let mut rng = stream_rng(5, 0);
        for _ in 0..100_000 {
            let x: Vec<f64> = (0..4).map(|_| 4.0 * (rng.gen::<f64>() - 0.5)).collect();
            let by_phi = spec.contains(&x);
            let by_ball = x.iter().map(|v| v * v).sum::<f64>() <= r2;
            assert_eq!(by_phi, by_ball);
        }

        let u = LogConcaveDensity::uniform(2.0).unwrap();
        let spec = TypicalSetSpec::new(u, 3, 0.5).unwrap();
        for _ in 0..100_000 {
            let x: Vec<f64> = (0..3).map(|_| 3.0 * (rng.gen::<f64>() - 0.25)).collect();
            let by_phi = spec.contains(&x);
            let by_cube = x.iter().all(|&v| (0.0..=2.0).contains(&v));
            assert_eq!(by_phi, by_cube);
        }
    }

    #[test]
    fn diagonal_of_minimizers_is_typical() {
        for d in [
            LogConcaveDensity::gaussian(1.0).unwrap(),
            LogConcaveDensity::laplace(1.0).unwrap(),
            LogConcaveDensity::uniform(3.0).unwrap(),
        ] {
            let x_star = d.argmin();
            let spec = TypicalSetSpec::new(d, 6, 0.01).unwrap();
            assert!(spec.contains(&[x_star; 6]));
        }
    }

    #[test]
    fn typical_bodies_dispatch_by_family() {
        let g = TypicalSetSpec::new(LogConcaveDensity::gaussian(1.0).unwrap(), 2, 0.05).unwrap();
        match g.body().unwrap() {
            ConvexBodySpec::Ball { dim, radius } => {
                assert_eq!(dim, 2);
                assert_abs_diff_eq!(radius, 2.2f64.sqrt(), epsilon = 1e-12);
            }
            other => panic!("expected a ball, got {other:?}"),
        }

        let u = TypicalSetSpec::new(LogConcaveDensity::uniform(2.0).unwrap(), 5, 0.3).unwrap();
        assert!(matches!(u.body().unwrap(), ConvexBodySpec::Cube { dim: 5, side } if side == 2.0));

        let l = TypicalSetSpec::new(LogConcaveDensity::laplace(1.0).unwrap(), 2, 0.1).unwrap();
        match l.body().unwrap() {
            ConvexBodySpec::Oracle(o) => {
                // ℓ1 level set of radius n·b·(1+ε) = 2.2.
                assert!(o.contains(&[1.0, 1.0]));
                assert!(o.contains(&[2.15, 0.0]));
                assert!(!o.contains(&[2.25, 0.0]));
                assert!(o.has_exact_distance());
            }
            other => panic!("expected an oracle, got {other:?}"),
        }
    }

    #[test]
    fn minorant_closed_form_families() {
        // Laplace: secant slopes are exactly 1, so c₁ = ½ and c₂ = log 2.
        let l = LogConcaveDensity::laplace(1.0).unwrap();
        let (c1, c2) = linear_minorant(&l).unwrap();
        assert_abs_diff_eq!(c1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c2, 2.0f64.ln(), epsilon = 1e-9);

        // Uniform(A): compact support gives c₁ = 1, c₂ = log A − A.
        let u = LogConcaveDensity::uniform(1.5).unwrap();
        let (c1, c2) = linear_minorant(&u).unwrap();
        assert_abs_diff_eq!(c1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c2, 1.5f64.ln() - 1.5, epsilon = 1e-9);

        // Gaussian: whatever pair comes out must be a true minorant.
        let g = LogConcaveDensity::gaussian(1.0).unwrap();
        let (c1, c2) = linear_minorant(&g).unwrap();
        assert!(c1 > 0.0);
        for i in 0..=2000 {
            let x = -20.0 + 0.02 * i as f64;
            assert!(g.phi(x) >= c1 * x.abs() + c2 - 1e-9);
        }
    }

    #[test]
    fn crosspolytope_scale_for_laplace() {
        // A = (h + ε − c₂)/c₁ = (1 + log2 + 0.1 − log2)/(1/2) = 2.2.
        let spec = TypicalSetSpec::new(LogConcaveDensity::laplace(1.0).unwrap(), 3, 0.1).unwrap();
        let (body, _) = crosspolytope_bound(&spec).unwrap();
        match body {
            ConvexBodySpec::Crosspolytope { dim, scale } => {
                assert_eq!(dim, 3);
                assert_abs_diff_eq!(scale, 2.2, epsilon = 1e-9);
            }
            other => panic!("expected a crosspolytope, got {other:?}"),
        }
    }

    #[test]
    fn sampled_typical_points_respect_the_crosspolytope() {
        for d in [
            LogConcaveDensity::gaussian(1.0).unwrap(),
            LogConcaveDensity::laplace(1.0).unwrap(),
            LogConcaveDensity::exponential(1.0).unwrap(),
        ] {
            let spec = TypicalSetSpec::new(d, 4, 0.05).unwrap();
            assert_eq!(
                crosspolytope_containment_failures(&spec, 5_000, 17).unwrap(),
                0
            );
        }
    }

    #[test]
    fn gaussian_typical_sphere_sits_inside_crosspolytope() {
        let spec = TypicalSetSpec::new(LogConcaveDensity::gaussian(1.0).unwrap(), 3, 0.05).unwrap();
        let (body, _) = crosspolytope_bound(&spec).unwrap();
        let an = match body {
            ConvexBodySpec::Crosspolytope { scale, .. } => scale * 3.0,
            _ => unreachable!(),
        };
        // Typical-ball radius √(nν(1+2ε)).
        let r = (3.0f64 * (1.0 + 2.0 * 0.05)).sqrt();
        let mut rng = stream_rng(23, 0);
        for _ in 0..10_000 {
            let dir = random_unit_vector(3, &mut rng);
            let l1: f64 = dir.iter().map(|v| (v * r).abs()).sum();
            assert!(l1 <= an + 1e-9, "sphere point escaped: {l1} > {an}");
        }
    }

    #[test]
    fn projection_bound_values() {
        let u = LogConcaveDensity::uniform(2.0).unwrap();
        let spec = TypicalSetSpec::new(u, 5, 0.1).unwrap();
        // m = n: the plain typical-set volume bound n(h+ε).
        assert_abs_diff_eq!(
            projection_volume_bound(&spec, 5),
            spec.threshold,
            epsilon = 1e-12
        );
        // Uniform: bound = m log A + nε; the true projection is the m-cube.
        let m = 2;
        assert_abs_diff_eq!(
            projection_volume_bound(&spec, m),
            m as f64 * 2.0f64.ln() + 5.0 * 0.1,
            epsilon = 1e-12
        );
        // m = 0 is nonnegative since h ≥ η.
        assert!(projection_volume_bound(&spec, 0) >= 0.0);
    }

    #[test]
    fn loomis_whitney_closed_forms() {
        // Uniform: margin is exactly nε at every m.
        let u = TypicalSetSpec::new(LogConcaveDensity::uniform(2.0).unwrap(), 4, 0.25).unwrap();
        for m in 0..=4 {
            let rep = loomis_whitney_check(&u, m, LwMethod::ClosedForm).unwrap();
            assert_abs_diff_eq!(rep.margin, 4.0 * 0.25, epsilon = 1e-9);
        }
        // Gaussian ball family: margin nonnegative.
        let g = TypicalSetSpec::new(LogConcaveDensity::gaussian(1.0).unwrap(), 3, 0.1).unwrap();
        for m in 0..=3 {
            let rep = loomis_whitney_check(&g, m, LwMethod::ClosedForm).unwrap();
            assert!(rep.margin >= 0.0, "margin {} at m={m}", rep.margin);
        }
    }

    #[test]
    fn bloat_check_behaviour() {
        let g = LogConcaveDensity::gaussian(1.0).unwrap();
        let rep = bloat_check(&g, 0.1, 5, 2_000, 99).unwrap();
        assert_eq!(rep.failures, 0);
        // α = 2ε/(h−ε−η) with h−η = ½ for any Gaussian.
        assert_abs_diff_eq!(rep.alpha, 0.2 / 0.4, epsilon = 1e-12);

        let l = LogConcaveDensity::laplace(1.0).unwrap();
        let rep = bloat_check(&l, 0.05, 4, 2_000, 99).unwrap();
        assert_eq!(rep.failures, 0);
        assert_abs_diff_eq!(rep.alpha, 0.1 / 0.95, epsilon = 1e-12);

        let u = LogConcaveDensity::uniform(1.0).unwrap();
        assert!(matches!(
            bloat_check(&u, 0.1, 3, 10, 1),
            Err(Error::UniformRejected)
        ));
    }

    #[test]
    fn concatenated_typical_points_stay_typical() {
        let d = LogConcaveDensity::laplace(1.0).unwrap();
        let mut rng = stream_rng(31, 0);
        for _ in 0..2_000 {
            let m = 1 + (rng.gen::<u32>() % 4) as usize;
            let n = 1 + (rng.gen::<u32>() % 4) as usize;
            let sm = TypicalSetSpec::new(d.clone(), m, 0.1).unwrap();
            let sn = TypicalSetSpec::new(d.clone(), n, 0.1).unwrap();
            let smn = TypicalSetSpec::new(d.clone(), m + n, 0.1).unwrap();
            let mut xy = sample_typical_point(&sm, &mut rng);
            xy.extend(sample_typical_point(&sn, &mut rng));
            assert!(smn.contains(&xy));
        }
    }

    #[test]
    fn nested_in_epsilon() {
        let d = LogConcaveDensity::gaussian(1.0).unwrap();
        let tight = TypicalSetSpec::new(d.clone(), 3, 0.05).unwrap();
        let loose = TypicalSetSpec::new(d, 3, 0.2).unwrap();
        let mut rng = stream_rng(37, 0);
        for _ in 0..5_000 {
            let x = sample_typical_point(&tight, &mut rng);
            assert!(loose.contains(&x));
        }
    }

    #[test]
    fn gaussian_family_is_superconvolutive() {
        let d = LogConcaveDensity::gaussian(1.0).unwrap();
        let fam = typical_family(&d, 0.1, 12).unwrap();
        assert!(fam.check_superconvolutive(12, 1e-9).pass);
    }
}
