//! Super-convolutive sequence families and their limit machinery.
//!
//! A family {μ_n} with (μ_m ⋆ μ_n)(i) ≤ μ_{m+n}(i) has superadditive log
//! generating functions G_n(t) = log Σ_j μ_n(j)e^{jt}, so g_n = G_n/n
//! converges to Λ(t) = sup_n g_n(t) by Fekete's lemma. The convex conjugate
//! Λ* lives on `[0,1]`; −Λ* is the growth-rate curve of μ_n(⌊nθ⌋).
//!
//! Finite-n estimators used here, in decreasing order of caution:
//! - `lower_bracket`: max_n g_n(t) — a certified lower bound for Λ(t),
//! - `value`: g_{maxN}(t) — the plain Fekete iterate,
//! - `refined`: G_{maxN}(t) − G_{maxN−1}(t) — a difference quotient that
//!   converges much faster on families with multiplicative bulk, used for
//!   endpoint conjugates where g_n's O(1/n) bias is fatal.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logdomain::ln_binomial;
use crate::sequence::IntrinsicVolumeSequence;

/// Where a family's sequences came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    ClosedForm,
    SteinerFit,
    Synthetic,
}

/// An indexed family n ↦ intrinsic-volume-like sequence, n = 1..=maxN.
#[derive(Debug, Clone)]
pub struct SuperConvFamily {
    seqs: Vec<IntrinsicVolumeSequence>,
    provenance: Provenance,
}

impl SuperConvFamily {
    /// Materialize from a per-dimension builder.
    pub fn from_fn<F>(max_n: usize, provenance: Provenance, mut build: F) -> Result<Self>
    where
        F: FnMut(usize) -> Result<IntrinsicVolumeSequence>,
    {
        if max_n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let mut seqs = Vec::with_capacity(max_n);
        for n in 1..=max_n {
            let seq = build(n)?;
            if seq.dim() != n {
                return Err(Error::InvalidParameter(format!(
                    "family builder returned dimension {} at index {n}",
                    seq.dim()
                )));
            }
            seqs.push(seq);
        }
        Ok(Self { seqs, provenance })
    }

    /// The fixed-side cube family: μ_n = intrinsic volumes of `[0,A]^n`.
    pub fn cube_family(side: f64, max_n: usize) -> Result<Self> {
        Self::from_fn(max_n, Provenance::ClosedForm, |n| {
            crate::bodies::cube_intrinsic_volumes(n, side)
        })
    }

    /// The fixed-scale crosspolytope family: μ_n = intrinsic volumes of
    /// {x : Σ|x_i| ≤ An}.
    pub fn crosspolytope_family(scale: f64, max_n: usize) -> Result<Self> {
        Self::from_fn(max_n, Provenance::ClosedForm, |n| {
            crate::bodies::crosspolytope_intrinsic_volumes(n, scale)
        })
    }

    /// The strict-endpoint-gap example family:
    /// μ_n(i) = C(n−1,i)·α^i for i ≤ n−1 and μ_n(n) = δ, with α > 1 and
    /// δ ∈ (0, ½). Proper and super-convolutive, with
    /// Λ*(1) = −log α strictly below −lim (1/n) log μ_n(n) = 0.
    pub fn endpoint_gap_family(alpha: f64, delta: f64, max_n: usize) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 1, got {alpha}"
            )));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "delta must be in (0, 1/2), got {delta}"
            )));
        }
        Self::from_fn(max_n, Provenance::Synthetic, |n| {
            let mut logv: Vec<f64> = (0..n)
                .map(|i| ln_binomial(n - 1, i) + i as f64 * alpha.ln())
                .collect();
            logv.push(delta.ln());
            Ok(IntrinsicVolumeSequence::from_log(n, logv))
        })
    }

    pub fn max_n(&self) -> usize {
        self.seqs.len()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// The sequence at dimension `n` (1-based).
    pub fn seq(&self, n: usize) -> &IntrinsicVolumeSequence {
        assert!(
            n >= 1 && n <= self.seqs.len(),
            "family holds n = 1..={}",
            self.seqs.len()
        );
        &self.seqs[n - 1]
    }

    /// G_n(t) = log Σ_j μ_n(j) e^{jt}.
    pub fn log_generating(&self, n: usize, t: f64) -> f64 {
        self.seq(n).log_generating(t)
    }

    /// g_n(t) = G_n(t)/n.
    pub fn g(&self, n: usize, t: f64) -> f64 {
        self.log_generating(n, t) / n as f64
    }

    /// Check (μ_m ⋆ μ_n)(i) ≤ μ_{m+n}(i)·(1+tol) for all m+n ≤ upTo.
    /// Reports the worst violation margin in log-domain (positive = violated).
    pub fn check_superconvolutive(&self, up_to: usize, tol: f64) -> SuperConvReport {
        let up_to = up_to.min(self.max_n());
        let mut worst = f64::NEG_INFINITY;
        let mut worst_at = (0usize, 0usize, 0usize);
        for m in 1..up_to {
            for n in m..=(up_to - m) {
                let conv = self.seq(m).convolve(self.seq(n));
                let target = self.seq(m + n);
                for i in 0..=(m + n) {
                    if conv.log_v(i) == f64::NEG_INFINITY {
                        continue; // zero mass cannot violate the inequality
                    }
                    let excess = conv.log_v(i) - target.log_v(i);
                    if excess > worst {
                        worst = excess;
                        worst_at = (m, n, i);
                    }
                }
            }
        }
        SuperConvReport {
            pass: worst <= tol.ln_1p(),
            worst_log_margin: worst,
            worst_at,
        }
    }

    /// β̂ = max_n (1/n) log μ_n(0). Superadditivity of log μ_n(0) makes this
    /// a certified lower bound for β, approached from below.
    pub fn beta_hat(&self) -> f64 {
        (1..=self.max_n())
            .map(|n| self.seq(n).log_v(0) / n as f64)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// α̂ = max_n (1/n) log μ_n(n), a certified lower bound for α.
    pub fn alpha_hat(&self) -> f64 {
        (1..=self.max_n())
            .map(|n| self.seq(n).log_v(n) / n as f64)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// γ̂ = max_n g_n(0), a certified lower bound for γ = Λ(0).
    pub fn gamma_hat(&self) -> f64 {
        (1..=self.max_n())
            .map(|n| self.g(n, 0.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Properness diagnostics (positivity of the endpoint masses plus the
    /// certified-from-below α, β, γ estimates).
    pub fn properness(&self) -> PropernessReport {
        let endpoints_positive = (1..=self.max_n()).all(|n| {
            self.seq(n).log_v(0) > f64::NEG_INFINITY && self.seq(n).log_v(n) > f64::NEG_INFINITY
        });
        let beta = self.beta_hat();
        let alpha = self.alpha_hat();
        let gamma = self.gamma_hat();
        let all_finite = beta.is_finite() && alpha.is_finite() && gamma.is_finite();
        let note = if endpoints_positive && all_finite {
            "finite brackets certified from below at every materialized n; the limit Λ may \
             still be larger"
        } else {
            "properness could not be certified from the materialized family; Λ is possibly \
             infinite"
        };
        PropernessReport {
            endpoints_positive,
            beta,
            alpha,
            gamma,
            all_finite,
            note: note.to_string(),
        }
    }

    /// Finite-n estimate of Λ(t) with its certified bracket. See the module
    /// docs for the roles of the three estimators; the upper envelope is the
    /// max(γ, t+γ) bound evaluated at γ̂ and is only asymptotically valid.
    pub fn estimate_lambda(&self, t: f64) -> LambdaEstimate {
        let top = self.max_n();
        let value = self.g(top, t);
        let lower_bracket = (1..=top)
            .map(|n| self.g(n, t))
            .fold(f64::NEG_INFINITY, f64::max);
        let refined = if top >= 2 {
            self.log_generating(top, t) - self.log_generating(top - 1, t)
        } else {
            value
        };
        let gamma = self.gamma_hat();
        LambdaEstimate {
            value,
            lower_bracket,
            refined,
            upper_envelope: gamma.max(t + gamma),
        }
    }

    // g_n is evaluated over a thinned index set inside conjugate searches:
    // small n, a doubling chain, and the top two. Every member is still a
    // certified lower bound for Λ, and on monotone families the max is at
    // maxN anyway.
    fn envelope_indices(&self) -> Vec<usize> {
        let top = self.max_n();
        let mut ns: Vec<usize> = (1..=top.min(8)).collect();
        let mut k = 16;
        while k < top {
            ns.push(k);
            k *= 2;
        }
        if top > 8 {
            ns.push(top - 1);
            ns.push(top);
        }
        ns.dedup();
        ns
    }

    /// max over a thinned n-chain of g_n(t): a certified lower bound for Λ(t)
    /// that is cheap enough to sit inside a conjugate search.
    pub fn lambda_envelope(&self, t: f64) -> f64 {
        self.envelope_indices()
            .into_iter()
            .map(|n| self.g(n, t))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The maximizer bracket I_θ for the conjugate search,
    /// [(log μ_1(0) − γ̂)/θ, (γ̂ − log μ_1(1))/(1−θ)], valid for any function
    /// trapped between g_1 and max(γ̂, t+γ̂). None when μ_1 has a vanishing
    /// endpoint (the bracket degenerates).
    pub fn conjugate_bracket(&self, theta: f64) -> Option<(f64, f64)> {
        if !(theta > 0.0 && theta < 1.0) {
            return None;
        }
        let mu10 = self.seq(1).log_v(0);
        let mu11 = self.seq(1).log_v(1);
        if mu10 == f64::NEG_INFINITY || mu11 == f64::NEG_INFINITY {
            return None;
        }
        let gamma = self.gamma_hat();
        // Clamp against θ values so extreme that generating functions would
        // overflow at the bracket ends; widening recovers the rest.
        let lo = ((mu10 - gamma) / theta).max(-1e6);
        let hi = ((gamma - mu11) / (1.0 - theta)).min(1e6);
        if lo < hi {
            Some((lo, hi))
        } else {
            None
        }
    }

    /// g_n*(θ) for one n, by conjugate search.
    pub fn gn_conjugate(&self, n: usize, theta: f64) -> Result<f64> {
        let bracket = self.conjugate_bracket(theta).unwrap_or((-4.0, 4.0));
        Ok(legendre_conjugate(|t| self.g(n, t), theta, bracket)?.value)
    }

    /// (1/n)·log of the mass μ_n places on indices j with j/n ∈ `[a, b]`.
    pub fn log_interval_mass(&self, n: usize, a: f64, b: f64) -> f64 {
        self.seq(n).log_window_mass(a, b) / n as f64
    }

    /// The concave interpolant a_n(θ): linear interpolation of
    /// (1/n) log μ_n(j) between j = ⌊nθ⌋ and ⌈nθ⌉.
    pub fn a_interpolant(&self, n: usize, theta: f64) -> f64 {
        assert!((0.0..=1.0).contains(&theta));
        let seq = self.seq(n);
        let x = theta * n as f64;
        let j0 = x.floor() as usize;
        let j1 = x.ceil() as usize;
        let frac = x - j0 as f64;
        let (a0, a1) = (seq.log_v(j0.min(n)), seq.log_v(j1.min(n)));
        if frac == 0.0 {
            return a0 / n as f64;
        }
        if a0 == f64::NEG_INFINITY || a1 == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        ((1.0 - frac) * a0 + frac * a1) / n as f64
    }

    /// Tabulate the conjugate over a θ grid.
    ///
    /// Interior points are conjugates of g_{maxN} (`GnStar`) or of the
    /// certified Λ lower envelope (`LambdaStar`). The endpoints θ ∈ {0,1}
    /// are always reported as −β̂ and −α̂; the conjugate-limit estimates at
    /// the endpoints (which may sit strictly below, Λ*(0) ≤ −β and
    /// Λ*(1) ≤ −α) go into the endpoint report rather than the curve, so
    /// neither side of a possible strict gap is silently dropped.
    pub fn rate_curve(&self, theta_grid: &[f64], mode: RateMode) -> Result<RateCurve> {
        let mut grid: Vec<f64> = theta_grid.to_vec();
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        if grid.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
            return Err(Error::InvalidParameter("θ grid must lie in [0,1]".into()));
        }
        let n = self.max_n();
        let mut values = Vec::with_capacity(grid.len());
        let mut widths = Vec::with_capacity(grid.len());
        let mut endpoint_report = None;
        for &theta in &grid {
            if theta == 0.0 || theta == 1.0 {
                if endpoint_report.is_none() {
                    endpoint_report = Some(self.endpoint_report());
                }
                values.push(if theta == 0.0 {
                    -self.beta_hat()
                } else {
                    -self.alpha_hat()
                });
                widths.push(0.0);
                continue;
            }
            let bracket = self.conjugate_bracket(theta).unwrap_or((-4.0, 4.0));
            let conj = match mode {
                RateMode::GnStar => legendre_conjugate(|t| self.g(n, t), theta, bracket)?,
                RateMode::LambdaStar => {
                    legendre_conjugate(|t| self.lambda_envelope(t), theta, bracket)?
                }
            };
            values.push(conj.value);
            // Spread between the conjugate route and the direct interpolant;
            // both converge to Λ*(θ), so the gap is an empirical error bar.
            widths.push((conj.value + self.a_interpolant(n, theta)).abs());
        }
        Ok(RateCurve {
            theta_grid: grid,
            values,
            n_used: n,
            bracket_widths: widths,
            endpoint_report,
        })
    }

    /// Export as JSON lines, one `{"n": ..., "log_v": [...]}` record per
    /// dimension.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for n in 1..=self.max_n() {
            out.push_str(&serde_json::to_string(self.seq(n)).expect("sequences serialize"));
            out.push('\n');
        }
        out
    }

    /// Import a family exported by [`SuperConvFamily::to_jsonl`]. Records must
    /// cover n = 1..=maxN contiguously.
    pub fn from_jsonl(text: &str, provenance: Provenance) -> Result<Self> {
        let mut seqs = Vec::new();
        for (idx, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let seq: IntrinsicVolumeSequence = serde_json::from_str(line)
                .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", idx + 1)))?;
            if seq.dim() != idx + 1 {
                return Err(Error::InvalidParameter(format!(
                    "line {} has dimension {}, expected {}",
                    idx + 1,
                    seq.dim(),
                    idx + 1
                )));
            }
            seqs.push(seq);
        }
        if seqs.is_empty() {
            return Err(Error::InvalidParameter("no family records found".into()));
        }
        Ok(Self { seqs, provenance })
    }

    /// Endpoint diagnostics: moment-rate estimates −β̂/−α̂ next to the
    /// saturating conjugate estimates of Λ*(0)/Λ*(1) built on the refined Λ.
    pub fn endpoint_report(&self) -> EndpointReport {
        let refined = |t: f64| self.estimate_lambda(t).refined;
        let conj_at_zero = legendre_conjugate(refined, 0.0, (-4.0, 4.0))
            .ok()
            .map(|c| c.value);
        let conj_at_one = legendre_conjugate(refined, 1.0, (-4.0, 4.0))
            .ok()
            .map(|c| c.value);
        EndpointReport {
            minus_beta: -self.beta_hat(),
            minus_alpha: -self.alpha_hat(),
            conj_at_zero,
            conj_at_one,
            note: "Λ*(0) ≤ −β and Λ*(1) ≤ −α may be strict; both estimates are reported"
                .to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    GnStar,
    LambdaStar,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperConvReport {
    pub pass: bool,
    /// max over (m,n,i) of log[(μ_m ⋆ μ_n)(i) / μ_{m+n}(i)]; ≤ 0 when the
    /// defining inequality holds exactly.
    pub worst_log_margin: f64,
    pub worst_at: (usize, usize, usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct PropernessReport {
    pub endpoints_positive: bool,
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub all_finite: bool,
    pub note: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LambdaEstimate {
    /// g_{maxN}(t).
    pub value: f64,
    /// max_n g_n(t); certified Λ(t) ≥ this.
    pub lower_bracket: f64,
    /// G_{maxN}(t) − G_{maxN−1}(t).
    pub refined: f64,
    /// max(γ̂, t + γ̂); asymptotic upper envelope evaluated at the γ estimate.
    pub upper_envelope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateCurve {
    pub theta_grid: Vec<f64>,
    /// Conjugate values (the convex Λ*-side; negate for the growth curve).
    pub values: Vec<f64>,
    pub n_used: usize,
    pub bracket_widths: Vec<f64>,
    pub endpoint_report: Option<EndpointReport>,
}

impl RateCurve {
    /// CSV rows `theta,value,bracket_lo,bracket_hi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,value,bracket_lo,bracket_hi\n");
        for (i, &theta) in self.theta_grid.iter().enumerate() {
            let v = self.values[i];
            let w = self.bracket_widths[i];
            out.push_str(&format!("{theta},{v},{},{}\n", v - w, v + w));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EndpointReport {
    pub minus_beta: f64,
    pub minus_alpha: f64,
    pub conj_at_zero: Option<f64>,
    pub conj_at_one: Option<f64>,
    pub note: String,
}

/// Result of a conjugate search sup_t {θt − f(t)}.
#[derive(Debug, Clone, Copy)]
pub struct Conjugate {
    pub value: f64,
    pub maximizer: f64,
    /// The supremum was taken in a flat tail (maximizer escapes to ±∞, as at
    /// θ ∈ {0,1}); the reported value is the detected plateau level.
    pub saturated: bool,
    pub widenings: u32,
}

const GOLDEN_INV: f64 = 0.618_033_988_749_894_9;
/// Absolute refinement target in t.
const T_TOL: f64 = 1e-10;
/// A tail counts as flat once its remaining possible increase over the whole
/// bracket drops below this.
const SATURATION_TOL: f64 = 1e-7;
const MAX_WIDENINGS: u32 = 10;

/// Numerical Legendre–Fenchel conjugate sup_t {θ·t − f(t)} for convex f,
/// by golden-section search on the concave objective over `bracket`.
///
/// A maximizer pressed against a bracket edge triggers widening of that side
/// (doubling the width each time). If the objective is still climbing after
/// the widening limit the search fails; if it has flattened (slope × width
/// below tolerance) the plateau value is returned with `saturated = true` —
/// that is the correct behavior at θ = 0 and θ = 1, where the supremum is
/// approached but not attained.
pub fn legendre_conjugate<F: Fn(f64) -> f64>(
    f: F,
    theta: f64,
    bracket: (f64, f64),
) -> Result<Conjugate> {
    assert!((0.0..=1.0).contains(&theta), "theta must lie in [0,1]");
    let objective = |t: f64| theta * t - f(t);
    let (mut lo, mut hi) = bracket;
    assert!(lo < hi, "bracket must be nondegenerate");

    let mut widenings = 0u32;
    loop {
        let (t_star, value) = golden_max(&objective, lo, hi);
        let width = hi - lo;
        let edge = 1e-3 * width;
        let at_right = t_star > hi - edge;
        let at_left = t_star < lo + edge;
        if !(at_left || at_right) {
            return Ok(Conjugate {
                value,
                maximizer: t_star,
                saturated: false,
                widenings,
            });
        }
        // Slope estimate just inside the violated edge.
        let delta = edge.max(1e-8);
        let slope = if at_right {
            (objective(hi) - objective(hi - delta)) / delta
        } else {
            (objective(lo) - objective(lo + delta)) / delta
        };
        if slope <= 0.0 {
            // The maximum genuinely sits at/next to the edge.
            return Ok(Conjugate {
                value,
                maximizer: t_star,
                saturated: false,
                widenings,
            });
        }
        if slope * width < SATURATION_TOL {
            let t_edge = if at_right { hi } else { lo };
            return Ok(Conjugate {
                value: objective(t_edge),
                maximizer: t_edge,
                saturated: true,
                widenings,
            });
        }
        if widenings >= MAX_WIDENINGS {
            return Err(Error::BracketViolation { widenings });
        }
        if at_right {
            hi += width;
        } else {
            lo -= width;
        }
        widenings += 1;
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut a = hi - GOLDEN_INV * (hi - lo);
    let mut b = lo + GOLDEN_INV * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    let tol = T_TOL * (1.0 + lo.abs().max(hi.abs()));
    while hi - lo > tol {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - GOLDEN_INV * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + GOLDEN_INV * (hi - lo);
            fb = f(b);
        }
    }
    if fa >= fb {
        (a, fa)
    } else {
        (b, fb)
    }
}
