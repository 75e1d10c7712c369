//! Steiner fitting: recover intrinsic volumes of an oracle body from
//! Monte-Carlo tube volumes.
//!
//! Steiner's formula makes |K ⊕ tB| a polynomial Σ_j c_j t^j with
//! c_j = V_{n−j}(K)·ω_j ≥ 0, so the coefficients are estimated by
//! inverse-variance weighted nonnegative least squares over a grid of tube
//! radii and divided by ω_j.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bodies::{log_unit_ball_volume, OracleBody};
use crate::error::{Error, Result};
use crate::nnls::nnls;
use crate::sampling::mc_tube_volume_streamed;
use crate::sequence::IntrinsicVolumeSequence;

/// Condition numbers past this are treated as rank deficiency.
const RANK_TOL: f64 = 1e12;

#[derive(Debug, Clone, Serialize)]
pub struct RawTubeVolume {
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SteinerFitReport {
    /// Fitted intrinsic volumes (log-domain; NNLS-clamped entries are −∞).
    pub estimates: IntrinsicVolumeSequence,
    /// Standard error of each fitted V_j, from the unconstrained fit
    /// covariance (XᵀX)⁻¹ of the weighted design.
    pub stderrs: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub raw_volumes: Vec<RawTubeVolume>,
    pub condition_number: f64,
    /// Indices j where the unconstrained fit went negative beyond tolerance
    /// before NNLS clamped them; a nonempty list usually means the t-grid is
    /// poorly conditioned for this body.
    pub negative_flagged: Vec<usize>,
    pub seed: u64,
}

/// Chebyshev-spaced tube radii in [0.1·diam, 2·diam]; better conditioned than
/// uniform spacing for the Vandermonde-like design.
pub fn chebyshev_radii(diameter: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let lo = 0.1 * diameter;
    let hi = 2.0 * diameter;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut ts: Vec<f64> = (0..count)
        .map(|k| {
            let ang = std::f64::consts::PI * (2.0 * k as f64 + 1.0) / (2.0 * count as f64);
            mid + half * ang.cos()
        })
        .collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts
}

/// Fit intrinsic volumes of `oracle` from tube volumes at `t_grid`.
/// Deterministic for a fixed `(seed, t_grid, samples)`.
pub fn steiner_fit(
    oracle: &OracleBody,
    t_grid: &[f64],
    samples_per_radius: u64,
    seed: u64,
) -> Result<SteinerFitReport> {
    let dim = oracle.dim();
    if t_grid.len() < dim + 1 {
        return Err(Error::InvalidParameter(format!(
            "need at least dim+1 = {} tube radii, got {}",
            dim + 1,
            t_grid.len()
        )));
    }
    for (i, &t) in t_grid.iter().enumerate() {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(
                "tube radii must be positive".into(),
            ));
        }
        if t_grid[..i].contains(&t) {
            return Err(Error::InvalidParameter(
                "tube radii must be distinct".into(),
            ));
        }
    }

    let mut raw = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        // Each radius draws from its own block of RNG streams.
        let (estimate, stderr) =
            mc_tube_volume_streamed(oracle, t, samples_per_radius, seed, (i as u64) << 32)?;
        raw.push(RawTubeVolume {
            t,
            estimate,
            stderr,
            samples: samples_per_radius,
        });
    }

    // Weighted design: rows (1/σ_i)·t_i^j, rhs (1/σ_i)·y_i.
    let rows = t_grid.len();
    let cols = dim + 1;
    let design = DMatrix::from_fn(rows, cols, |i, j| raw[i].t.powi(j as i32) / raw[i].stderr);
    let rhs = DVector::from_iterator(rows, raw.iter().map(|r| r.estimate / r.stderr));

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition_number = smax / smin;
    if !condition_number.is_finite() || condition_number > RANK_TOL {
        return Err(Error::RankDeficient {
            cond: condition_number,
        });
    }

    // Unconstrained solution, kept for the negativity flag and covariance.
    let free = svd
        .solve(&rhs, 1e-14)
        .expect("SVD solve cannot fail after rank check");
    let gram_inv = (design.transpose() * &design)
        .try_inverse()
        .ok_or(Error::RankDeficient {
            cond: condition_number,
        })?;
    let coef_se: Vec<f64> = (0..cols)
        .map(|j| gram_inv[(j, j)].max(0.0).sqrt())
        .collect();
    let negative_flagged: Vec<usize> = (0..cols).filter(|&j| free[j] < -3.0 * coef_se[j]).collect();

    let coef = nnls(&design, &rhs);

    // c_j = V_{n−j} ω_j  ⇒  V_k = c_{n−k} / ω_k... with k = n−j.
    let mut logv = vec![f64::NEG_INFINITY; cols];
    let mut stderrs = vec![0.0; cols];
    for j in 0..cols {
        let k = dim - j;
        let log_wj = log_unit_ball_volume(j);
        if coef[j] > 0.0 {
            logv[k] = coef[j].ln() - log_wj;
        }
        stderrs[k] = coef_se[j] / log_wj.exp();
    }

    Ok(SteinerFitReport {
        estimates: IntrinsicVolumeSequence::from_log(dim, logv),
        stderrs,
        t_grid: t_grid.to_vec(),
        raw_volumes: raw,
        condition_number,
        negative_flagged,
        seed,
    })
}

impl SteinerFitReport {
    /// |V̂_j − reference_j| ≤ k·SE(V̂_j) for every j.
    pub fn matches_within(&self, reference: &IntrinsicVolumeSequence, k_sigma: f64) -> bool {
        (0..=self.estimates.dim()).all(|j| {
            let got = self.estimates.log_v(j).exp();
            let want = reference.log_v(j).exp();
            (got - want).abs() <= k_sigma * self.stderrs[j]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::ConvexBodySpec;

    #[test]
    fn recovers_unit_square_volumes() {
        let spec = ConvexBodySpec::cube(2, 1.0).unwrap();
        let fit = steiner_fit(
            &spec.to_oracle().unwrap(),
            &[0.25, 0.5, 1.0, 2.0],
            200_000,
            7,
        )
        .unwrap();
        let closed = spec.intrinsic_volumes().unwrap();
        assert!(
            fit.matches_within(&closed, 3.0),
            "fit {:?} vs closed {:?} (se {:?})",
            fit.estimates.values(),
            closed.values(),
            fit.stderrs
        );
        assert!(fit.negative_flagged.is_empty());
        assert!(fit.condition_number < 1e4);
    }

    #[test]
    fn grid_must_be_large_enough_and_distinct() {
        let oracle = ConvexBodySpec::cube(2, 1.0).unwrap().to_oracle().unwrap();
        assert!(steiner_fit(&oracle, &[0.5, 1.0], 1000, 7).is_err());
        assert!(steiner_fit(&oracle, &[0.5, 0.5, 1.0], 1000, 7).is_err());
        assert!(steiner_fit(&oracle, &[-0.5, 0.5, 1.0], 1000, 7).is_err());
    }

    #[test]
    fn chebyshev_radii_span_the_requested_range() {
        let ts = chebyshev_radii(2.0, 6);
        assert_eq!(ts.len(), 6);
        assert!(ts[0] > 0.2 && ts[0] < 0.5);
        assert!(ts[5] < 4.0 && ts[5] > 3.5);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
    }
}
