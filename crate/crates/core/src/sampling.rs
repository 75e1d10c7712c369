//! Monte-Carlo tube volumes for oracle bodies.

use rand::Rng;
use rayon::prelude::*;

use crate::bodies::OracleBody;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Shard count for parallel sampling. Each shard draws from its own
/// deterministic stream, and the merged hit count is an order-independent
/// integer sum, so estimates do not depend on thread scheduling.
const SHARDS: u64 = 64;

/// Estimate |K ⊕ tB| by rejection sampling in the bounding box of half-width
/// R + t, where R is the oracle's bounding radius. A sample counts as a hit
/// when its distance to K is at most t.
///
/// Returns `(estimate, standard_error)`; the standard error uses a +½ count
/// correction so it stays positive when every sample hits.
pub fn mc_tube_volume(oracle: &OracleBody, t: f64, samples: u64, seed: u64) -> Result<(f64, f64)> {
    mc_tube_volume_streamed(oracle, t, samples, seed, 0)
}

/// Same as [`mc_tube_volume`] but drawing from streams starting at
/// `stream_base`, so several estimates under one seed stay independent.
pub fn mc_tube_volume_streamed(
    oracle: &OracleBody,
    t: f64,
    samples: u64,
    seed: u64,
    stream_base: u64,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter("tube radius must be >= 0".into()));
    }
    let dim = oracle.dim();
    let half_width = oracle.bounding_radius() + t;
    let box_log_volume = dim as f64 * (2.0 * half_width).ln();

    let hits: u64 = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let mut rng = stream_rng(seed, stream_base + shard);
            let shard_samples = samples / SHARDS + u64::from(shard < samples % SHARDS);
            let mut x = vec![0.0f64; dim];
            let mut local = 0u64;
            for _ in 0..shard_samples {
                for xi in x.iter_mut() {
                    *xi = half_width * (2.0 * rng.gen::<f64>() - 1.0);
                }
                if oracle.distance_to(&x) <= t {
                    local += 1;
                }
            }
            local
        })
        .sum();

    if hits == 0 {
        return Err(Error::DegenerateEstimate { samples });
    }
    let n = samples as f64;
    let p = hits as f64 / n;
    let box_volume = box_log_volume.exp();
    let p_err = (hits as f64 + 0.5) / (n + 1.0);
    let stderr = box_volume * (p_err * (1.0 - p_err) / n).sqrt();
    Ok((p * box_volume, stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{steiner_volume, ConvexBodySpec};
    use std::f64::consts::PI;

    const N: u64 = 1_000_000;

    fn check(est: f64, se: f64, want: f64) {
        assert!(
            (est - want).abs() <= 3.0 * se,
            "estimate {est} ± {se} vs expected {want}"
        );
    }

    #[test]
    fn unit_square_volume() {
        let oracle = ConvexBodySpec::cube(2, 1.0).unwrap().to_oracle().unwrap();
        let (est, se) = mc_tube_volume(&oracle, 0.0, N, 11).unwrap();
        check(est, se, 1.0);
    }

    #[test]
    fn disk_tube_is_a_bigger_disk() {
        let oracle = ConvexBodySpec::ball(2, 1.0).unwrap().to_oracle().unwrap();
        let (est, se) = mc_tube_volume(&oracle, 1.0, N, 12).unwrap();
        check(est, se, 4.0 * PI);
    }

    #[test]
    fn square_tube_matches_steiner_sum() {
        let spec = ConvexBodySpec::cube(2, 1.0).unwrap();
        let oracle = spec.to_oracle().unwrap();
        let (est, se) = mc_tube_volume(&oracle, 1.0, N, 13).unwrap();
        check(est, se, 5.0 + PI);
        // Same value through the Steiner polynomial.
        check(
            est,
            se,
            steiner_volume(&spec.intrinsic_volumes().unwrap(), 1.0),
        );
    }

    #[test]
    fn unit_ball_3d_volume_cross_checks_gamma_form() {
        // Monte-Carlo oracle for ω₃ = 4π/3.
        let oracle = ConvexBodySpec::ball(3, 1.0).unwrap().to_oracle().unwrap();
        let (est, se) = mc_tube_volume(&oracle, 0.0, N, 14).unwrap();
        check(est, se, 4.0 * PI / 3.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let oracle = ConvexBodySpec::cube(2, 1.0).unwrap().to_oracle().unwrap();
        let a = mc_tube_volume(&oracle, 0.5, 10_000, 42).unwrap();
        let b = mc_tube_volume(&oracle, 0.5, 10_000, 42).unwrap();
        assert_eq!(a, b);
        let c = mc_tube_volume(&oracle, 0.5, 10_000, 43).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn zero_hits_is_an_error() {
        // A tiny ball with an enormous bounding radius: no hits in 100 draws.
        let oracle = crate::bodies::OracleBody::new(
            2,
            std::sync::Arc::new(|x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-6),
            1e6,
            vec![0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(
            mc_tube_volume(&oracle, 0.0, 100, 1),
            Err(Error::DegenerateEstimate { .. })
        ));
    }
}
