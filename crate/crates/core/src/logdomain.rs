//! Stable log-domain arithmetic.
//!
//! Intrinsic volumes of n-dimensional typical sets grow like e^{n·h} and
//! overflow f64 well before n = 400, so every sequence in this crate stores
//! log-values (with `NEG_INFINITY` standing for exact zero) and combines them
//! with log-sum-exp.

use statrs::function::gamma::ln_gamma;

/// log(e^a + e^b) without overflow. −∞ acts as the additive identity.
#[inline]
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log Σ e^{x_i} over a slice; empty slices sum to zero (−∞).
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + sum.ln()
}

/// log Γ(x+1) = log x!, valid for real x ≥ 0.
#[inline]
pub fn ln_factorial(x: f64) -> f64 {
    ln_gamma(x + 1.0)
}

/// log C(n, k); −∞ outside 0 ≤ k ≤ n, exactly 0 at the edges.
///
/// For n ≤ 1000 the coefficient itself fits in f64 (possibly inexactly but
/// with relative error ~k·ε), so the multiplicative product beats the
/// cancellation in the log-gamma route; larger n falls back to log-gamma.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    if n <= 1000 {
        let k = k.min(n - k);
        let mut c = 1.0f64;
        for i in 1..=k {
            c *= (n - k + i) as f64 / i as f64;
        }
        c.ln()
    } else {
        ln_factorial(n as f64) - ln_factorial(k as f64) - ln_factorial((n - k) as f64)
    }
}

/// Natural-log binary entropy H(θ) = −θ log θ − (1−θ) log(1−θ), with the
/// limit convention H(0) = H(1) = 0.
pub fn binary_entropy(theta: f64) -> f64 {
    assert!((0.0..=1.0).contains(&theta), "theta must lie in [0,1]");
    let mut h = 0.0;
    if theta > 0.0 {
        h -= theta * theta.ln();
    }
    if theta < 1.0 {
        h -= (1.0 - theta) * (1.0 - theta).ln();
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn logaddexp_handles_neg_infinity() {
        assert_eq!(
            logaddexp(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
        assert_eq!(logaddexp(f64::NEG_INFINITY, 3.5), 3.5);
        assert_eq!(logaddexp(-2.0, f64::NEG_INFINITY), -2.0);
    }

    #[test]
    fn logaddexp_matches_naive_in_range() {
        let a = 1.25f64;
        let b = -0.5f64;
        assert_abs_diff_eq!(logaddexp(a, b), (a.exp() + b.exp()).ln(), epsilon = 1e-14);
    }

    #[test]
    fn logsumexp_survives_large_exponents() {
        // log(e^1000 + e^998) = 1000 + log(1 + e^-2)
        let v = logsumexp(&[1000.0, 998.0]);
        assert_abs_diff_eq!(v, 1000.0 + (1.0 + (-2.0f64).exp()).ln(), epsilon = 1e-12);
    }

    #[test]
    fn binomials_sum_to_two_to_the_n() {
        for n in [1usize, 5, 40, 400] {
            let logs: Vec<f64> = (0..=n).map(|k| ln_binomial(n, k)).collect();
            let total = logsumexp(&logs);
            assert_abs_diff_eq!(total, n as f64 * 2.0f64.ln(), epsilon = 1e-9);
        }
    }

    #[test]
    fn binomial_out_of_range_is_zero_mass() {
        assert_eq!(ln_binomial(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn binary_entropy_known_values() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.5), 2.0f64.ln(), epsilon = 1e-15);
        // Independently evaluated: -0.25 ln 0.25 - 0.75 ln 0.75.
        assert_abs_diff_eq!(binary_entropy(0.25), 0.5623351446188083, epsilon = 1e-15);
    }
}
