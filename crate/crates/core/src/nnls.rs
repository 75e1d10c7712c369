//! Nonnegative least squares (Lawson–Hanson active set).
//!
//! The Steiner-fit design matrices here are tiny (a handful of tube radii by
//! dim+1 powers), so the textbook active-set iteration with a dense solver
//! for each passive-set subproblem is entirely adequate.

use nalgebra::{DMatrix, DVector};

/// Solve min ‖A x − b‖₂ subject to x ≥ 0.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut passive = vec![false; n];
    let mut x = DVector::zeros(n);
    let tol = 1e-12 * a.amax().max(1.0) * b.amax().max(1.0);

    for _outer in 0..(8 * n.max(1)) {
        // Gradient of ½‖Ax−b‖² restricted to the active set.
        let grad = a.transpose() * (b - a * &x);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if !passive[j] && grad[j] > tol && best.is_none_or(|(_, g)| grad[j] > g) {
                best = Some((j, grad[j]));
            }
        }
        let Some((enter, _)) = best else { break };
        passive[enter] = true;

        loop {
            let z = solve_passive(a, b, &passive);
            let negative: Vec<usize> = (0..n).filter(|&j| passive[j] && z[j] <= tol).collect();
            if negative.is_empty() {
                for j in 0..n {
                    x[j] = if passive[j] { z[j] } else { 0.0 };
                }
                break;
            }
            // Step toward z only as far as feasibility allows, then drop the
            // coordinates that hit zero.
            let mut alpha = f64::INFINITY;
            for &j in &negative {
                let denom = x[j] - z[j];
                if denom > 0.0 {
                    alpha = alpha.min(x[j] / denom);
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for j in 0..n {
                if passive[j] {
                    x[j] += alpha * (z[j] - x[j]);
                    if x[j] <= tol {
                        x[j] = 0.0;
                        passive[j] = false;
                    }
                }
            }
        }
    }
    x
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..a.ncols()).filter(|&j| passive[j]).collect();
    let sub = a.select_columns(cols.iter());
    let sol = sub
        .svd(true, true)
        .solve(b, 1e-14)
        .expect("SVD solve of a passive subproblem cannot fail");
    let mut z = DVector::zeros(a.ncols());
    for (k, &j) in cols.iter().enumerate() {
        z[j] = sol[k];
    }
    z
}
