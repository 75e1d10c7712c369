//! Property suites: each check returns a named pass/fail with its margin,
//! so a CLI (or CI) can gate on the whole battery.

use serde::Serialize;

use crate::curve::concavity_diagnostics;
use crate::error::Result;
use crate::logconcave::{
    bloat_check, loomis_whitney_check, sample_typical_point, typical_family, LogConcaveDensity,
    LwMethod, TypicalSetSpec,
};
use crate::rng::stream_rng;
use crate::superconv::{legendre_conjugate, SuperConvFamily};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Signed slack: nonnegative means the property held with room to spare.
    pub margin: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, pass: bool, margin: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            margin,
            detail: detail.into(),
        }
    }
}

/// The three closed-form families the suites exercise.
fn builtin_families(max_n: usize) -> Result<Vec<(&'static str, SuperConvFamily)>> {
    let gaussian = LogConcaveDensity::gaussian(1.0)?;
    Ok(vec![
        ("cube", SuperConvFamily::cube_family(1.0, max_n)?),
        ("ball", typical_family(&gaussian, 0.1, max_n)?),
        (
            "crosspolytope",
            SuperConvFamily::crosspolytope_family(1.0, max_n)?,
        ),
    ])
}

/// Super-convolutivity margins for the builtin families up to n = `up_to`.
pub fn suite_superconvolutive(up_to: usize) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (name, fam) in builtin_families(up_to)? {
        let rep = fam.check_superconvolutive(up_to, 1e-9);
        out.push(CheckResult::new(
            format!("superconv.{name}"),
            rep.pass,
            -rep.worst_log_margin,
            format!(
                "worst log margin {:.3e} at (m,n,i)={:?}",
                rep.worst_log_margin, rep.worst_at
            ),
        ));
    }
    Ok(out)
}

/// Alexandrov–Fenchel log-concavity margins for closed forms up to n_max.
pub fn suite_alexandrov_fenchel(n_max: usize) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (name, fam) in builtin_families(n_max)? {
        let mut worst = f64::INFINITY;
        let mut worst_n = 0;
        for n in 1..=fam.max_n() {
            let rep = fam.seq(n).check_alexandrov_fenchel(1e-9);
            if rep.worst_margin < worst {
                worst = rep.worst_margin;
                worst_n = n;
            }
        }
        // Quadrature-backed crosspolytope values carry ~1e-10 relative error;
        // 1e-9 absorbs it.
        out.push(CheckResult::new(
            format!("alexandrov_fenchel.{name}"),
            worst >= -1e-9,
            worst,
            format!("worst margin {worst:.3e} at n={worst_n}"),
        ));
        // Concavity of a_n(·) is implied; cross-checked directly.
        let conc = concavity_diagnostics(&fam, 1e-9);
        out.push(CheckResult::new(
            format!("concavity.{name}"),
            conc.pass,
            conc.worst_normalized_margin,
            format!("worst normalized margin at n={}", conc.worst_n),
        ));
    }
    Ok(out)
}

/// Λ̂ bounds g₁ ≤ Λ̂ ≤ max(γ̂, t+γ̂) and superadditivity g_n ≤ g_{2n} on a
/// 21-point t grid.
pub fn suite_lambda_bounds(max_n: usize) -> Result<Vec<CheckResult>> {
    let t_grid: Vec<f64> = (0..21).map(|i| -2.0 + 0.2 * i as f64).collect();
    let mut out = Vec::new();
    for (name, fam) in builtin_families(max_n)? {
        let mut lower_margin = f64::INFINITY;
        let mut upper_margin = f64::INFINITY;
        let mut monotone_margin = f64::INFINITY;
        let mut convexity_margin = f64::INFINITY;
        let mut superadd_margin = f64::INFINITY;
        let mut prev_vals = Vec::new();
        for &t in &t_grid {
            let est = fam.estimate_lambda(t);
            lower_margin = lower_margin.min(est.lower_bracket - fam.g(1, t));
            upper_margin = upper_margin.min(est.upper_envelope - est.lower_bracket);
            prev_vals.push(est.lower_bracket);
        }
        for w in prev_vals.windows(2) {
            monotone_margin = monotone_margin.min(w[1] - w[0]);
        }
        for w in prev_vals.windows(3) {
            convexity_margin = convexity_margin.min(w[0] - 2.0 * w[1] + w[2]);
        }
        let mut n = 1;
        while 2 * n <= fam.max_n() {
            for &t in &t_grid {
                superadd_margin = superadd_margin.min(fam.g(2 * n, t) - fam.g(n, t));
            }
            n *= 2;
        }
        out.push(CheckResult::new(
            format!("lambda_bounds.{name}.lower"),
            lower_margin >= -1e-9,
            lower_margin,
            "g₁(t) ≤ Λ̂(t)",
        ));
        out.push(CheckResult::new(
            format!("lambda_bounds.{name}.upper"),
            upper_margin >= -1e-9,
            upper_margin,
            "Λ̂(t) ≤ max(γ̂, t+γ̂)",
        ));
        out.push(CheckResult::new(
            format!("lambda_bounds.{name}.nondecreasing"),
            monotone_margin >= -1e-9,
            monotone_margin,
            "Λ̂ is nondecreasing on the t grid",
        ));
        out.push(CheckResult::new(
            format!("lambda_bounds.{name}.convex"),
            convexity_margin >= -1e-9,
            convexity_margin,
            "second differences of Λ̂ on the t grid",
        ));
        out.push(CheckResult::new(
            format!("gn_superadditive.{name}"),
            superadd_margin >= -1e-9,
            superadd_margin,
            "g_n(t) ≤ g_{2n}(t) along the doubling chain",
        ));
    }
    Ok(out)
}

/// Typical-set concatenation (the product of typical sets sits inside the
/// higher-dimensional typical set), by random trials.
pub fn suite_concatenation(trials: u32, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (name, density) in [
        ("gaussian", LogConcaveDensity::gaussian(1.0)?),
        ("laplace", LogConcaveDensity::laplace(1.0)?),
    ] {
        let mut rng = stream_rng(seed, 10);
        let mut failures = 0u32;
        for _ in 0..trials {
            let m = 1 + (rand::Rng::gen::<u32>(&mut rng) % 5) as usize;
            let n = 1 + (rand::Rng::gen::<u32>(&mut rng) % 5) as usize;
            let sm = TypicalSetSpec::new(density.clone(), m, 0.1)?;
            let sn = TypicalSetSpec::new(density.clone(), n, 0.1)?;
            let smn = TypicalSetSpec::new(density.clone(), m + n, 0.1)?;
            let mut xy = sample_typical_point(&sm, &mut rng);
            xy.extend(sample_typical_point(&sn, &mut rng));
            if !smn.contains(&xy) {
                failures += 1;
            }
        }
        out.push(CheckResult::new(
            format!("concatenation.{name}"),
            failures == 0,
            -(failures as f64),
            format!("{failures} failures in {trials} trials"),
        ));
    }
    Ok(out)
}

/// Bloating: (1+α)-scaled boundary points of the lower typical set leave the
/// upper one, for the Gaussian and Laplace families.
pub fn suite_bloat(trials: u32, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (name, density, eps) in [
        ("gaussian", LogConcaveDensity::gaussian(1.0)?, 0.1),
        ("laplace", LogConcaveDensity::laplace(1.0)?, 0.05),
    ] {
        let rep = bloat_check(&density, eps, 5, trials, seed)?;
        out.push(CheckResult::new(
            format!("bloat.{name}"),
            rep.failures == 0,
            -(rep.failures as f64),
            format!(
                "α = {:.6}, {} failures in {} trials",
                rep.alpha, rep.failures, rep.trials
            ),
        ));
    }
    Ok(out)
}

/// Loomis–Whitney-type margins: closed forms for uniform and Gaussian
/// (margin ≥ 0) and the Steiner-fit route for Laplace at n = 2
/// (margin ≥ −3σ in log-domain).
pub fn suite_loomis_whitney(samples: u64, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let u = TypicalSetSpec::new(LogConcaveDensity::uniform(2.0)?, 5, 0.1)?;
    for m in 0..=5 {
        let rep = loomis_whitney_check(&u, m, LwMethod::ClosedForm)?;
        out.push(CheckResult::new(
            format!("loomis_whitney.uniform.m{m}"),
            rep.margin >= -1e-9,
            rep.margin,
            format!(
                "log bound {:.4} vs log V_m {:.4}",
                rep.log_bound, rep.log_vm
            ),
        ));
    }
    let g = TypicalSetSpec::new(LogConcaveDensity::gaussian(1.0)?, 3, 0.1)?;
    for m in 0..=3 {
        let rep = loomis_whitney_check(&g, m, LwMethod::ClosedForm)?;
        out.push(CheckResult::new(
            format!("loomis_whitney.gaussian.m{m}"),
            rep.margin >= -1e-9,
            rep.margin,
            format!(
                "log bound {:.4} vs log V_m {:.4}",
                rep.log_bound, rep.log_vm
            ),
        ));
    }
    let l = TypicalSetSpec::new(LogConcaveDensity::laplace(1.0)?, 2, 0.1)?;
    let rep = loomis_whitney_check(&l, 1, LwMethod::SteinerFit { samples, seed })?;
    let sigma = rep.stderr_log.unwrap_or(0.0);
    out.push(CheckResult::new(
        "loomis_whitney.laplace.m1",
        rep.margin >= -3.0 * sigma,
        rep.margin,
        format!(
            "Steiner-fit margin {:.4} with log-σ {:.4}",
            rep.margin, sigma
        ),
    ));
    Ok(out)
}

/// The large-deviations sandwich on the cube family: the window-mass
/// exponent at n = 400 sits within `tol` of the window sup of −Λ*(θ).
pub fn suite_sandwich(tol: f64) -> Result<Vec<CheckResult>> {
    let fam = SuperConvFamily::cube_family(1.0, 400)?;
    let (a, b) = (0.4, 0.6);
    let mass = fam.log_interval_mass(400, a, b);
    // sup of −Λ̂* over the window, via conjugates on a fine subgrid.
    let mut sup = f64::NEG_INFINITY;
    for k in 0..=20 {
        let theta = a + (b - a) * k as f64 / 20.0;
        let bracket = fam.conjugate_bracket(theta).unwrap_or((-4.0, 4.0));
        let conj = legendre_conjugate(|t| fam.lambda_envelope(t), theta, bracket)?;
        sup = sup.max(-conj.value);
    }
    let diff = (mass - sup).abs();
    let mut out = vec![CheckResult::new(
        "sandwich.cube.window_mass",
        diff <= tol,
        tol - diff,
        format!(
            "mass exponent {mass:.5} vs sup −Λ* {sup:.5} (log 2 = {:.5})",
            2.0f64.ln()
        ),
    )];
    // Two-sided sandwich with the coarser 0.05 slack.
    out.push(CheckResult::new(
        "sandwich.cube.upper",
        mass <= sup + 0.05,
        sup + 0.05 - mass,
        "mass ≤ sup over the closed window + 0.05",
    ));
    out.push(CheckResult::new(
        "sandwich.cube.lower",
        mass >= sup - 0.05,
        mass - (sup - 0.05),
        "mass ≥ sup over the open window − 0.05",
    ));
    Ok(out)
}

/// The strict endpoint gap family: Λ(t) matches the brute-force limit,
/// Λ*(1) = −log α while the volume-rate route reports ≈ 0.
pub fn suite_endpoint_gap(alpha: f64, delta: f64) -> Result<Vec<CheckResult>> {
    let fam = SuperConvFamily::endpoint_gap_family(alpha, delta, 400)?;
    let mut out = Vec::new();

    let sc = fam.check_superconvolutive(40, 1e-9);
    out.push(CheckResult::new(
        "endpoint_gap.superconvolutive",
        sc.pass,
        -sc.worst_log_margin,
        format!("worst log margin {:.3e}", sc.worst_log_margin),
    ));

    let mut worst = f64::INFINITY;
    for t in [-1.0, 0.0, 1.0] {
        let est = fam.estimate_lambda(t);
        let exact = (1.0 + alpha * t.exp()).ln();
        worst = worst.min(1e-3 - (est.refined - exact).abs());
    }
    out.push(CheckResult::new(
        "endpoint_gap.lambda_values",
        worst >= 0.0,
        worst,
        "refined Λ̂ within 1e-3 of log(1+αeᵗ) at t ∈ {−1,0,1}",
    ));

    let report = fam.endpoint_report();
    let conj1 = report
        .conj_at_one
        .expect("endpoint conjugate must evaluate");
    let want = -alpha.ln();
    out.push(CheckResult::new(
        "endpoint_gap.lambda_star_one",
        (conj1 - want).abs() <= 1e-3,
        1e-3 - (conj1 - want).abs(),
        format!("Λ*(1) ≈ {conj1:.6} vs −log α = {want:.6}"),
    ));
    out.push(CheckResult::new(
        "endpoint_gap.volume_rate",
        report.minus_alpha.abs() <= 0.01,
        0.01 - report.minus_alpha.abs(),
        format!("−α̂ = {:.6} (→ 0), strictly above Λ*(1)", report.minus_alpha),
    ));
    Ok(out)
}

/// Pipeline-level curve properties on the closed-form densities: accuracy
/// against the known curves, endpoint brackets, dominance and linear bounds
/// per ε, monotonicity in ε, and concavity of the final curve.
pub fn suite_curve_properties(n_max: usize) -> Result<Vec<CheckResult>> {
    use crate::curve::{
        endpoint_checks, estimate_curve, gaussian_h_theta, uniform_h_theta, CurveOptions,
    };
    use crate::logdomain::binary_entropy;

    let mut out = Vec::new();

    let g = LogConcaveDensity::gaussian(1.0)?;
    let grid: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let curve = estimate_curve(
        &g,
        &grid,
        &[0.2, 0.1, 0.05, 0.025],
        n_max,
        CurveOptions::default(),
    )?;
    let mut err = 0.0f64;
    for (i, &theta) in curve.theta_grid.iter().enumerate() {
        err = err.max((curve.values[i] - gaussian_h_theta(1.0, theta)).abs());
    }
    out.push(CheckResult::new(
        "curve.gaussian.accuracy",
        err <= 0.02,
        0.02 - err,
        format!("max |ĥ − h| = {err:.5} over θ ∈ {{0.1..0.9}}, nMax = {n_max}"),
    ));
    let checks = endpoint_checks(&curve);
    out.push(CheckResult::new(
        "curve.gaussian.endpoints",
        checks.zero_ok && checks.one_ok,
        0.0,
        format!(
            "h(0) bracket [{:.4}, {:.4}] ∋ 0; h(1) bracket [{:.4}, {:.4}] ∋ {:.4}",
            curve.endpoint_zero.lo,
            curve.endpoint_zero.hi,
            curve.endpoint_one.lo,
            curve.endpoint_one.hi,
            curve.entropy
        ),
    ));
    out.push(CheckResult::new(
        "curve.gaussian.dominance",
        checks.dominance_ok,
        checks.worst_dominance_margin,
        "h_X(θ) ≤ H(θ) + h − (1−θ)η on the grid",
    ));
    let mut mono = f64::INFINITY;
    for pair in curve.per_eps.windows(2) {
        for i in 0..curve.theta_grid.len() {
            mono = mono.min(pair[0].values[i] - pair[1].values[i]);
        }
    }
    out.push(CheckResult::new(
        "curve.gaussian.monotone_in_eps",
        mono >= -1e-9,
        mono,
        "per-ε curves decrease pointwise as ε shrinks",
    ));
    let mut linear = f64::INFINITY;
    let mut upper = f64::INFINITY;
    for pe in &curve.per_eps {
        for (i, &theta) in curve.theta_grid.iter().enumerate() {
            linear = linear.min(pe.values[i] - theta * (curve.entropy - pe.eps));
            let bound = binary_entropy(theta) + curve.entropy + pe.eps - (1.0 - theta) * curve.eta;
            upper = upper.min(bound - pe.values[i]);
        }
    }
    out.push(CheckResult::new(
        "curve.gaussian.linear_lower_bound",
        linear >= -1e-9,
        linear,
        "per-ε curve ≥ θ(h−ε)",
    ));
    out.push(CheckResult::new(
        "curve.gaussian.upper_dominance_per_eps",
        upper >= -1e-9,
        upper,
        "per-ε curve ≤ H(θ) + h + ε − (1−θ)η",
    ));
    let sd = curve.max_second_difference();
    out.push(CheckResult::new(
        "curve.gaussian.concave",
        sd <= 1e-6,
        1e-6 - sd,
        format!("max second difference {sd:.3e}"),
    ));

    let u = LogConcaveDensity::uniform(2.0)?;
    let fine: Vec<f64> = (1..=99).map(|k| k as f64 / 100.0).collect();
    let curve = estimate_curve(&u, &fine, &[0.2, 0.1], n_max, CurveOptions::default())?;
    let mut err = 0.0f64;
    for (i, &theta) in curve.theta_grid.iter().enumerate() {
        err = err.max((curve.values[i] - uniform_h_theta(2.0, theta)).abs());
    }
    out.push(CheckResult::new(
        "curve.uniform.exact",
        err <= 1e-8,
        1e-8 - err,
        format!("max |ĥ − h| = {err:.3e} on a 99-point grid"),
    ));
    let sd = curve.max_second_difference();
    out.push(CheckResult::new(
        "curve.uniform.concave",
        sd <= 1e-6,
        1e-6 - sd,
        format!("max second difference {sd:.3e}"),
    ));
    Ok(out)
}

/// Entropy-power-inequality conjecture evidence for a Gaussian pair: the
/// θ = 1 endpoint must reproduce the classical saturation; interior rows are
/// reported, never asserted.
pub fn suite_epi(nu1: f64, nu2: f64) -> Result<Vec<CheckResult>> {
    use crate::curve::epi_conjecture_check;
    let x = LogConcaveDensity::gaussian(nu1)?;
    let y = LogConcaveDensity::gaussian(nu2)?;
    let grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let rep = epi_conjecture_check(&x, &y, &grid)?;
    let sat = rep.theta_one_relative_deficit;
    // e^{2h_θ(ν)/θ} is linear in ν, so Gaussian pairs saturate the
    // conjectured inequality at every θ; deficits are float noise around 0.
    let worst_rel = rep
        .rows
        .iter()
        .map(|r| (r.deficit / r.rhs).abs())
        .fold(0.0f64, f64::max);
    Ok(vec![
        CheckResult::new(
            "epi.theta_one_saturation",
            sat <= 1e-10,
            1e-10 - sat,
            format!("relative deficit {sat:.3e} at θ = 1 (classical Gaussian EPI equality)"),
        ),
        CheckResult::new(
            "epi.evidence",
            true,
            0.0,
            format!(
                "{} — max relative |lhs−rhs| = {worst_rel:.3e} over θ grid (Gaussian pairs \
                 saturate the conjectured inequality)",
                rep.label
            ),
        ),
    ])
}

/// The whole battery behind `verify --all`.
pub fn suite_all() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    out.extend(suite_superconvolutive(40)?);
    out.extend(suite_alexandrov_fenchel(400)?);
    out.extend(suite_lambda_bounds(400)?);
    out.extend(suite_concatenation(100_000, 2024)?);
    out.extend(suite_bloat(10_000, 2024)?);
    out.extend(suite_loomis_whitney(1_000_000, 2024)?);
    out.extend(suite_sandwich(0.02)?);
    out.extend(suite_endpoint_gap(2.0, 0.25)?);
    out.extend(suite_curve_properties(400)?);
    out.extend(suite_epi(1.0, 1.0)?);
    Ok(out)
}
