//! `ivlab` — intrinsic volumes of convex bodies and intrinsic entropy curves
//! of log-concave distributions.
//!
//! Subcommands: `iv` (closed-form intrinsic volumes and Monte-Carlo Steiner
//! fits), `h-theta` (entropy curves through the typical-set pipeline), and
//! `verify` (the property-suite battery).
//!
//! All logarithms are natural (nats). Exit codes: 0 success, 1 failed
//! invariant, 2 usage error, 3 non-convergent ladder (a band report is still
//! written).

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use ivlab::suites;
use ivlab::{
    chebyshev_radii, estimate_curve, gaussian_h_theta, steiner_fit, uniform_h_theta,
    ConvexBodySpec, CurveOptions, LogConcaveDensity,
};
use output::{emit_csv, emit_json, resolve_out, OutputFormat, RunConfig};

const EXIT_INVARIANT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ivlab",
    version,
    about = "Intrinsic volumes and intrinsic entropy curves (natural logs throughout)",
    long_about = "Numerical laboratory for intrinsic volumes of convex bodies and the \
                  intrinsic entropy curve h_X(θ) of log-concave densities.\n\
                  All logarithms and entropies are natural (nats).\n\
                  Exit codes: 0 ok, 1 invariant failure, 2 usage, 3 ladder non-convergence."
)]
struct Cli {
    /// Key-value config file (`flag = value` per line) supplying defaults for
    /// any flag not given on the command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Bound the rayon worker pool (0 = number of cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Intrinsic volumes: closed forms and Steiner fits
    Iv {
        #[command(subcommand)]
        cmd: IvCmd,
    },
    /// Intrinsic entropy curves h_X(θ)
    #[command(name = "h-theta")]
    HTheta {
        #[command(subcommand)]
        cmd: HThetaCmd,
    },
    /// Run property suites; exit 0 iff every check passes
    Verify(VerifyArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Output file (relative paths land in $IVLAB_OUT_DIR); stdout if unset.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Subcommand)]
enum IvCmd {
    /// Euclidean ball B_n(r)
    Ball {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: f64,
        /// Fail (exit 1) if the Alexandrov–Fenchel check fails
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Cube [0,A]^n
    Cube {
        #[arg(long)]
        n: usize,
        #[arg(long = "A")]
        side: f64,
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Crosspolytope {x : Σ|x_i| ≤ An}
    Crosspolytope {
        #[arg(long)]
        n: usize,
        #[arg(long = "A")]
        scale: f64,
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Steiner-fit a membership oracle (names like cube2, ball3, crosspolytope2)
    Fit {
        #[arg(long)]
        oracle: String,
        /// Size parameter of the named body (radius / side / scale)
        #[arg(long, default_value_t = 1.0)]
        size: f64,
        /// Samples per tube radius (scientific notation accepted)
        #[arg(long, default_value = "1e6", value_parser = parse_count)]
        samples: u64,
        /// Comma-separated tube radii; Chebyshev-spaced in [0.1, 2]·diam if unset
        #[arg(long)]
        t_grid: Option<String>,
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Args)]
struct CurveArgs {
    /// Number of interior grid points k/(N+1), k = 1..N
    #[arg(long, default_value_t = 99)]
    theta_points: usize,
    /// Decreasing ε ladder
    #[arg(long, default_value = "0.2,0.1,0.05,0.025")]
    eps_ladder: String,
    /// Largest family dimension (default 400 closed-form, 3 for oracle densities)
    #[arg(long)]
    n_max: Option<usize>,
    /// Emit the closed-form curve, bypassing the pipeline (gaussian/uniform)
    #[arg(long)]
    closed_form: bool,
    /// Monte-Carlo samples per tube radius for oracle densities
    #[arg(long, default_value = "2e5", value_parser = parse_count)]
    fit_samples: u64,
    /// Also write the smallest-ε typical-set family as JSON lines
    #[arg(long)]
    dump_family: Option<PathBuf>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Subcommand)]
enum HThetaCmd {
    Gaussian {
        #[arg(long)]
        nu: f64,
        #[command(flatten)]
        curve: CurveArgs,
    },
    Uniform {
        #[arg(long = "A")]
        side: f64,
        #[command(flatten)]
        curve: CurveArgs,
    },
    Laplace {
        #[arg(long)]
        b: f64,
        #[command(flatten)]
        curve: CurveArgs,
    },
    Exponential {
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Tabulated potential: CSV of `x,phi` rows plus declared tail slopes
    Custom {
        #[arg(long)]
        table: PathBuf,
        /// `left,right` slopes of Φ beyond the table
        #[arg(long, default_value = "-1,1")]
        tail_slopes: String,
        /// Shift Φ by log ∫e^{−Φ} before use
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        curve: CurveArgs,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Run every suite
    #[arg(long)]
    all: bool,
    /// One of: superconv, alexandrov-fenchel, lambda-bounds, concat, bloat,
    /// loomis-whitney, sandwich, appendix-example, epi, curve
    #[arg(long)]
    suite: Option<String>,
    /// Restrict family-parameterized suites to cube | ball | crosspolytope
    #[arg(long)]
    family: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    nu1: f64,
    #[arg(long, default_value_t = 1.0)]
    nu2: f64,
    /// Reduced trial counts for smoke runs
    #[arg(long)]
    quick: bool,
    #[command(flatten)]
    io: IoArgs,
}

// Accepts plain integers and scientific counts like 1e6.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if !(1.0..=1e15).contains(&v) {
        return Err("count must be between 1 and 1e15".into());
    }
    Ok(v as u64)
}

// CLI-side validation failures are usage errors (exit 2).
fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ivlab::Error::InvalidParameter(msg.into()))
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad number {tok:?}")))
        })
        .collect()
}

fn main() -> ExitCode {
    let args = expand_config(std::env::args().collect());
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through this path too (exit 0).
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .downcast_ref::<ivlab::Error>()
                .map(|err| {
                    matches!(
                        err,
                        ivlab::Error::InvalidParameter(_) | ivlab::Error::InvalidDimension(_)
                    )
                })
                .unwrap_or(false);
            ExitCode::from(if usage { EXIT_USAGE } else { EXIT_INVARIANT })
        }
    }
}

/// Fill argv with `--key value` pairs from the `--config` file for flags not
/// already present.
fn expand_config(mut args: Vec<String>) -> Vec<String> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return args;
    };
    let Some(path) = args.get(pos + 1).cloned() else {
        return args;
    };
    let Ok(body) = std::fs::read_to_string(&path) else {
        return args;
    };
    for line in body.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        let flag = format!("--{}", key.trim());
        if !args.contains(&flag) {
            args.push(flag);
            args.push(value.trim().to_string());
        }
    }
    args
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Iv { cmd } => run_iv(cmd),
        Command::HTheta { cmd } => run_h_theta(cmd),
        Command::Verify(args) => run_verify(args),
    }
}

// ---------------------------------------------------------------- iv

fn run_iv(cmd: IvCmd) -> Result<u8> {
    match cmd {
        IvCmd::Ball { n, r, verify, io } => {
            let spec = ConvexBodySpec::ball(n, r)?;
            let config = RunConfig::new("iv.ball", io.seed, io.format)
                .param("n", n)
                .param("r", r);
            emit_sequence(&spec, verify, config, io)
        }
        IvCmd::Cube {
            n,
            side,
            verify,
            io,
        } => {
            let spec = ConvexBodySpec::cube(n, side)?;
            let config = RunConfig::new("iv.cube", io.seed, io.format)
                .param("n", n)
                .param("A", side);
            emit_sequence(&spec, verify, config, io)
        }
        IvCmd::Crosspolytope {
            n,
            scale,
            verify,
            io,
        } => {
            let spec = ConvexBodySpec::crosspolytope(n, scale)?;
            let config = RunConfig::new("iv.crosspolytope", io.seed, io.format)
                .param("n", n)
                .param("A", scale);
            emit_sequence(&spec, verify, config, io)
        }
        IvCmd::Fit {
            oracle,
            size,
            samples,
            t_grid,
            verify,
            io,
        } => {
            let spec = named_body(&oracle, size)?;
            let grid = match &t_grid {
                Some(s) => parse_f64_list(s)?,
                None => chebyshev_radii(spec.diameter(), spec.dim() + 3),
            };
            let fit = steiner_fit(&spec.to_oracle()?, &grid, samples, io.seed)?;
            let config = RunConfig::new("iv.fit", io.seed, io.format)
                .param("oracle", &oracle)
                .param("size", size)
                .param("samples", samples)
                .param("t_grid", format!("{grid:?}"));
            let af = fit.estimates.check_alexandrov_fenchel(1e-9);
            let out = resolve_out(io.out);
            match io.format {
                OutputFormat::Json => emit_json(&config, &fit, out.as_deref())?,
                OutputFormat::Csv => {
                    let mut rows = String::from("j,log_v,v,stderr\n");
                    for j in 0..=fit.estimates.dim() {
                        let lv = fit.estimates.log_v(j);
                        rows.push_str(&format!("{j},{lv},{},{}\n", lv.exp(), fit.stderrs[j]));
                    }
                    emit_csv(&config, &rows, out.as_deref())?;
                }
            }
            Ok(if verify && !af.pass {
                EXIT_INVARIANT
            } else {
                0
            })
        }
    }
}

fn emit_sequence(spec: &ConvexBodySpec, verify: bool, config: RunConfig, io: IoArgs) -> Result<u8> {
    let seq = spec.intrinsic_volumes()?;
    let af = seq.check_alexandrov_fenchel(1e-9);
    let out = resolve_out(io.out);
    match io.format {
        OutputFormat::Json => {
            #[derive(serde::Serialize)]
            struct IvResult<'a> {
                sequence: &'a ivlab::IntrinsicVolumeSequence,
                volumes: Vec<f64>,
                alexandrov_fenchel: &'a ivlab::sequence::AlexandrovFenchelReport,
            }
            emit_json(
                &config,
                &IvResult {
                    sequence: &seq,
                    volumes: seq.values(),
                    alexandrov_fenchel: &af,
                },
                out.as_deref(),
            )?;
        }
        OutputFormat::Csv => {
            let mut rows = String::from("j,log_v,v\n");
            for j in 0..=seq.dim() {
                rows.push_str(&format!("{j},{},{}\n", seq.log_v(j), seq.log_v(j).exp()));
            }
            emit_csv(&config, &rows, out.as_deref())?;
        }
    }
    Ok(if verify && !af.pass {
        EXIT_INVARIANT
    } else {
        0
    })
}

/// Bodies addressable by name in `iv fit`: family prefix + dimension suffix.
fn named_body(name: &str, size: f64) -> Result<ConvexBodySpec> {
    let split = name.find(|c: char| c.is_ascii_digit()).ok_or_else(|| {
        usage(format!(
            "oracle name needs a trailing dimension, e.g. cube2 or ball3: {name:?}"
        ))
    })?;
    let (family, dim) = name.split_at(split);
    let dim: usize = dim
        .parse()
        .map_err(|_| usage(format!("bad dimension in {name:?}")))?;
    Ok(match family {
        "cube" => ConvexBodySpec::cube(dim, size)?,
        "ball" => ConvexBodySpec::ball(dim, size)?,
        "crosspolytope" | "cp" => ConvexBodySpec::crosspolytope(dim, size)?,
        other => {
            return Err(usage(format!(
                "unknown oracle family {other:?} (cube|ball|crosspolytope)"
            )))
        }
    })
}

// ---------------------------------------------------------------- h-theta

fn run_h_theta(cmd: HThetaCmd) -> Result<u8> {
    let (density, curve_args, mut config) = match cmd {
        HThetaCmd::Gaussian { nu, curve } => {
            let cfg =
                RunConfig::new("h-theta.gaussian", curve.io.seed, curve.io.format).param("nu", nu);
            (LogConcaveDensity::gaussian(nu)?, curve, cfg)
        }
        HThetaCmd::Uniform { side, curve } => {
            let cfg =
                RunConfig::new("h-theta.uniform", curve.io.seed, curve.io.format).param("A", side);
            (LogConcaveDensity::uniform(side)?, curve, cfg)
        }
        HThetaCmd::Laplace { b, curve } => {
            let cfg =
                RunConfig::new("h-theta.laplace", curve.io.seed, curve.io.format).param("b", b);
            (LogConcaveDensity::laplace(b)?, curve, cfg)
        }
        HThetaCmd::Exponential { lambda, curve } => {
            let cfg = RunConfig::new("h-theta.exponential", curve.io.seed, curve.io.format)
                .param("lambda", lambda);
            (LogConcaveDensity::exponential(lambda)?, curve, cfg)
        }
        HThetaCmd::Custom {
            table,
            tail_slopes,
            normalize,
            curve,
        } => {
            let body = std::fs::read_to_string(&table)
                .with_context(|| format!("reading {}", table.display()))?;
            let mut points = Vec::new();
            for line in body.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') || line.starts_with("x,") {
                    continue;
                }
                let (x, p) = line
                    .split_once(',')
                    .ok_or_else(|| usage(format!("table rows must be `x,phi`: {line:?}")))?;
                points.push((x.trim().parse::<f64>()?, p.trim().parse::<f64>()?));
            }
            let slopes = parse_f64_list(&tail_slopes)?;
            if slopes.len() != 2 {
                return Err(usage("--tail-slopes needs exactly two values, e.g. -1,1"));
            }
            let mut d = LogConcaveDensity::custom_from_table(
                &table.display().to_string(),
                &points,
                (slopes[0], slopes[1]),
            );
            if d.is_err() && normalize {
                // Retry with an explicit normalization pass: rebuild from an
                // unchecked shifted table by integrating the raw potential.
                d = normalize_table(&points, (slopes[0], slopes[1]));
            }
            let cfg = RunConfig::new("h-theta.custom", curve.io.seed, curve.io.format)
                .param("table", table.display())
                .param("tail_slopes", &tail_slopes);
            (d?, curve, cfg)
        }
    };

    let grid: Vec<f64> = (1..=curve_args.theta_points)
        .map(|k| k as f64 / (curve_args.theta_points + 1) as f64)
        .collect();
    let ladder = parse_f64_list(&curve_args.eps_ladder)?;
    let closed_form_family = matches!(
        density.family(),
        ivlab::logconcave::DensityFamily::Gaussian { .. }
            | ivlab::logconcave::DensityFamily::Uniform { .. }
    );
    let n_max = curve_args
        .n_max
        .unwrap_or(if closed_form_family { 400 } else { 3 });
    config = config
        .param("theta_points", curve_args.theta_points)
        .param("eps_ladder", &curve_args.eps_ladder)
        .param("n_max", n_max)
        .param("closed_form", curve_args.closed_form);
    let out = resolve_out(curve_args.io.out);

    if curve_args.closed_form {
        let rows: Vec<(f64, f64)> = match density.family() {
            ivlab::logconcave::DensityFamily::Gaussian { nu } => grid
                .iter()
                .map(|&t| (t, gaussian_h_theta(*nu, t)))
                .collect(),
            ivlab::logconcave::DensityFamily::Uniform { side } => grid
                .iter()
                .map(|&t| (t, uniform_h_theta(*side, t)))
                .collect(),
            other => {
                return Err(usage(format!(
                    "--closed-form is only available for gaussian/uniform, not {other:?}"
                )))
            }
        };
        match curve_args.io.format {
            OutputFormat::Csv => {
                let mut body = String::from("theta,h,lo,hi\n");
                for (t, h) in &rows {
                    body.push_str(&format!("{t},{h},{h},{h}\n"));
                }
                emit_csv(&config, &body, out.as_deref())?;
            }
            OutputFormat::Json => {
                #[derive(serde::Serialize)]
                struct ClosedForm {
                    theta: Vec<f64>,
                    h: Vec<f64>,
                }
                let result = ClosedForm {
                    theta: rows.iter().map(|r| r.0).collect(),
                    h: rows.iter().map(|r| r.1).collect(),
                };
                emit_json(&config, &result, out.as_deref())?;
            }
        }
        return Ok(0);
    }

    let opts = CurveOptions {
        seed: curve_args.io.seed,
        fit_samples: curve_args.fit_samples,
        ..CurveOptions::default()
    };
    let curve = estimate_curve(&density, &grid, &ladder, n_max, opts)?;
    match curve_args.io.format {
        OutputFormat::Csv => emit_csv(&config, &curve.to_csv(), out.as_deref())?,
        OutputFormat::Json => emit_json(&config, &curve, out.as_deref())?,
    }
    if let Some(path) = resolve_out(curve_args.dump_family) {
        let eps_last = ladder.iter().cloned().fold(f64::INFINITY, f64::min);
        let fam = if closed_form_family {
            ivlab::logconcave::typical_family(&density, eps_last, n_max)?
        } else {
            ivlab::logconcave::fitted_typical_family(
                &density,
                eps_last,
                n_max.min(3),
                curve_args.fit_samples,
                curve_args.io.seed,
            )?
        };
        std::fs::write(&path, fam.to_jsonl())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if curve.converged {
        0
    } else {
        EXIT_NONCONVERGED
    })
}

// Shift a tabulated potential by log Z so it normalizes, then rebuild.
fn normalize_table(points: &[(f64, f64)], slopes: (f64, f64)) -> ivlab::Result<LogConcaveDensity> {
    // One Newton-free pass: integrate e^{−Φ} for the raw table on a wide
    // window and shift every Φ entry by log Z.
    let lo = points.first().unwrap().0 - 60.0;
    let hi = points.last().unwrap().0 + 60.0;
    let pts = points.to_vec();
    let phi = move |x: f64| -> f64 {
        let (x0, p0) = pts[0];
        let (x1, p1) = *pts.last().unwrap();
        if x < x0 {
            return p0 + slopes.0 * (x - x0);
        }
        if x > x1 {
            return p1 + slopes.1 * (x - x1);
        }
        let idx = pts.partition_point(|&(xi, _)| xi <= x).min(pts.len() - 1);
        let (xa, pa) = pts[idx - 1];
        let (xb, pb) = pts[idx];
        pa + (pb - pa) * (x - xa) / (xb - xa)
    };
    let (z, _) = ivlab::quad::integrate(|x| (-phi(x)).exp(), lo, hi, 1e-10)?;
    let log_z = z.ln();
    let shifted: Vec<(f64, f64)> = points.iter().map(|&(x, p)| (x, p + log_z)).collect();
    LogConcaveDensity::custom_from_table("normalized-table", &shifted, slopes)
}

// ---------------------------------------------------------------- verify

fn run_verify(args: VerifyArgs) -> Result<u8> {
    let quick = args.quick;
    let mut results: Vec<suites::CheckResult> = Vec::new();

    let wanted = if args.all {
        vec![
            "superconv",
            "alexandrov-fenchel",
            "lambda-bounds",
            "concat",
            "bloat",
            "loomis-whitney",
            "sandwich",
            "appendix-example",
            "curve",
            "epi",
        ]
    } else {
        match &args.suite {
            Some(name) => vec![name.as_str()],
            None => return Err(usage("pass --all or --suite NAME")),
        }
    };

    for suite in wanted {
        let batch = match suite {
            "superconv" => suites::suite_superconvolutive(if quick { 12 } else { 40 })?,
            "alexandrov-fenchel" | "af" => {
                suites::suite_alexandrov_fenchel(if quick { 60 } else { 400 })?
            }
            "lambda-bounds" | "gn-superadditivity" => {
                suites::suite_lambda_bounds(if quick { 64 } else { 400 })?
            }
            "concat" | "concatenation" => {
                suites::suite_concatenation(if quick { 2_000 } else { 100_000 }, args.io.seed)?
            }
            "bloat" => suites::suite_bloat(if quick { 500 } else { 10_000 }, args.io.seed)?,
            "loomis-whitney" | "lw" => {
                suites::suite_loomis_whitney(if quick { 100_000 } else { 1_000_000 }, args.io.seed)?
            }
            "sandwich" => suites::suite_sandwich(0.02)?,
            "appendix-example" | "endpoint-gap" => {
                suites::suite_endpoint_gap(args.alpha, args.delta)?
            }
            "curve" | "endpoints" => suites::suite_curve_properties(if quick { 100 } else { 400 })?,
            "epi" => suites::suite_epi(args.nu1, args.nu2)?,
            other => return Err(usage(format!("unknown suite {other:?}"))),
        };
        results.extend(batch);
    }

    if let Some(f) = &args.family {
        let tag = format!(".{f}");
        results.retain(|r| r.name.contains(&tag) || !r.name.starts_with("superconv"));
    }

    let mut all_pass = true;
    for r in &results {
        all_pass &= r.pass;
        println!(
            "{} {} margin={:+.6e} :: {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.margin,
            r.detail
        );
    }
    println!(
        "# {}/{} checks passed",
        results.iter().filter(|r| r.pass).count(),
        results.len()
    );

    let mut config = RunConfig::new("verify", args.io.seed, args.io.format)
        .param("all", args.all)
        .param("quick", quick);
    if let Some(s) = &args.suite {
        config = config.param("suite", s);
    }
    if let Some(out) = resolve_out(args.io.out) {
        emit_json(&config, &results, Some(out.as_path()))?;
    }
    Ok(if all_pass { 0 } else { EXIT_INVARIANT })
}
