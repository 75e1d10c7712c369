//! End-to-end tests of the `ivlab` binary: output schemas, determinism,
//! config-file expansion, and the exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

fn ivlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ivlab"))
        .args(args)
        .env_remove("IVLAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn iv_cube_emits_expected_volumes() {
    let out = ivlab(&["iv", "cube", "--n", "3", "--A", "2"]);
    let json = stdout_json(&out);
    let vols: Vec<f64> = json["result"]["volumes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (got, want) in vols.iter().zip([1.0, 6.0, 12.0, 8.0]) {
        assert!((got - want).abs() <= 1e-12 * want, "{vols:?}");
    }
    assert!(json["result"]["alexandrov_fenchel"]["pass"]
        .as_bool()
        .unwrap());
    assert_eq!(json["seed"], 7);
    assert!(json["config_hash"].as_str().unwrap().len() == 16);
}

#[test]
fn iv_ball_csv_has_provenance_header() {
    let out = ivlab(&["iv", "ball", "--n", "2", "--r", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# ivlab version=") && header.contains("config_hash="));
    assert_eq!(lines.next().unwrap(), "j,log_v,v");
    let last = text.lines().next_back().unwrap();
    let v: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!((v - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn fit_is_byte_identical_for_identical_config() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = dir.path().join("a.json");
    let f2 = dir.path().join("b.json");
    let f3 = dir.path().join("c.json");
    for (path, seed) in [(&f1, "7"), (&f2, "7"), (&f3, "8")] {
        let out = ivlab(&[
            "iv",
            "fit",
            "--oracle",
            "cube2",
            "--samples",
            "2e4",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let (a, b, c) = (
        std::fs::read(&f1).unwrap(),
        std::fs::read(&f2).unwrap(),
        std::fs::read(&f3).unwrap(),
    );
    assert_eq!(a, b, "same config + seed must be byte-identical");
    assert_ne!(a, c, "different seed must change the estimates");
}

#[test]
fn fit_report_carries_raw_samples_for_audit() {
    let out = ivlab(&[
        "iv",
        "fit",
        "--oracle",
        "ball2",
        "--samples",
        "2e4",
        "--seed",
        "3",
    ]);
    let json = stdout_json(&out);
    let raw = json["result"]["raw_volumes"].as_array().unwrap();
    assert!(raw.len() >= 3);
    for row in raw {
        assert_eq!(row["samples"], 20000);
        assert!(row["stderr"].as_f64().unwrap() > 0.0);
    }
    assert!(json["result"]["condition_number"].as_f64().unwrap() >= 1.0);
}

#[test]
fn bad_body_spec_is_a_usage_error() {
    let out = ivlab(&["iv", "cube", "--n", "0", "--A", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ivlab(&["iv", "fit", "--oracle", "pyramid9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn h_theta_closed_form_and_pipeline_agree_for_uniform() {
    let closed = ivlab(&[
        "h-theta",
        "uniform",
        "--A",
        "1",
        "--closed-form",
        "--theta-points",
        "9",
        "--format",
        "csv",
    ]);
    let piped = ivlab(&[
        "h-theta",
        "uniform",
        "--A",
        "1",
        "--theta-points",
        "9",
        "--n-max",
        "64",
        "--format",
        "csv",
    ]);
    assert!(closed.status.success() && piped.status.success());
    let parse = |o: &Output| -> Vec<(f64, f64)> {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .skip(2)
            .map(|l| {
                let cols: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
                (cols[0], cols[1])
            })
            .collect()
    };
    for ((t1, h1), (t2, h2)) in parse(&closed).into_iter().zip(parse(&piped)) {
        assert_eq!(t1, t2);
        assert!(
            (h1 - h2).abs() < 1e-8,
            "θ={t1}: closed {h1} vs pipeline {h2}"
        );
    }
}

#[test]
fn h_theta_laplace_band_exits_three() {
    let out = ivlab(&[
        "h-theta",
        "laplace",
        "--b",
        "1",
        "--n-max",
        "3",
        "--theta-points",
        "5",
        "--fit-samples",
        "2e4",
        "--format",
        "csv",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "band reports flag non-convergence"
    );
    let text = String::from_utf8(out.stdout).unwrap();
    // The band itself is still written.
    assert!(text.lines().count() >= 7);
    for line in text.lines().skip(2) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(
            cols[2] <= cols[1] && cols[1] <= cols[3],
            "h must sit inside [lo, hi]"
        );
    }
}

#[test]
fn verify_suite_passes_and_writes_machine_readable_lines() {
    let out = ivlab(&["verify", "--suite", "sandwich"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS ")).count() >= 3);
    assert!(text
        .lines()
        .any(|l| l.starts_with("# ") && l.contains("checks passed")));
}

#[test]
fn verify_quick_battery_is_green() {
    let out = ivlab(&["verify", "--all", "--quick"]);
    assert!(
        out.status.success(),
        "stdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn config_file_supplies_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "A = 2\nformat = csv\n# comment line\n").unwrap();
    let with_config = ivlab(&["iv", "cube", "--config", cfg.to_str().unwrap(), "--n", "3"]);
    let explicit = ivlab(&["iv", "cube", "--n", "3", "--A", "2", "--format", "csv"]);
    assert!(with_config.status.success());
    assert_eq!(with_config.stdout, explicit.stdout);
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ivlab"))
        .args(["iv", "cube", "--n", "2", "--A", "1", "--out", "seq.json"])
        .env("IVLAB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(Path::new(&dir.path().join("seq.json")).exists());
}

#[test]
fn dump_family_writes_jsonl_records() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("family.jsonl");
    let out = ivlab(&[
        "h-theta",
        "uniform",
        "--A",
        "2",
        "--theta-points",
        "3",
        "--n-max",
        "8",
        "--dump-family",
        fam.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&fam).unwrap();
    assert_eq!(text.lines().count(), 8);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["n"], 1);
    assert_eq!(first["log_v"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_family_filter_restricts_superconv_checks() {
    let out = ivlab(&[
        "verify",
        "--suite",
        "superconv",
        "--family",
        "cube",
        "--quick",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("superconv.cube"));
    assert!(!text.contains("superconv.ball"));
    assert!(!text.contains("superconv.crosspolytope"));
}

#[test]
fn verify_appendix_example_reports_the_gap() {
    let out = ivlab(&[
        "verify",
        "--suite",
        "appendix-example",
        "--alpha",
        "2",
        "--delta",
        "0.25",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("endpoint_gap.lambda_star_one"));
    assert!(text.contains("endpoint_gap.volume_rate"));
}
