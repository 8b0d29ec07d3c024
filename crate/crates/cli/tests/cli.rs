//! Black-box tests of the `dichotomy` binary: CSV schemas, seeded
//! reproducibility, config-file precedence, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn dichotomy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dichotomy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn spectrum_diag_lti_rows_collapse() {
    let dir = tempfile::tempdir().unwrap();
    let out = dichotomy(&[
        "spectrum",
        "--model",
        "diag_lti",
        "--k",
        "2",
        "--tf",
        "60",
        "--windows",
        "10,25",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("spectrum.csv"));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "index,lyapunov,bohl_lo_10,bohl_hi_10,bohl_lo_25,bohl_hi_25"
    );
    for (line, expect) in lines.zip([2.0, -1.0]) {
        let fields: Vec<f64> = line.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        for v in fields {
            assert!((v - expect).abs() < 1e-9, "{line}");
        }
    }
}

#[test]
fn spectrum_counterexample_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dichotomy(&[
        "spectrum",
        "--model",
        "scalar_counterexample",
        "--k",
        "1",
        "--h",
        "0.001",
        "--tf",
        "120",
        "--burn-in",
        "0",
        "--windows",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("spectrum.csv"));
    let row = csv.lines().nth(1).unwrap();
    let hi: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((hi - (11.0f64).ln() / 10.0).abs() < 1e-5, "upper {hi}");
}

#[test]
fn observe_zero_delta_has_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dichotomy(&[
        "observe",
        "--delta",
        "0",
        "--tf",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("run.csv"));
    for line in csv.lines().skip(1) {
        let err: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(err <= 1e-9, "{line}");
    }
}

#[test]
fn ensemble_replay_is_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = dichotomy(&[
            "ensemble",
            "--runs",
            "3",
            "--tf",
            "5",
            "--workers",
            "2",
            "--seed",
            "9",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["ensemble.csv", "run_00.csv", "run_01.csv", "run_02.csv"] {
        let a = read(&dir_a.path().join(name));
        let b = read(&dir_b.path().join(name));
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    // Quantile coherence on the emitted summary.
    let csv = read(&dir_a.path().join("ensemble.csv"));
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert!(v[0] <= v[1] && v[1] <= v[2] && v[2] <= v[3], "{line}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.conf");
    std::fs::write(
        &config,
        "model = diag_lti\nk = 2\ntf = 30\nwindows = 5\nburn-in = 0\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = dichotomy(&[
        "spectrum",
        "--config",
        config.to_str().unwrap(),
        "--windows",
        "10",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&out_dir.join("spectrum.csv"));
    assert!(csv.starts_with("index,lyapunov,bohl_lo_10,bohl_hi_10\n"));
}

#[test]
fn exit_code_1_on_config_error() {
    let out = dichotomy(&["spectrum", "--windows", "1000", "--tf", "50"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("windows"), "{stderr}");

    let out = dichotomy(&["observe", "--model", "no_such_model"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_code_2_on_divergence() {
    let dir = tempfile::tempdir().unwrap();
    // P1(0) = 0 with G1 = 0 keeps the gain at zero, so the error grows as
    // e^{2t} until the divergence monitor trips (definiteness checks off).
    let out = dichotomy(&[
        "observe",
        "--model",
        "diag_lti",
        "--k",
        "1",
        "--p1-scale",
        "0",
        "--g1-scale",
        "0",
        "--definiteness-every",
        "0",
        "--delta",
        "1",
        "--tf",
        "15",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("diverged"), "{stderr}");
}

#[test]
fn exit_code_2_on_definiteness_loss() {
    let dir = tempfile::tempdir().unwrap();
    // P1(0) = 0 with G1 = 0 is flagged by the periodic factorization check.
    let out = dichotomy(&[
        "observe",
        "--model",
        "diag_lti",
        "--k",
        "1",
        "--p1-scale",
        "0",
        "--g1-scale",
        "0",
        "--tf",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("positive definiteness"), "{stderr}");
}
