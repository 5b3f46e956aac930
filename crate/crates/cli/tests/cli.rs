// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs of the compiled binary: pipeline behavior, output
//! determinism, and the exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctspline"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"))
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

/// Eight well-spaced samples, small enough that every solver converges in
/// well under a second.
const SMALL_CSV: &str = "t,y\n0.3,1.2\n0.6,1.7\n0.9,2.0\n1.2,1.9\n1.5,1.4\n1.8,0.8\n2.1,0.4\n2.4,0.3\n";

#[test]
fn synth_writes_the_benchmark_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");

    let out = run(&["synth", "--seed", "7", "--out", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("n 501"), "stdout: {text}");
    assert!(text.contains("horizon 5.1"), "stdout: {text}");
    assert!(text.contains("noise_scale 0.7071067811865476"), "stdout: {text}");

    let out = run(&["synth", "--seed", "7", "--out", b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read(&a), read(&b), "same seed must give identical bytes");

    let contents = read(&a);
    assert_eq!(contents.lines().count(), 502, "header plus 501 rows");
    assert!(contents.starts_with("t,y\n0.1,"));
}

#[test]
fn synth_with_zero_variance_is_the_clean_signal() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clean.csv");
    let out = run(&[
        "synth",
        "--variance",
        "0",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let first_row = read(&path).lines().nth(1).unwrap().to_string();
    let value: f64 = first_row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - ((0.2f64).sin() + 1.0)).abs() <= 1e-12);
}

#[test]
fn l2_pipeline_runs_and_repeats_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    assert_eq!(
        run(&["synth", "--seed", "3", "--out", data.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );

    let fit_once = |name: &str| -> (String, String) {
        let record = dir.path().join(name);
        let out = run(&[
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--preset",
            "paper",
            "--mode",
            "l2",
            "--lambda",
            "0.0001",
            "--out",
            record.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
        (read(&record), stdout(&out))
    };
    let (record1, log1) = fit_once("f1.json");
    let (record2, log2) = fit_once("f2.json");
    assert_eq!(record1, record2, "fit records must be byte-identical");
    assert_eq!(log1, log2);
    assert!(log1.contains("iterations 0"));
    assert!(log1.contains("objective "));
    assert!(record1.contains("\"format\": \"ctspline-fit/1\""));
    assert!(record1.contains("\"mode\": \"l2\""));

    let eval_once = |name: &str| -> (String, String, String) {
        let curve = dir.path().join(name);
        let out = run(&[
            "eval",
            "--fit",
            dir.path().join("f1.json").to_str().unwrap(),
            "--out",
            curve.to_str().unwrap(),
            "--reference",
            "synth:3",
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
        let coeffs = curve.with_extension("coeffs.csv");
        (read(&curve), read(&coeffs), stdout(&out))
    };
    let (curve1, coeffs1, elog1) = eval_once("c1.csv");
    let (curve2, _, elog2) = eval_once("c2.csv");
    assert_eq!(curve1, curve2, "curves must be byte-identical");
    assert_eq!(elog1, elog2);

    assert_eq!(curve1.lines().count(), 1002, "header plus 1001 grid rows");
    assert!(curve1.starts_with("t,y,u\n0,"));
    assert_eq!(coeffs1.lines().count(), 502);
    assert!(coeffs1.starts_with("i,t_i,theta_i\n0,0.1,"));

    let rmse: f64 = elog1
        .lines()
        .find_map(|l| l.strip_prefix("rmse "))
        .expect("rmse line")
        .parse()
        .unwrap();
    assert!(rmse.is_finite() && rmse < 1.0, "rmse {rmse}");
    assert!(elog1.contains("max_abs_error "));
}

#[test]
fn l1_fit_with_initial_state_and_csv_reference() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("small.csv");
    std::fs::write(&data, SMALL_CSV).unwrap();
    let record = dir.path().join("fit.json");

    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--preset",
        "paper",
        "--mode",
        "l1",
        "--p",
        "1",
        "--eta",
        "0.05",
        "--estimate-x0",
        "--out",
        record.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
    let log = stdout(&out);
    assert!(log.contains("objective "));
    assert!(log.contains("kkt_residual "));
    assert!(log.contains("sparsity_count "));
    let text = read(&record);
    assert!(text.contains("\"mode\": \"l1\""));
    assert!(text.contains("\"estimate_x0\": true"));
    assert!(text.contains("\"solver\": \"admm\""));
    assert!(text.contains("\"x0\": ["));

    let curve = dir.path().join("curve.csv");
    let coeffs = dir.path().join("theta.csv");
    let out = run(&[
        "eval",
        "--fit",
        record.to_str().unwrap(),
        "--grid",
        "51",
        "--out",
        curve.to_str().unwrap(),
        "--coeffs",
        coeffs.to_str().unwrap(),
        "--reference",
        data.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
    assert_eq!(read(&curve).lines().count(), 52);
    assert_eq!(read(&coeffs).lines().count(), 9);
    let elog = stdout(&out);
    let rmse: f64 = elog
        .lines()
        .find_map(|l| l.strip_prefix("rmse "))
        .expect("rmse line")
        .parse()
        .unwrap();
    // the reference here is the noisy data itself, so only sanity applies
    assert!(rmse.is_finite() && rmse < 1.0, "rmse {rmse}");
}

#[test]
fn usage_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("small.csv");
    std::fs::write(&data, SMALL_CSV).unwrap();
    let out_path = dir.path().join("x.json");

    let base = |extra: &[&str]| -> Option<i32> {
        let mut args = vec![
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--preset",
            "paper",
            "--out",
            out_path.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        run(&args).status.code()
    };

    assert_eq!(base(&["--mode", "l1", "--eta", "0.1", "--p", "3"]), Some(2));
    assert_eq!(base(&["--mode", "l1", "--p", "1"]), Some(2), "missing --eta");
    assert_eq!(base(&["--mode", "l2"]), Some(2), "missing --lambda");
    assert_eq!(
        base(&["--mode", "l2", "--lambda", "1e-4", "--estimate-x0"]),
        Some(2)
    );
    assert_eq!(
        base(&["--mode", "l1", "--eta", "0.1", "--p", "1", "--lambda", "1e-4"]),
        Some(2)
    );
    assert_eq!(base(&["--mode", "nope"]), Some(2));

    // clap-level failures share the code
    assert_eq!(run(&["fit"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));

    let out = run(&[
        "eval",
        "--fit",
        out_path.to_str().unwrap(),
        "--grid",
        "1",
        "--out",
        dir.path().join("c.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("x.json");

    let out = run(&[
        "fit",
        "--data",
        dir.path().join("missing.csv").to_str().unwrap(),
        "--preset",
        "paper",
        "--mode",
        "l2",
        "--lambda",
        "1e-4",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let garbage = dir.path().join("garbage.csv");
    std::fs::write(&garbage, "t,y\n0.5,oops\n").unwrap();
    let out = run(&[
        "fit",
        "--data",
        garbage.to_str().unwrap(),
        "--preset",
        "paper",
        "--mode",
        "l2",
        "--lambda",
        "1e-4",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let bad_system = dir.path().join("sys.json");
    std::fs::write(&bad_system, "{ not json").unwrap();
    let data = dir.path().join("small.csv");
    std::fs::write(&data, SMALL_CSV).unwrap();
    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--system",
        bad_system.to_str().unwrap(),
        "--mode",
        "l2",
        "--lambda",
        "1e-4",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let out = run(&[
        "eval",
        "--fit",
        dir.path().join("missing.json").to_str().unwrap(),
        "--out",
        dir.path().join("c.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn nonconvergence_exits_4_unless_allowed_and_still_writes_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("small.csv");
    std::fs::write(&data, SMALL_CSV).unwrap();
    let record = dir.path().join("fit.json");

    let mut args = vec![
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--preset",
        "paper",
        "--mode",
        "l1",
        "--p",
        "2",
        "--eta",
        "0.05",
        "--max-iter",
        "2",
        "--out",
        record.to_str().unwrap(),
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(4), "stderr: {:?}", out.stderr);
    let text = read(&record);
    assert!(
        text.contains("\"converged\": false"),
        "record is written even on nonconvergence"
    );

    args.push("--allow-nonconverged");
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
}

#[test]
fn custom_system_json_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("small.csv");
    std::fs::write(&data, SMALL_CSV).unwrap();
    let system = dir.path().join("sys.json");
    std::fs::write(
        &system,
        r#"{"A": [[0.0, 1.0], [-1.0, -0.5]], "b": [0.0, 1.0], "c": [1.0, 0.0]}"#,
    )
    .unwrap();
    let record = dir.path().join("fit.json");

    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--system",
        system.to_str().unwrap(),
        "--mode",
        "l1",
        "--p",
        "2",
        "--eta",
        "0.01",
        "--out",
        record.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
    assert!(read(&record).contains("\"mode\": \"l1\""));
}
