//! End-to-end tests of the `bdlrr` binary: every subcommand, determinism
//! of seeded runs, and error exits.

use std::path::Path;
use std::process::{Command, Output};

use bdlrr::io::{load_labels, load_matrix, save_matrix};
use bdlrr::matrix::DenseMatrix;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bdlrr"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("spawn bdlrr");
    assert!(
        output.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn run_fail(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("spawn bdlrr");
    assert!(!output.status.success(), "command {args:?} unexpectedly succeeded");
    output
}

fn synth_small(dir: &Path, seed: &str) {
    run_ok(&[
        "synth",
        "--classes", "2",
        "--subspace-dim", "3",
        "--ambient", "12",
        "--train", "12",
        "--test", "6",
        "--noise", "0",
        "--seed", seed,
        "--out", dir.to_str().unwrap(),
    ]);
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn synth_is_byte_identical_for_fixed_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    synth_small(&a, "7");
    synth_small(&b, "7");
    for name in ["x_tr.txt", "x_tt.txt", "train_labels.txt", "test_labels.txt", "manifest.txt"] {
        assert_eq!(read(&a.join(name)), read(&b.join(name)), "{name} differs");
    }
}

#[test]
fn synth_validates_dimensions_and_counts_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_fail(&[
        "synth",
        "--subspace-dim", "60",
        "--ambient", "50",
        "--out", tmp.path().join("bad").to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("subspace_dim"));

    let dir = tmp.path().join("generated");
    run_ok(&[
        "synth",
        "--classes", "5",
        "--train", "20",
        "--test", "20",
        "--out", dir.to_str().unwrap(),
    ]);
    let x_tr = load_matrix(&dir.join("x_tr.txt")).unwrap();
    assert_eq!(x_tr.ncols(), 100);
    assert_eq!(x_tr.nrows(), 50);
}

#[test]
fn unknown_flags_are_rejected() {
    let out = run_fail(&["synth", "--does-not-exist", "1"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unexpected") || stderr.contains("error"));
}

#[test]
fn train_predict_oos_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let model = tmp.path().join("model");
    synth_small(&data, "11");
    run_ok(&[
        "train",
        "--data", data.to_str().unwrap(),
        "--lambda2", "2",
        "--out", model.to_str().unwrap(),
    ]);

    let metrics = std::fs::read_to_string(model.join("metrics.txt")).unwrap();
    assert!(metrics.contains("accuracy=1.000000000000"), "metrics:\n{metrics}");
    // Resolved configuration is echoed, defaults included.
    for key in ["lambda1=5", "lambda2=2", "lambda3=15", "rho=1.15", "mu0=0.1", "tol=0.000001", "max_iter=500", "gamma=1"] {
        assert!(metrics.contains(key), "metrics missing {key}:\n{metrics}");
    }

    // The history's last row satisfies the tolerance when converged=true.
    assert!(metrics.contains("converged=true"));
    let history = std::fs::read_to_string(model.join("history.csv")).unwrap();
    let last = history.lines().last().unwrap();
    let fields: Vec<f64> = last.split(',').skip(2).map(|t| t.parse().unwrap()).collect();
    assert!(fields[0].max(fields[1]).max(fields[2]) <= 1e-6, "last residuals: {last}");

    // Predict on the stored test representation reproduces the metrics.
    let pred = tmp.path().join("pred.txt");
    let out = run_ok(&[
        "predict",
        "--model", model.to_str().unwrap(),
        "--representation", model.join("z_tt.txt").to_str().unwrap(),
        "--out", pred.to_str().unwrap(),
        "--labels", data.join("test_labels.txt").to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("accuracy 1.0000"));
    let predicted = load_labels(&pred).unwrap();
    let truth = load_labels(&data.join("test_labels.txt")).unwrap();
    assert_eq!(predicted, truth);

    // Out-of-sample on the raw held-out instances: one label per column.
    let oos_out = tmp.path().join("oos.txt");
    run_ok(&[
        "oos",
        "--model", model.to_str().unwrap(),
        "--instances", data.join("x_tt.txt").to_str().unwrap(),
        "--lambda2", "2",
        "--out", oos_out.to_str().unwrap(),
    ]);
    let oos_labels = load_labels(&oos_out).unwrap();
    assert_eq!(oos_labels.len(), 12);
}

#[test]
fn train_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth_small(&data, "13");
    let m1 = tmp.path().join("m1");
    let m2 = tmp.path().join("m2");
    for model in [&m1, &m2] {
        run_ok(&[
            "train",
            "--data", data.to_str().unwrap(),
            "--lambda2", "2",
            "--out", model.to_str().unwrap(),
        ]);
    }
    for name in ["w.txt", "z_tr.txt", "z_tt.txt", "e.txt", "metadata.txt", "history.csv", "metrics.txt"] {
        assert_eq!(read(&m1.join(name)), read(&m2.join(name)), "{name} differs");
    }
}

#[test]
fn oos_writes_one_line_per_instance() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let model = tmp.path().join("model");
    synth_small(&data, "17");
    run_ok(&[
        "train",
        "--data", data.to_str().unwrap(),
        "--lambda2", "2",
        "--out", model.to_str().unwrap(),
    ]);
    // Five fresh instances: first five test columns.
    let x_tt = load_matrix(&data.join("x_tt.txt")).unwrap();
    let five = x_tt.columns(0, 5).into_owned();
    let instances = tmp.path().join("instances.txt");
    save_matrix(&instances, &five).unwrap();
    let out_path = tmp.path().join("labels.txt");
    run_ok(&[
        "oos",
        "--model", model.to_str().unwrap(),
        "--instances", instances.to_str().unwrap(),
        "--out", out_path.to_str().unwrap(),
    ]);
    let lines = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(lines.lines().count(), 5);
}

#[test]
fn rpca_on_clean_rank_one_leaves_no_sparse_part() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("x.txt");
    let u = DenseMatrix::from_fn(20, 1, |i, _| (i as f64 * 0.37).sin() + 1.2);
    let v = DenseMatrix::from_fn(15, 1, |j, _| (j as f64 * 0.73).cos() - 0.4);
    let x = &u * v.transpose();
    save_matrix(&input, &x).unwrap();

    let out = tmp.path().join("rpca");
    run_ok(&[
        "rpca",
        "--input", input.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    let e = load_matrix(&out.join("e.txt")).unwrap();
    let x0 = load_matrix(&out.join("x0.txt")).unwrap();
    assert!(e.norm() / x.norm() < 1e-5, "sparse part norm {}", e.norm());
    assert!((x0 - &x).norm() / x.norm() < 1e-5);
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("lambda="));
    assert!(manifest.contains("converged=true"));
}

#[test]
fn lrr_subcommand_writes_decomposition() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth_small(&data, "19");
    let out = tmp.path().join("lrr");
    run_ok(&[
        "lrr",
        "--input", data.join("x_tr.txt").to_str().unwrap(),
        "--lambda", "10",
        "--out", out.to_str().unwrap(),
    ]);
    let z = load_matrix(&out.join("z.txt")).unwrap();
    assert_eq!(z.nrows(), 24);
    assert_eq!(z.ncols(), 24);
    assert!(out.join("history.csv").exists());
}

#[test]
fn eval_single_trial_on_separable_data() {
    let tmp = tempfile::tempdir().unwrap();
    let report_path = tmp.path().join("report.txt");
    run_ok(&[
        "eval",
        "--classes", "2",
        "--subspace-dim", "3",
        "--ambient", "12",
        "--train", "12",
        "--test", "6",
        "--noise", "0",
        "--lambda2", "2",
        "--repeats", "1",
        "--base-seed", "11",
        "--out", report_path.to_str().unwrap(),
    ]);
    let report = std::fs::read_to_string(&report_path).unwrap();
    assert!(report.starts_with("mean_accuracy=1.000000000000\n"), "report:\n{report}");
    assert!(report.contains("std_accuracy=0.000000000000"));
    assert!(report.contains("trials=1"));
    assert!(report.contains("flagged_nonconverged=0"));
    // Configuration echo rides along as comments.
    assert!(report.contains("# base_seed=11"));
}

#[test]
fn missing_input_file_exits_nonzero_with_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_fail(&[
        "train",
        "--data", tmp.path().join("nope").to_str().unwrap(),
        "--out", tmp.path().join("model").to_str().unwrap(),
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("x_tr.txt"), "stderr: {stderr}");
}
