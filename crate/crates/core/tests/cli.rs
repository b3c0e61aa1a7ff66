use std::path::Path;
use std::process::{Command, Output};

use lpnml::nalgebra::DVector;
use lpnml::{fit_ridge, lpnml_predict, Dataset};

fn lpnml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpnml")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

/// Data rows of a CSV output, skipping `#` metadata and the column header.
fn records(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const TRAIN: &str = "a,b,y\n0.5,1.0,0.7\n-1.2,0.3,-1.0\n2.0,-0.7,2.4\n0.9,0.9,0.6\n-0.3,-1.5,0.1\n1.4,0.2,1.1\n";

#[test]
fn predict_at_origin_is_centered_with_noise_variance() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", "x,y\n1,1\n1,1\n");
    let test = write(dir.path(), "test.csv", "x\n0\n");
    let o = lpnml(&["predict", "--train", &train, "--test", &test, "--lambda", "0.5", "--sigma2", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 1);
    // row, learner, lambda, sigma2, mean, variance, ...
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[0][5].parse::<f64>().unwrap(), 2.0);
}

#[test]
fn predict_output_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", TRAIN);
    let test = write(dir.path(), "test.csv", "a,b,y\n0.3,-0.2,0.4\n-1.0,1.1,-0.5\n");
    let out = dir.path().join("pred.csv");
    let o = lpnml(&[
        "predict", "--train", &train, "--test", &test, "--learner", "all", "--lambda", "0.1", "--sigma2", "0.5", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = records(&std::fs::read_to_string(&out).unwrap());

    let data = Dataset::from_rows(
        &[vec![0.5, 1.0], vec![-1.2, 0.3], vec![2.0, -0.7], vec![0.9, 0.9], vec![-0.3, -1.5], vec![1.4, 0.2]],
        &[0.7, -1.0, 2.4, 0.6, 0.1, 1.1],
    )
    .unwrap();
    let model = fit_ridge(&data, 0.1, 0.5).unwrap();
    let queries = [DVector::from_vec(vec![0.3, -0.2]), DVector::from_vec(vec![-1.0, 1.1])];

    let lp: Vec<_> = rows.iter().filter(|r| r[1] == "lpnml").collect();
    assert_eq!(lp.len(), 2);
    for (row, x) in lp.iter().zip(&queries) {
        let q = lpnml_predict(&model, x).unwrap();
        let (mean, var): (f64, f64) = (row[4].parse().unwrap(), row[5].parse().unwrap());
        assert!((mean - q.mean).abs() <= 1e-12 * q.mean.abs().max(1.0));
        assert!((var - q.variance).abs() <= 1e-12 * q.variance);
        assert!(!row[6].is_empty(), "labelled test file should report log-loss");
    }
    let mean_of = |learner: &str| -> Vec<String> { rows.iter().filter(|r| r[1] == learner).map(|r| r[4].clone()).collect() };
    assert_eq!(mean_of("ridge"), mean_of("bayes"));
}

#[test]
fn tune_with_singleton_grid_echoes_it() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", TRAIN);
    let o = lpnml(&[
        "tune", "--train", &train, "--learner", "lpnml", "--grid-lambdas", "0.25", "--grid-sigma2s", "0.75", "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &v["results"][0];
    assert_eq!(r["lambda"].as_f64(), Some(0.25));
    assert_eq!(r["noise_variance"].as_f64(), Some(0.75));
    assert_eq!(r["per_fold"].as_array().unwrap().len(), 6);
    assert!(v["metadata"]["version"].is_string());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let o = lpnml(&["tune", "--train", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let bad = write(dir.path(), "bad.csv", "a,y\n1,2\nx,3\n");
    let o = lpnml(&["tune", "--train", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 3"));

    assert_eq!(lpnml(&["predict", "--bogus"]).status.code(), Some(2));
    let train = write(dir.path(), "t.csv", TRAIN);
    assert_eq!(lpnml(&["predict", "--train", &train, "--test", &train, "--lambda", "1"]).status.code(), Some(2));

    let wide = write(dir.path(), "wide.csv", "a,b,c,y\n1,2,3,1\n4,5,6,2\n");
    let o = lpnml(&["predict", "--train", &wide, "--test", &wide, "--learner", "pnml", "--lambda", "0", "--sigma2", "1"]);
    assert_eq!(o.status.code(), Some(1));

    let o = lpnml(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("benchmark"));
}

fn benchmark_rows(args: &[&str]) -> Vec<Vec<String>> {
    let o = lpnml(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    records(&stdout(&o))
}

fn bench_data(dir: &Path) -> String {
    let mut body = String::from("age,b,y\n");
    for i in 0..40 {
        let a = i as f64 / 2.0;
        let b = ((i * 7) % 11) as f64 - 5.0;
        body += &format!("{a},{b},{}\n", 0.3 * a - 0.8 * b + ((i * 13) % 5) as f64 * 0.1);
    }
    write(dir, "bench.csv", &body)
}

#[test]
fn benchmark_random_split_reports_reductions_against_ridge() {
    let dir = tempfile::tempdir().unwrap();
    let data = bench_data(dir.path());
    let rows = benchmark_rows(&["benchmark", "--data", &data, "--reps", "2", "--seed", "4", "--grid-lambdas", "0.01,1"]);
    let ridge = rows.iter().find(|r| r[0] == "ridge").expect("ridge row");
    // mse_reduction_pct and log_loss_reduction are the last two columns
    let n = ridge.len();
    assert_eq!(ridge[n - 2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(ridge[n - 1].parse::<f64>().unwrap(), 0.0);
    assert!(rows.iter().any(|r| r[0] == "lpnml"));
}

#[test]
fn benchmark_threshold_split() {
    let dir = tempfile::tempdir().unwrap();
    let data = bench_data(dir.path());
    let rows = benchmark_rows(&[
        "benchmark", "--train", &data, "--split", "threshold", "--split-feature", "age", "--split-threshold", "15",
        "--learner", "lpnml",
    ]);
    assert_eq!(rows.len(), 1);
    // n_train, n_test follow the seven metric columns
    assert_eq!(rows[0][7], "30");
    assert_eq!(rows[0][8], "10");

    let o = lpnml(&["benchmark", "--data", &data, "--split", "threshold", "--split-feature", "age", "--split-threshold", "100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiments_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let poly = dir.path().join("poly");
    let o = lpnml(&["experiment", "polynomial", "--degree", "1", "--out", poly.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(poly.join("summary.json")).unwrap()).unwrap();
    assert!(summary["lpnml_bayes_max_deviation_over_range"].is_number());
    assert_eq!(records(&std::fs::read_to_string(poly.join("polynomial.csv")).unwrap()).len(), 201);

    let sub = dir.path().join("sub");
    let o = lpnml(&[
        "experiment", "subspace", "--n-train", "5", "--n-features", "12", "--n-test", "50", "--out", sub.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["subspace_learnable.csv", "subspace_null.csv"] {
        assert_eq!(records(&std::fs::read_to_string(sub.join(f)).unwrap()).len(), 50);
    }
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(sub.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["summary"]["rank"].as_u64(), Some(5));
}
