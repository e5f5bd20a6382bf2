use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn lamn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamn")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn bound_point_mass_example() {
    let v = stdout_json(&lamn(&["bound", "--loss", "linex:a=1,b=1", "--mixing", "point:w0=1"]));
    assert!((v["bound"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert_eq!(v["divergent"], Value::Bool(false));
    assert_eq!(v["config"]["loss"]["kind"], "linex");
}

#[test]
fn divergent_bound_is_data() {
    let out = lamn(&["bound", "--loss", "linex:a=1,b=1", "--mixing", "chi2_1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["divergent"], Value::Bool(true));
    assert!(v["bound"].is_null());
}

#[test]
fn beta0_of_squared_loss_is_zero() {
    let v = stdout_json(&lamn(&["beta0", "--loss", "squared", "--w", "1"]));
    assert_eq!(v["beta0"].as_f64(), Some(0.0));
    let v = stdout_json(&lamn(&["beta0", "--loss", "linex:a=1,b=1", "--w", "4"]));
    assert!((v["beta0"].as_f64().unwrap() + 0.25).abs() < 1e-8);
}

#[test]
fn config_errors_exit_with_one() {
    assert_eq!(lamn(&["risk", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(lamn(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lamn(&["bound", "--loss", "linex:a=1", "--mixing", "exp1"]).status.code(), Some(1));
    assert_eq!(lamn(&["bound", "--loss", "squared", "--mixing", "gamma"]).status.code(), Some(1));
    assert_eq!(lamn(&["simulate", "--model", "gw", "--theta0", "2", "--n", "3"]).status.code(), Some(1));
    let out = lamn(&["simulate", "--model", "gw", "--theta0", "0.5", "--n", "3", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the model region"));
    let usage = lamn(&["beta0", "--bogus"]);
    assert_eq!(usage.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("Usage"));
    assert_eq!(lamn(&["beta0", "--w"]).status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let out = lamn(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sweep"));
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.json");
    fs::write(&cfg, r#"{"beta0_config": {"bracket_halfwidth": 0.01}}"#).unwrap();
    let out = lamn(&["beta0", "--config", cfg.to_str().unwrap(), "--loss", "linex:a=20,b=1", "--w", "0.0001"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn csv_output_is_versioned() {
    let out = lamn(&["bound", "--loss", "check:c1=4,c2=1", "--mixing", "exp1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# lamn-csv v1 bound");
    assert!(lines[1].starts_with("# config: {"));
    assert_eq!(lines[2], "loss,mixing,bound,divergent");
    let fields: Vec<&str> = lines[3].split(',').collect();
    assert!((fields[fields.len() - 2].parse::<f64>().unwrap() - 2.481_097_919_669).abs() < 1e-6);
}

#[test]
fn simulate_writes_paths_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("paths.json");
    let out = lamn(&[
        "simulate", "--model", "gw", "--theta0", "2", "--n", "3", "--reps", "4", "--seed", "9", "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let paths = v["paths"].as_array().unwrap();
    assert_eq!(paths.len(), 4);
    for p in paths {
        let xs: Vec<u64> = p["path"]["observations"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
        assert_eq!(xs.len(), 4);
        assert_eq!(xs[0], 1);
        assert!(xs.windows(2).all(|w| w[0] <= w[1]));
    }
    assert_eq!(v["seed"], 9);
}

fn risk_args<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut args = vec![
        "risk", "--model", "gw", "--theta0", "2", "--loss", "check:c1=4,c2=1", "--n", "10", "--reps", "1000",
        "--h-grid", "-1,0,1",
    ];
    args.extend_from_slice(extra);
    args
}

#[test]
fn risk_report_reproduces_from_embedded_config() {
    let dir = tempfile::tempdir().unwrap();
    let first = stdout_json(&lamn(&risk_args(&["--seed", "5"])));
    assert_eq!(first["config"]["loss"]["truncation"].as_f64(), Some(50.0));
    assert_eq!(first["rows"].as_array().unwrap().len(), 6);
    let cfg = dir.path().join("embedded.json");
    fs::write(&cfg, first["config"].to_string()).unwrap();
    let again = stdout_json(&lamn(&["risk", "--config", cfg.to_str().unwrap(), "--seed", "5", "--workers", "3"]));
    assert_eq!(first.to_string(), again.to_string());
    let other = stdout_json(&lamn(&risk_args(&["--seed", "6"])));
    assert_ne!(first["rows"], other["rows"]);
}

#[test]
fn risk_requires_a_seed() {
    assert_eq!(lamn(&risk_args(&[])).status.code(), Some(1));
}

#[test]
fn risk_csv_rows() {
    let out = lamn(&risk_args(&["--seed", "5", "--format", "csv"]));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# lamn-csv v1 risk\n"));
    let body: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(body[0], "estimator,h,risk,stderr,degenerate");
    assert_eq!(body.len(), 7);
    for row in &body[1..] {
        let risk: f64 = row.rsplit(',').nth(2).unwrap().parse().unwrap();
        assert!((0.0..=50.0).contains(&risk));
    }
}

#[test]
fn diagnose_and_limit_run() {
    let v = stdout_json(&lamn(&[
        "diagnose", "--model", "ar1", "--theta0", "2", "--n-list", "5,10", "--reps", "500", "--seed", "2",
    ]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    let v = stdout_json(&lamn(&[
        "limit", "--loss", "squared", "--mixing", "point:w0=1", "--sigma", "1", "--reps", "2000", "--seed", "2",
    ]));
    assert!((v["bound"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    // under squared loss with σ = 1 the finite-prior posterior mean has Bayes risk 1/2
    let pm = rows.iter().find(|r| r["estimator"] == "posterior_mean[sigma=1]").unwrap();
    let (risk, se) = (pm["risk"].as_f64().unwrap(), pm["stderr"].as_f64().unwrap());
    assert!((risk - 0.5).abs() < 3.0 * se, "{risk} ± {se}");
}

#[test]
fn sweep_reports_the_family() {
    let mut args = risk_args(&["--seed", "1"]);
    args[0] = "sweep";
    let v = stdout_json(&lamn(&args));
    assert_eq!(v["rows"].as_array().unwrap().len(), 9);
    assert!(v["argmin_k"].as_f64().is_some());
}
