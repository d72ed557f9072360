use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kising(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kising"))
        .args(args)
        .env_remove("KISING_THREADS")
        .output()
        .expect("binary runs")
}

fn summary(out: &Output) -> Value {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "stdout: {text}");
    serde_json::from_str(text.trim()).unwrap()
}

fn error_body(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let line = text.lines().last().expect("stderr line");
    serde_json::from_str(line).unwrap()
}

#[test]
fn period_six_qubits_one_third() {
    let out = kising(&["--command", "period", "--n", "6", "--coupling", "1/3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out);
    let row = &s["result"]["periods"][0];
    assert_eq!(row["operator_period"], 12);
    assert_eq!(row["measured_period"], 12);
    assert_eq!(s["command"], "period");
}

#[test]
fn irrational_period_is_null() {
    let out = kising(&["--command", "period", "--n", "6", "--coupling", "sqrt(5)/3"]);
    assert!(out.status.success());
    assert!(summary(&out)["result"]["periods"][0]["operator_period"].is_null());
}

#[test]
fn missing_required_flags_exit_two() {
    let out = kising(&["--command", "entropy-series", "--n", "6", "--coupling", "1/3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_body(&out)["error"], "config");

    let out = kising(&["--command", "period", "--n", "6", "--coupling", "1/0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = kising(&["--command", "spacings", "--n", "200", "--coupling", "1", "--k", "9"]);
    assert_eq!(out.status.code(), Some(2));

    let out = kising(&["--command", "period", "--n", "6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_config_error() {
    let out = kising(&["--command", "period", "--n", "6", "--coupling", "1/3", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_kising"))
        .args(["--command", "period", "--n", "6", "--coupling", "1/3"])
        .env("KISING_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_oracle_is_resource_error() {
    let out = kising(&["--command", "oracle-check", "--n", "40", "--coupling", "1/3"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_body(&out)["error"], "resource");
}

#[test]
fn too_few_levels_is_numeric_error() {
    let out = kising(&["--command", "rbar", "--n", "20", "--coupling", "sqrt(5)/3"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_body(&out)["error"], "numeric");
}

#[test]
fn failed_run_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = kising(&[
        "--command",
        "rbar",
        "--n",
        "20",
        "--coupling",
        "sqrt(5)/3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

fn series_to(path: &Path, format: &str) -> Output {
    kising(&[
        "--command",
        "entropy-series",
        "--n",
        "8,9",
        "--coupling",
        "7/20",
        "--theta0",
        "0.7",
        "--phi0",
        "-0.3",
        "--kicks",
        "45",
        "--out",
        path.to_str().unwrap(),
        "--format",
        format,
    ])
}

#[test]
fn entropy_series_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let out_a = series_to(&a, "csv");
    let out_b = series_to(&b, "csv");
    assert!(out_a.status.success());
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());

    let text = String::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n_qubits,kick,linear,von_neumann"));
    assert_eq!(lines.count(), 2 * 46);

    let sa = summary(&out_a);
    let sb = summary(&out_b);
    assert_eq!(sa["result"], sb["result"]);
    assert_eq!(sa["rows"], 92);
    let series = &sa["result"]["series"];
    assert_eq!(series[0]["operator_period"], 40);
    assert_eq!(series[0]["detected_period"], 20);
}

#[test]
fn json_table_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.json");
    assert!(series_to(&path, "json").status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["columns"][1], "kick");
    assert_eq!(v["rows"].as_array().unwrap().len(), 92);
    assert_eq!(v["rows"][0][1], 0);
    let linear0 = v["rows"][0][2].as_f64().unwrap();
    assert!(linear0.abs() < 1e-12);
}

#[test]
fn spectrum_and_ratios_run() {
    let out = kising(&["--command", "spectrum", "--n", "12", "--coupling", "1/3", "--sector", "pooled"]);
    assert!(out.status.success());
    let s = summary(&out);
    assert_eq!(s["result"]["spectra"][0]["total"], 13);

    let out = kising(&[
        "--command",
        "ratios",
        "--n",
        "2001",
        "--coupling",
        "sqrt(5)/3",
        "--k",
        "2",
        "--bins",
        "10",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out);
    assert_eq!(s["rows"], 10);
    let ks = s["result"]["results"][0]["ks_distance"].as_f64().unwrap();
    assert!((0.0..1.0).contains(&ks));
}

#[test]
fn rbar_reports_poisson_reference() {
    let out = kising(&["--command", "rbar", "--n", "4001", "--coupling", "sqrt(5)/3"]);
    assert!(out.status.success());
    let s = summary(&out);
    let r = s["result"]["results"][0]["r_mean"].as_f64().unwrap();
    assert!(r > 0.3 && r < 0.45, "r = {r}");
}

#[test]
fn eigenstate_ee_with_fit() {
    let out = kising(&[
        "--command",
        "eigenstate-ee",
        "--n",
        "8,10,12,14",
        "--coupling",
        "1",
        "--perturb",
        "J",
        "--delta",
        "1e-5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out);
    assert!(s["result"]["fit"]["slope"].is_f64());
    assert_eq!(s["result"]["points"].as_array().unwrap().len(), 4);
}

#[test]
fn qkt_map_orbit_rows() {
    let out = kising(&[
        "--command", "qkt-map", "--n", "10", "--coupling", "1/2", "--theta0", "1.0", "--phi0", "0.5",
        "--kicks", "5",
    ]);
    assert!(out.status.success());
    let s = summary(&out);
    assert_eq!(s["rows"], 6);
    let p = s["result"]["maps"][0]["p"].as_f64().unwrap();
    assert!((p - std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn oracle_check_passes_small_chain() {
    let out = kising(&["--command", "oracle-check", "--n", "5,6", "--coupling", "7/20", "--kicks", "8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary(&out)["result"]["all_pass"], true);
}
