//! Binary-level checks: argument surface, output formats, exit codes.

use std::process::{Command, Output};

fn elldet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elldet"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn verify_emits_stable_json_schema() {
    let out = elldet(&[
        "verify", "--identity", "jackson", "--n", "0..2", "--trials", "2", "--seed", "5",
        "--out", "json",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["spec"]["identity"], "jackson");
    assert_eq!(report["spec"]["seed"], 5);
    let rows = report["results"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert!(row["trial"].is_u64());
        assert!(row["n"].is_u64());
        assert_eq!(row["identity"], "jackson");
        assert!(row["lhs"].is_string());
        assert!(row["rhs"].is_string());
        assert!(row["rel_residual"].is_string());
        assert_eq!(row["status"], "pass");
    }
    let summary = &report["summary"];
    assert!(summary["max_rel_residual"].is_string());
    assert_eq!(summary["pass"], 6);
    assert_eq!(summary["fail"], 0);
    assert_eq!(summary["reject"], 0);
    assert!(summary["wall_time_ms"].is_u64());
}

#[test]
fn identical_seeds_reproduce_identical_payloads() {
    let args = [
        "verify", "--identity", "tdt", "--n", "1..2", "--trials", "3", "--seed", "77",
        "--out", "json",
    ];
    let first = elldet(&args);
    let second = elldet(&args);
    assert!(first.status.success() && second.status.success());
    let mut a: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let mut b: serde_json::Value = serde_json::from_slice(&second.stdout).unwrap();
    a["summary"]["wall_time_ms"] = 0.into();
    b["summary"]["wall_time_ms"] = 0.into();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn csv_output_matches_the_documented_header() {
    let out = elldet(&[
        "verify", "--identity", "warnaar", "--n", "2", "--trials", "2", "--out", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trial,n,identity,rel_residual,status"));
    assert_eq!(lines.clone().count(), 2);
    for line in lines {
        assert!(line.ends_with(",pass"), "{line}");
    }
}

#[test]
fn orbit_and_selftest_subcommands_run() {
    let out = elldet(&["orbit", "--n", "1..2", "--trials", "2", "--seed", "3"]);
    assert!(out.status.success());
    let out = elldet(&["selftest", "--n", "1..2", "--trials", "2", "--tol", "1e-30"]);
    assert!(out.status.success());
}

#[test]
fn usage_errors_exit_with_code_two() {
    // unknown identity is a clap parse error
    let out = elldet(&["verify", "--identity", "nope", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // structurally valid but out-of-contract spec
    let out = elldet(&["verify", "--identity", "dt", "--n", "0..2", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = elldet(&["verify", "--identity", "cnt-special", "--n", "6..6", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // m with a non-cnt identity
    let out = elldet(&["verify", "--identity", "dt", "--n", "2", "--m", "1,1", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identity_failures_exit_with_code_one() {
    // a tolerance below the achievable rounding floor forces failures
    let out = elldet(&[
        "verify", "--identity", "tdt", "--n", "6..6", "--trials", "2", "--tol", "1e-86",
        "--seed", "42",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains("fail=0"), "{text}");
}

#[test]
fn trigonometric_pin_runs_at_zero_nome() {
    let out = elldet(&[
        "verify", "--identity", "dt", "--n", "1..3", "--trials", "2", "--p-max", "0",
        "--tol", "1e-40", "--out", "human",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("fail=0"), "{text}");
}
