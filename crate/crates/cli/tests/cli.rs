//! Binary-level behavior: flags, exit codes, report shape, determinism.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bbp-tails"))
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["eval", "pi", "--n", "1", "--bits", "63"],
        &["eval", "pi", "--n", "0"],
        &["eval", "log2", "--route", "digamma"],
        &["eval", "--n", "1"],
        &["digits", "pi", "--count", "9"],
        &["digits", "pi", "--count", "0"],
        &["verify", "identities", "--n", "0"],
        &["linear-form", "--poly", "1,oops", "--n", "1"],
    ];
    for args in cases {
        let out = bin().args(*args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "args {args:?} should exit 2");
    }
}

#[test]
fn unknown_flags_exit_2() {
    let out = bin().args(["eval", "pi", "--frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flag_and_positional_constant_agree() {
    let a = bin()
        .args(["digits", "pi", "--pos", "3", "--count", "2", "--format", "report"])
        .output()
        .unwrap();
    let b = bin()
        .args(["digits", "--constant", "pi", "--pos", "3", "--count", "2", "--format", "report"])
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    // conflicting spellings are rejected
    let c = bin()
        .args(["digits", "pi", "--constant", "log2", "--pos", "3"])
        .output()
        .unwrap();
    assert_eq!(c.status.code(), Some(2));
}

#[test]
fn report_key_order_is_fixed() {
    let out = bin()
        .args(["eval", "pi", "--n", "2", "--bits", "128", "--route", "bbp", "--format", "report"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let idx = |k: &str| text.find(&format!("\"{k}\"")).unwrap_or_else(|| panic!("missing {k}"));
    assert!(idx("command") < idx("inputs"));
    assert!(idx("inputs") < idx("outputs"));
    assert!(idx("outputs") < idx("budgets"));
    assert!(idx("budgets") < idx("status"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let run = || {
        bin()
            .args(["digits", "log2", "--n", "2", "--pos", "5", "--count", "6", "--format", "report"])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
    let run_eval = || {
        bin()
            .args(["eval", "pi", "--n", "3", "--bits", "192", "--route", "all", "--format", "report"])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run_eval(), run_eval());
}

#[test]
fn verify_suites_pass_and_exit_0() {
    for suite in ["identities", "lemmas"] {
        let out = bin()
            .args(["verify", suite, "--bits", "192", "--format", "report"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "suite {suite} failed: {out:?}");
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["status"], "ok");
    }
    // oracle suite at a reduced grid for speed
    let out = bin()
        .args(["verify", "oracles", "--n", "3", "--bits", "192", "--format", "report"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "oracles failed: {out:?}");
}

#[test]
fn digits_full_constant_defaults() {
    let out = bin()
        .args(["digits", "pi", "--format", "report"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["outputs"]["digits"], "243F");
    assert_eq!(report["outputs"]["sign"], "+");

    let out = bin()
        .args(["digits", "log2", "--count", "4", "--format", "report"])
        .output()
        .unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["outputs"]["digits"], "B172");
}

#[test]
fn eval_reports_discrepancy_for_route_all() {
    let out = bin()
        .args(["eval", "log2", "--n", "4", "--bits", "160", "--route", "all", "--format", "report"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let outputs = report["outputs"].as_object().unwrap();
    assert!(outputs.contains_key("value_bbp"));
    assert!(outputs.contains_key("value_integral"));
    assert!(outputs.contains_key("value_reference"));
    assert!(!outputs.contains_key("value_digamma"), "digamma route is pi-only");
    assert!(outputs.contains_key("max_discrepancy"));
    assert!(report["budgets"].as_object().unwrap().contains_key("max_discrepancy"));
}
