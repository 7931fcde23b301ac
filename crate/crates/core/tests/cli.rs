use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsi-decay")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fsi-decay-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn exponents_at_reference_weights() {
    let out = run(&["exponents", "--weights", "5", "5/3", "20/3", "17/3", "0", "25/3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["alpha"], "5/3");
    assert_eq!(v["result"]["kappa"], "11/3");
    assert_eq!(v["result"]["epsilon"], "2/3");
    let golden = std::fs::read(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/exponents_reference.json")).unwrap();
    assert_eq!(out.stdout, golden);
}

#[test]
fn decimal_weights_are_exact() {
    let out = run(&["exponents", "--weights", "5", "1.5", "6.25", "5.5", "0", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["input"]["weights"]["c_T"], "3/2");
}

#[test]
fn zero_weights_fail_verification() {
    let out = run(&["verify-weights", "--weights", "0", "0", "0", "0", "0", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["result"]["feasible"], false);
    assert_eq!(v["result"]["failing"][0]["tag"], "alpha/term3");
}

#[test]
fn reference_weights_verify() {
    let out = run(&["verify-weights", "--weights", "5", "5/3", "20/3", "17/3", "0", "25/3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["min_analytic_margin"], "2/3");
}

#[test]
fn search_weights_outcomes() {
    let out = run(&["search-weights"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["outcome"], "feasible");

    let out = run(&["search-weights", "--maximize-margin"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["outcome"], "optimal");
    assert_eq!(v["result"]["margin"], v["result"]["min_analytic_margin"]);

    let out = run(&["search-weights", "--alpha-min", "100"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["result"]["outcome"], "infeasible");
}

#[test]
fn lemma_report_fields() {
    let out = run(&["lemma", "--C", "1", "--gamma", "1", "--alpha", "5/3", "--beta", "5/2", "--kappa", "11/3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["result"]["lambda_star"]["exponent"], 17);
    assert_eq!(v["result"]["a"], "262144/1");
    assert_eq!(v["result"]["A"], "30/1");
    assert_eq!(v["result"]["eps_threshold"], "1/171798691840000");
    assert_eq!(v["result"]["ok"], true);
}

#[test]
fn lemma_trace_and_csv() {
    let csv = scratch("trace.csv");
    let out = run(&[
        "lemma", "--alpha", "2", "--beta", "3", "--kappa", "4", "--trace", "1/10a", "2a", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["result"]["trace"]["steps"], 20);
    assert_eq!(v["result"]["trace"]["bound_holds"], true);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,f,bound,ratio\n"));
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn lemma_without_admissible_lambda_is_negative() {
    let out = run(&["lemma", "--alpha", "1.000000001", "--beta", "3", "--kappa", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["result"]["lambda_star"]["error"].is_string());
}

#[test]
fn simulate_small_config() {
    let cfg = scratch("small.json");
    std::fs::write(
        &cfg,
        r#"{"n_f": 16, "n_s": 16, "dt": "1/100", "t_end": 2, "alpha": "1/2", "lambda": "1/8",
            "weights": {"c_id": "5", "c_dt": "20/3", "c_dtt": "25/3"}, "profile": "solid-bump"}"#,
    )
    .unwrap();
    let csv = scratch("energy.csv");
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["result"]["energy_law_holds"], true);
    assert_eq!(v["result"]["steps"], 200);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,E_id,E_dt,E_dtt,D,Y\n"));
    assert_eq!(text.lines().count(), 202);
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["exponents", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["exponents", "--weights", "1", "2"]).status.code(), Some(2));
    assert_eq!(run(&["exponents", "--weights", "1", "2", "3", "4", "5", "x"]).status.code(), Some(2));
    assert_eq!(run(&["lemma", "--alpha", "1/2", "--beta", "3", "--kappa", "4"]).status.code(), Some(2));

    let out = run(&["simulate", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let cfg = scratch("bad.json");
    std::fs::write(&cfg, r#"{"n_f": 16, "surprise": 1}"#).unwrap();
    assert_eq!(run(&["simulate", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn version_prints_pins() {
    let out = run(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("fsi-decay 0.1.0\n"));
    assert!(text.contains("ledger-pin b9dceb2f7a6c615e2ac833be7963f4af3c201e5187e4fcb6829fafe45202bc02"));
    assert!(text.contains("ledger-hash "));
}

#[test]
fn reports_are_byte_stable() {
    let args = ["search-weights", "--maximize-margin"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn margin_search_with_impossible_thresholds_is_negative() {
    let out = run(&["search-weights", "--maximize-margin", "--alpha-min", "100"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["result"]["outcome"], "optimal");
    assert_eq!(v["result"]["feasible"], false);
}
