//! End-to-end tests of the `lcycle` binary: exit codes, JSON schema
//! stability, CSV formatting, and agreement between subcommands.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lcycle"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "expected success, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn stderr_error(out: &Output, expect_code: i32) -> serde_json::Value {
    assert_eq!(out.status.code(), Some(expect_code));
    let doc: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr is one JSON document");
    validate("error.schema.json", &doc);
    doc
}

fn validate(schema_file: &str, doc: &serde_json::Value) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(schema_file);
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).expect("schema file exists"))
            .expect("schema parses");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_file} violations: {errors:#?}");
}

fn tmp_path(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn predict_subcritical_example() {
    let out = run(&["predict", "--n", "8000", "--m", "2000", "--L", "3,4,5"]);
    let doc = stdout_json(&out);
    validate("predict.schema.json", &doc);
    assert_eq!(doc["regime"], "subcritical");
    assert!((doc["lambda"].as_f64().unwrap() - 0.03177083).abs() < 1e-6);
    assert!((doc["p_no_cycle"].as_f64().unwrap() - 0.968729).abs() < 1e-5);
    assert_eq!(doc["zstar"].as_f64().unwrap(), 0.5);
}

#[test]
fn predict_parses_complement_grammar() {
    let out = run(&["predict", "--n", "100", "--m", "25", "--L", "NOT: 3"]);
    let doc = stdout_json(&out);
    validate("predict.schema.json", &doc);
    assert_eq!(doc["lengths"], "not:3");
}

#[test]
fn supercritical_is_a_regime_error() {
    let out = run(&["predict", "--n", "100", "--m", "90"]);
    let doc = stderr_error(&out, 1);
    assert_eq!(doc["error"]["kind"], "regime");
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["predict", "--n", "10", "--m", "2", "--frobnicate"]);
    let doc = stderr_error(&out, 2);
    assert_eq!(doc["error"]["kind"], "usage");
}

#[test]
fn malformed_length_spec_is_a_parse_error() {
    let out = run(&["predict", "--n", "10", "--m", "2", "--L", "wat:9"]);
    let doc = stderr_error(&out, 2);
    assert_eq!(doc["error"]["kind"], "parse");
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("predict"));
}

#[test]
fn exact_triangle_law_and_float_round_trip() {
    let out = run(&["exact", "--n", "4", "--m", "3", "--L", "3", "--all-k"]);
    let doc = stdout_json(&out);
    validate("exact.schema.json", &doc);
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[1]["rational"], "1/5");
    // 17 significant digits round-trip losslessly through the JSON parser.
    assert_eq!(entries[1]["decimal"].as_f64().unwrap(), 0.2f64);
    assert_eq!(entries[0]["rational"], "4/5");
}

#[test]
fn exact_csv_uses_lf_and_header() {
    let path = tmp_path("exact.csv");
    let out = run(&[
        "exact", "--n", "6", "--m", "4", "--L", "3,4", "--all-k",
        "--csv", path.to_str().unwrap(),
    ]);
    stdout_json(&out);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("k,rational,decimal\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 1 + 3, "{text}");
}

#[test]
fn saddle_agrees_with_exact() {
    let saddle = stdout_json(&run(&[
        "saddle", "--n", "50", "--m", "15", "--L", "3,4", "--k", "0",
    ]));
    validate("saddle.schema.json", &saddle);
    let exact = stdout_json(&run(&[
        "exact", "--n", "50", "--m", "15", "--L", "3,4", "--k", "0",
    ]));
    let sv = saddle["value"].as_f64().unwrap();
    let ev = exact["entries"][0]["decimal"].as_f64().unwrap();
    assert!((sv / ev - 1.0).abs() < 1e-8, "saddle {sv} vs exact {ev}");
    assert_eq!(saddle["nodes"], 4096);
    assert_eq!(saddle["bits"], 128);
}

#[test]
fn saddle_rejects_excess_rows_off_the_critical_window() {
    let out = run(&[
        "saddle", "--n", "50", "--m", "15", "--L", "3", "--k", "0", "--rmax", "2",
    ]);
    let doc = stderr_error(&out, 1);
    assert_eq!(doc["error"]["kind"], "domain");
}

#[test]
fn simulate_report_is_schema_stable_and_deterministic() {
    let args = [
        "simulate", "--n", "100", "--m", "20", "--L", "3",
        "--trials", "200", "--seed", "1",
    ];
    let first = run(&args);
    let doc = stdout_json(&first);
    validate("simulate.schema.json", &doc);
    assert_eq!(doc["x_histogram"]["trials"], 200);
    assert_eq!(doc["prediction"]["regime"], "subcritical");
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn simulate_supercritical_still_reports() {
    // The regime has no prediction, but the simulation itself must run.
    let out = run(&[
        "simulate", "--n", "3", "--m", "3", "--L", "3",
        "--trials", "50", "--seed", "0",
    ]);
    let doc = stdout_json(&out);
    validate("simulate.schema.json", &doc);
    assert_eq!(doc["x_histogram"]["counts"]["1"], 50);
    assert!(doc["prediction"].is_null());
    assert!(doc["regime_error"].as_str().unwrap().contains("regime"));
    assert!(doc["tv"].is_null());
}

#[test]
fn simulate_csv_rows() {
    let path = tmp_path("simulate.csv");
    let out = run(&[
        "simulate", "--n", "100", "--m", "20", "--L", "3",
        "--trials", "100", "--seed", "2", "--csv", path.to_str().unwrap(),
    ]);
    stdout_json(&out);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("k,count,empirical,predicted\n"));
    assert!(!text.contains('\r'));
    let data_rows = text.lines().count() - 1;
    assert!(data_rows >= 1);
}

#[test]
fn workers_flag_and_env() {
    let doc = stdout_json(&run(&[
        "simulate", "--n", "60", "--m", "12", "--L", "3",
        "--trials", "40", "--seed", "0", "--workers", "2",
    ]));
    assert_eq!(doc["workers"], 2);
    let out = bin()
        .args([
            "simulate", "--n", "60", "--m", "12", "--L", "3",
            "--trials", "40", "--seed", "0",
        ])
        .env("LCYCLE_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&out)["workers"], 3);
    let bad = bin()
        .args([
            "simulate", "--n", "60", "--m", "12", "--L", "3",
            "--trials", "40", "--seed", "0",
        ])
        .env("LCYCLE_WORKERS", "lots")
        .output()
        .unwrap();
    let doc = stderr_error(&bad, 1);
    assert_eq!(doc["error"]["kind"], "domain");
}

#[test]
fn compare_uses_exact_for_small_n() {
    let doc = stdout_json(&run(&[
        "compare", "--n", "4", "--m", "3", "--L", "3",
        "--kmax", "1", "--trials", "500", "--seed", "0",
    ]));
    validate("compare.schema.json", &doc);
    assert_eq!(doc["method"], "exact");
    assert_eq!(doc["rows"][1]["exact_or_contour"].as_f64().unwrap(), 0.2);
}

#[test]
fn compare_empty_lengths_has_the_trivial_row() {
    let doc = stdout_json(&run(&[
        "compare", "--n", "6", "--m", "3", "--L", "none",
        "--kmax", "0", "--trials", "10", "--seed", "0",
    ]));
    validate("compare.schema.json", &doc);
    let row = &doc["rows"][0];
    assert_eq!(row["k"], 0);
    assert_eq!(row["empirical"].as_f64().unwrap(), 1.0);
    assert_eq!(row["poisson_prediction"].as_f64().unwrap(), 1.0);
    assert_eq!(row["exact_or_contour"].as_f64().unwrap(), 1.0);
    assert_eq!(row["abs_gap"].as_f64().unwrap(), 0.0);
}

#[test]
fn compare_uses_contour_for_large_n_and_csv_matches() {
    let path = tmp_path("compare.csv");
    let doc = stdout_json(&run(&[
        "compare", "--n", "60", "--m", "15", "--L", "3,4",
        "--kmax", "1", "--trials", "400", "--seed", "0",
        "--csv", path.to_str().unwrap(),
    ]));
    validate("compare.schema.json", &doc);
    assert_eq!(doc["method"], "contour");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,empirical,poisson_prediction,exact_or_contour,abs_gap"
    );
    // The CSV floats parse back to exactly the JSON values.
    let row0: Vec<&str> = lines.next().unwrap().split(',').collect();
    let json_row = &doc["rows"][0];
    assert_eq!(row0[0], "0");
    assert_eq!(
        row0[3].parse::<f64>().unwrap(),
        json_row["exact_or_contour"].as_f64().unwrap()
    );
}

#[test]
fn excess_law_sums_to_one_at_the_window_center() {
    let doc = stdout_json(&run(&["excess", "--mu", "0", "--rmax", "50"]));
    validate("excess.schema.json", &doc);
    let p = doc["probabilities"].as_array().unwrap();
    assert_eq!(p.len(), 51);
    assert!((p[0].as_f64().unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
    assert!((doc["sum"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn excess_from_n_m_requires_the_critical_window() {
    let doc = stdout_json(&run(&["excess", "--n", "1000000", "--m", "500000"]));
    assert_eq!(doc["mu"].as_f64().unwrap(), 0.0);
    let out = run(&["excess", "--n", "1000", "--m", "100"]);
    let err = stderr_error(&out, 1);
    assert_eq!(err["error"]["kind"], "domain");
}

#[test]
fn sample_emits_a_parsable_edge_dump() {
    let out = run(&["sample", "--n", "6", "--m", "4", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("6 4 3\n"));
    assert_eq!(text.lines().count(), 5);
    let (g, seed) = lcycle::parse_dump(&text).unwrap();
    assert_eq!((g.n, g.edges.len(), seed), (6, 4, 3));
}
