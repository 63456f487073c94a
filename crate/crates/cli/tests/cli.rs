use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bnpmi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnpmi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn assert_schema(name: &str, report: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn without_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn estimate_report_is_valid_and_reproducible() {
    let args = ["estimate", "--dist", "normal:I:2", "--n", "50", "--seed", "7", "--draws", "200"];
    let first = stdout_json(&bnpmi(&args));
    assert_schema("estimate.schema.json", &first);
    assert!(first["point"].as_f64().unwrap() >= 0.0);
    let second = stdout_json(&bnpmi(&args));
    assert_eq!(without_time(first), without_time(second));
}

#[test]
fn test_report_is_valid_and_reproducible() {
    let args = ["test", "--dist", "normal:A:2", "--n", "50", "--seed", "3", "--draws", "200"];
    let first = stdout_json(&bnpmi(&args));
    assert_schema("test.schema.json", &first);
    let rb = first["rb"].as_f64().unwrap();
    let verdict = first["verdict"].as_str().unwrap();
    assert_eq!(verdict == "evidence_for", rb > 1.0);
    let second = stdout_json(&bnpmi(&args));
    assert_eq!(without_time(first), without_time(second));
}

#[test]
fn elicit_report_and_failure() {
    let out = bnpmi(&["elicit", "--c", "0.05", "--d", "2", "--grid", "0.05,1", "--draws", "200"]);
    let report = stdout_json(&out);
    assert_schema("elicit.schema.json", &report);
    assert_eq!(report["profile"].as_array().unwrap().len(), 2);

    let fail = bnpmi(&["elicit", "--grid", "1", "--tolerance", "0", "--draws", "7"]);
    assert_eq!(fail.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&fail.stderr).contains("profile"));
}

#[test]
fn simulate_json_and_csv() {
    let base = [
        "simulate", "--dist", "normal:I:2", "--dist", "ubd:circle", "--n", "20", "--reps", "2",
        "--draws", "100", "--atoms", "100", "--seed", "5",
    ];
    let report = stdout_json(&bnpmi(&base));
    assert_schema("simulate.schema.json", &report);
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["true_mi"].as_f64(), Some(0.0));
    assert!(rows[1]["true_mi"].is_null() && rows[1]["mse"].is_null());

    let mut csv_args = base.to_vec();
    csv_args.extend(["--format", "csv"]);
    let out = bnpmi(&csv_args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "distribution,n,k,reps,true_mi,mi_mean,mse,rb_mean,str_mean,rb_below_one,invalid_draws"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn single_replication_and_k_sweep() {
    let one = stdout_json(&bnpmi(&[
        "simulate", "--dist", "t:3:2", "--n", "30", "--reps", "1", "--draws", "50", "--no-test",
    ]));
    let rows = one["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["reps"], 1);
    assert!(rows[0]["rb_mean"].is_null());

    let sweep = stdout_json(&bnpmi(&[
        "simulate", "--dist", "t:3:2", "--n", "30", "--reps", "2", "--draws", "50", "--k-sweep", "1-4",
    ]));
    let ks: Vec<u64> = sweep["rows"].as_array().unwrap().iter().map(|r| r["k"].as_u64().unwrap()).collect();
    assert_eq!(ks, vec![1, 2, 3, 4]);
}

#[test]
fn input_errors_exit_with_two() {
    let missing = bnpmi(&["estimate", "--input", "/definitely/not/here.csv", "--all-columns"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "1,2\n3\n").unwrap();
    let out = bnpmi(&["estimate", "--input", ragged.to_str().unwrap(), "--all-columns"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let one_col = dir.path().join("one.csv");
    std::fs::write(&one_col, "1\n2\n3\n4\n5\n").unwrap();
    let out = bnpmi(&["test", "--input", one_col.to_str().unwrap(), "--all-columns"]);
    assert_eq!(out.status.code(), Some(2));

    let unselected = bnpmi(&["estimate", "--input", ragged.to_str().unwrap()]);
    assert_eq!(unselected.status.code(), Some(2));
}

#[test]
fn file_input_with_header_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let mut text = String::from("T,AP,RH,V,PE\n");
    for i in 0..40 {
        let x = i as f64;
        text.push_str(&format!("{},{},{},{},{}\n", x, (x * 1.7) % 11.0, (x * 3.1) % 7.0, (x * 0.37).sin(), x * 2.0));
    }
    std::fs::write(&path, text).unwrap();
    let report = stdout_json(&bnpmi(&[
        "estimate", "--input", path.to_str().unwrap(), "--header", "--columns", "0-3", "--standardize",
        "--draws", "100",
    ]));
    assert_schema("estimate.schema.json", &report);
    assert_eq!(report["config"]["d"], 4);
    assert_eq!(report["config"]["n"], 40);
}

#[test]
fn degenerate_data_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    std::fs::write(&path, "1,1\n".repeat(30)).unwrap();
    let out = bnpmi(&[
        "estimate", "--input", path.to_str().unwrap(), "--all-columns", "--a", "0.000001", "--draws", "5",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
