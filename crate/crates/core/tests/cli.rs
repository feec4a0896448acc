use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krein-lsq")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn entry(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

const TRIVIAL: &str = r#"{"dim": 2, "J": [[1, 0], [0, -1]], "W": [[1, 0], [0, -1]], "S": [[1], [0]]}"#;
const NONCOMP: &str = r#"{"dim": 2, "J": [[1, 0], [0, -1]], "W": [[1, 0], [0, 1]], "B": [[1, 0], [1, 0]]}"#;

#[test]
fn jtrace_suite_reports_worked_example_values() {
    let out = run(&["verify", "--suite", "jtrace-laws", "--dim", "2", "--instances", "1", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rep = json_of(&out);
    let a = rep["values"]["example_tr_Ja"].as_f64().unwrap();
    let b = rep["values"]["example_tr_Jb"].as_f64().unwrap();
    assert!((a - 1.0).abs() <= 1e-12 && (b - 3.0).abs() <= 1e-12, "{a} {b}");
    assert_eq!(rep["passed"], Value::Bool(true));
}

#[test]
fn schur_of_reference_weight_on_first_axis() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "trivial.json", TRIVIAL);
    let output = dir.path().join("out.json");
    let out = run(&["schur", "-i", &input, "-o", output.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json_of(&out);
    let expected = [[0.0, 0.0], [0.0, -1.0]];
    for (r, row) in expected.iter().enumerate() {
        for (c, &want) in row.iter().enumerate() {
            let (re, im) = entry(&rep["schur"][r][c]);
            assert!((re - want).abs() <= 1e-12 && im.abs() <= 1e-12, "({r},{c}) = {re}+{im}i");
        }
    }
    assert_eq!(rep["complementable"], Value::Bool(true));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(output).unwrap()).unwrap();
    assert_eq!(written, rep);
}

#[test]
fn non_complementable_minimum_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "noncomp.json", NONCOMP);
    let out = run(&["ims", "-i", &input]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["error"], "NormalEquationUnsolvable");
    let out = run(&["imms", "-i", &input]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["error"], "MinMaxUnsolvable");
}

#[test]
fn malformed_input_exits_2_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.json", "{\"dim\": 2,\n  \"J\": [[1, 0], [0, -1]],\n", "line"),
        ("rows.json", r#"{"dim": 2, "J": [[1, 0], [0, -1]], "W": [[1, 0, 0], [0, 1]], "S": [[1], [0]]}"#, "field W"),
        ("unknown.json", r#"{"dim": 2, "J": [[1, 0], [0, -1]], "W": [[1, 0], [0, 1]], "Q": 1}"#, "Q"),
        ("nonsig.json", r#"{"dim": 2, "J": [[2, 0], [0, -1]], "W": [[1, 0], [0, 1]], "S": [[1], [0]]}"#, ""),
    ];
    for (name, text, needle) in cases {
        let input = write(dir.path(), name, text);
        let out = run(&["schur", "-i", &input]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let rep = json_of(&out);
        assert!(rep["message"].as_str().unwrap().contains(needle), "{name}: {rep}");
    }
    assert_eq!(run(&["schur", "-i", "/nonexistent/problem.json"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "no-such-suite", "--dim", "2"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--tol", "-1", "schur", "-i", "x.json"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_reports_are_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run(&["verify", "--suite", "thm-minimum", "--dim", "2", "--max-dim", "4", "--instances", "12", "--seed", "7", "--samples", "50", "--report", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn generated_problems_round_trip_through_the_solvers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let path = path.to_str().unwrap();
    let out = run(&["generate", "--regime", "range_nonnegative", "--dim", "3", "--seed", "11", "-o", path]);
    assert_eq!(out.status.code(), Some(0));
    let cert = json_of(&out)["certificate"].clone();
    let first = std::fs::read_to_string(path).unwrap();

    let out = run(&["ims", "-i", path]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(json_of(&out)["normal_residual"].as_f64().unwrap() <= 1e-8);

    let out = run(&["trace-min", "-i", path, "--alt-signature", "3"]);
    assert_eq!(out.status.code(), Some(0));

    let op = write(dir.path(), "t.json", r#"{"T": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}"#);
    let out = run(&["trace", "-i", path, "--op", &op]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_of(&out)["bound_check"].as_f64().unwrap() <= 1e-10);

    let out = run(&["generate", "--regime", "range_nonnegative", "--dim", "3", "--seed", "11", "-o", path]);
    assert_eq!(json_of(&out)["certificate"], cert);
    assert_eq!(std::fs::read_to_string(path).unwrap(), first);
}

#[test]
fn tolerance_override_is_recorded_in_generated_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let out = run(&["--tol", "1e-9", "generate", "--regime", "complementable", "--dim", "2", "--seed", "1", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file["tol"].as_f64(), Some(1e-9));
}
