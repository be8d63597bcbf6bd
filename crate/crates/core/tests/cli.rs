use std::process::{Command, Output};

use optquad::optimal_coefficients;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optquad"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn coeffs_closed_single_interval_csv() {
    let out = run(&[
        "coeffs", "--n", "1", "--method", "closed", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(&header[..3], ["beta", "x", "c"]);
    assert_eq!(rows.len(), 2);
    let c: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!((c[0] - 0.418_023_3).abs() < 1e-7);
    assert!((c[1] - 0.581_976_7).abs() < 1e-7);
}

#[test]
fn csv_numbers_round_trip() {
    let out = run(&["coeffs", "--n", "7", "--format", "csv"]);
    let (header, rows) = csv_rows(&stdout(&out));
    let col = header.iter().position(|h| h == "c").unwrap();
    let expected = optimal_coefficients(7).unwrap().coefficients();
    for (row, want) in rows.iter().zip(expected) {
        let cell = &row[col];
        let got: f64 = cell.parse().unwrap();
        assert_eq!(got.to_bits(), want.to_bits());
        // 17 significant digits in scientific notation
        assert_eq!(&format!("{got:.16e}"), cell);
    }
}

#[test]
fn json_numbers_round_trip() {
    let v = json(&["coeffs", "--n", "5"]);
    let expected = optimal_coefficients(5).unwrap().coefficients();
    let got: Vec<f64> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["c"].as_f64().unwrap())
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn coeffs_system_matches_closed() {
    let v = json(&["coeffs", "--n", "2", "--method", "system"]);
    let c: Vec<f64> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["c"].as_f64().unwrap())
        .collect();
    let reference = [0.181_478_096, 0.626_542_295, 0.191_979_609];
    for (a, b) in c.iter().zip(reference) {
        assert!((a - b).abs() < 1e-9);
    }
    assert!(v["residual_inf"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn coeffs_literal_root() {
    let v = json(&["coeffs", "--n", "2", "--root", "as-printed"]);
    assert!((v["lambda1"].as_f64().unwrap() - 7.7793).abs() < 1e-4);
    let c0 = v["coefficients"][0]["c"].as_f64().unwrap();
    assert!((c0 - 0.205_36).abs() < 1e-5);
}

#[test]
fn coeffs_precondition_failures() {
    assert_eq!(run(&["coeffs", "--n", "0"]).status.code(), Some(2));
    assert_eq!(
        run(&["coeffs", "--n", "513", "--method", "system"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["coeffs", "--n", "-3"]).status.code(), Some(2));
    assert_eq!(run(&["coeffs"]).status.code(), Some(2));
}

#[test]
fn norm_outputs() {
    let v = json(&["norm", "--n", "2", "--methods", "quadform"]);
    assert!((v["via_quadratic_form"].as_f64().unwrap() - 1.952_297e-4).abs() < 1e-9);
    let v = json(&["norm", "--n", "2", "--methods", "all"]);
    assert_eq!(v["verdict"], "theorem2_discrepant");
    assert!((v["via_theorem2"].as_f64().unwrap() - 11.70).abs() < 0.01);
    let v = json(&["norm", "--n", "1", "--methods", "quadform"]);
    assert!(v["via_quadratic_form"].as_f64().unwrap() > 0.0);
    for m in ["multiplier", "expanded", "theorem2"] {
        let v = json(&["norm", "--n", "3", "--methods", m]);
        assert_eq!(v["N"], 3);
    }
    assert_eq!(
        run(&["norm", "--n", "2", "--methods", "nope"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn norm_csv_single_row() {
    let out = run(&["norm", "--n", "4", "--format", "csv"]);
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    let verdict = header.iter().position(|h| h == "verdict").unwrap();
    assert_eq!(rows[0][verdict], "theorem2_discrepant");
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate", "--max-n", "16", "--tol", "1e-9"]);
    assert_eq!(ok.status.code(), Some(0));
    let fail = run(&["validate", "--max-n", "2", "--tol", "1e-30"]);
    assert_eq!(fail.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fail.stderr).contains("validation failed"));
    assert_eq!(run(&["validate", "--max-n", "0"]).status.code(), Some(2));
    assert_eq!(run(&["validate", "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn convergence_table_output() {
    let out = run(&["convergence", "--n-list", "2,4,8,16", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(
        header,
        ["N", "h", "norm_sq", "ratio", "order_estimate", "abs_error"]
    );
    assert_eq!(rows.len(), 4);
    let norms: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]));
    assert!(rows[0][3].is_empty());

    let v = json(&["convergence", "--n-list", "2,4", "--function", "exp_neg"]);
    for row in v.as_array().unwrap() {
        assert!(row["abs_error"].as_f64().unwrap() <= 1e-12);
    }

    assert_eq!(
        run(&["convergence", "--n-list", "4,2"]).status.code(),
        Some(2)
    );
    let unknown = run(&["convergence", "--n-list", "2", "--function", "cos"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("exp_neg"));
}

#[test]
fn apply_outputs() {
    for f in ["const1", "exp_neg"] {
        let v = json(&["apply", "--n", "8", "--function", f]);
        assert!(v["abs_error"].as_f64().unwrap() <= 1e-12);
    }
    let v = json(&["apply", "--n", "2", "--function", "x"]);
    assert!(v["bound_satisfied"].as_bool().unwrap());
    assert!((v["abs_error"].as_f64().unwrap() - 0.005_25).abs() < 1e-4);
    assert_eq!(
        run(&["apply", "--n", "2", "--function", "tan"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn audit_reports_both_roots() {
    let out = run(&["audit", "--n", "4", "--format", "csv"]);
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 2);
    let gap = header
        .iter()
        .position(|h| h == "max_gap_vs_system")
        .unwrap();
    assert!(rows[0][gap].parse::<f64>().unwrap() < 1e-12);
    assert!(rows[1][gap].parse::<f64>().unwrap() > 1e-3);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["norm", "--n", "9"][..],
        &["convergence", "--n-list", "1,3,9", "--format", "csv"],
        &["coeffs", "--n", "33", "--method", "system"],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout);
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let out = run(&["coeffs", "--n", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["N"], 3);
}
