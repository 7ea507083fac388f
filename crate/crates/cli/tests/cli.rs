//! Integration tests driving the compiled `tdse` binary.

use std::path::Path;
use std::process::{Command, Output};

fn tdse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdse"))
        .args(args)
        .output()
        .expect("spawn tdse")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Small, fast free-space run writing CSV to `out`.
fn small_run_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut args = vec![
        "run", "--xmin", "-40", "--xmax", "40", "--J", "800", "--x0", "-10", "--sigma", "2",
        "--p0", "1", "--dt", "0.01", "--tmax", "2", "--every", "20", "--out", out,
    ];
    args.extend_from_slice(extra);
    args
}

fn parse_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn run_emits_fixed_csv_schema_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("records.csv");
    let output = tdse(&small_run_args(out.to_str().unwrap(), &[]));
    assert!(output.status.success(), "{}", stderr_of(&output));

    let (header, rows) = parse_csv(&out);
    assert_eq!(
        header.join(","),
        "time,norm,mean_x,mean_p,delta_x,delta_p,uncertainty_product,analytic_reference,relative_error,mean_H"
    );
    // Samples at steps 0, 20, ..., 200.
    assert_eq!(rows.len(), 11);

    let first = &rows[0];
    assert_eq!(first[0].parse::<f64>().unwrap(), 0.0);
    assert!((first[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
    assert!((first[6].parse::<f64>().unwrap() - 0.5).abs() < 1e-4);

    // Every emitted row keeps unit norm and sits on or above the
    // Heisenberg floor.
    for row in &rows {
        assert!((row[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
        assert!(row[6].parse::<f64>().unwrap() >= 0.5 - 1e-6);
    }

    let summary = stdout_of(&output);
    assert!(summary.contains("max_relative_error="), "{summary}");
    assert!(summary.contains("final_norm_drift="), "{summary}");
}

#[test]
fn compare_ratio_flattens_when_time_error_dominates() {
    // Huge dt with tiny dx: both schemes are limited by the shared
    // second-order time discretization, so their errors nearly coincide.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("compare.csv");
    let output = tdse(&[
        "compare",
        "--xmin",
        "-30",
        "--xmax",
        "30",
        "--J",
        "1200",
        "--x0",
        "0",
        "--sigma",
        "2",
        "--p0",
        "0",
        "--dt",
        "0.5",
        "--tmax",
        "5",
        "--every",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let summary = stdout_of(&output);
    let ratio: f64 = summary
        .split_whitespace()
        .find_map(|t| t.strip_prefix("ratio_tri_over_penta="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        (0.8..1.25).contains(&ratio),
        "expected near-unity ratio, got {ratio}"
    );
}

#[test]
fn summary_max_error_equals_maximum_over_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("records.csv");
    let output = tdse(&small_run_args(out.to_str().unwrap(), &[]));
    assert!(output.status.success());

    let (_, rows) = parse_csv(&out);
    let max_err = rows
        .iter()
        .map(|r| r[8].parse::<f64>().unwrap())
        .fold(0.0f64, f64::max);

    let summary = stdout_of(&output);
    let token = summary
        .split_whitespace()
        .find_map(|t| t.strip_prefix("max_relative_error="))
        .unwrap()
        .to_string();
    assert_eq!(token, format!("{max_err:.16e}"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    assert!(tdse(&small_run_args(out1.to_str().unwrap(), &[]))
        .status
        .success());
    assert!(tdse(&small_run_args(out2.to_str().unwrap(), &[]))
        .status
        .success());
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn jsonl_records_parse_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("records.jsonl");
    let output = tdse(&small_run_args(
        out.to_str().unwrap(),
        &["--format", "jsonl"],
    ));
    assert!(output.status.success());

    let text = std::fs::read_to_string(&out).unwrap();
    let mut count = 0;
    for line in text.lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(value["time"].is_f64() || value["time"].is_number());
        assert!(value["uncertainty_product"].is_number());
        count += 1;
    }
    assert_eq!(count, 11);
}

#[test]
fn residual_checking_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("records.csv");
    let output = tdse(&small_run_args(
        out.to_str().unwrap(),
        &["--check-residuals"],
    ));
    assert!(output.status.success(), "{}", stderr_of(&output));
}

#[test]
fn zero_dt_is_a_usage_error() {
    let output = tdse(&["run", "--dt", "0"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).contains("dt"));
}

#[test]
fn harmonic_without_omega_is_a_usage_error() {
    let output = tdse(&["run", "--potential", "harmonic", "--tmax", "1"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).contains("omega"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let output = tdse(&["run", "--frobnicate", "3"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn unwritable_output_path_is_an_io_error() {
    let output = tdse(&small_run_args("/nonexistent-dir/records.csv", &[]));
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "x0 = -5.0\nsigma = 2.0\ntmax = 1.0\nJ = 800\nxmin = -40.0\nxmax = 40.0\np0 = 0.0\n",
    )
    .unwrap();
    let out = dir.path().join("records.csv");
    let output = tdse(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--x0",
        "-10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let (_, rows) = parse_csv(&out);
    // The flag value -10 must win over the file's -5.
    let mean_x = rows[0][2].parse::<f64>().unwrap();
    assert!((mean_x + 10.0).abs() < 1e-6, "mean_x = {mean_x}");
}

#[test]
fn tabulated_potential_runs_without_reference() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("v.txt");
    let values: Vec<String> = (0..=800).map(|_| "0.0".to_string()).collect();
    std::fs::write(&table, values.join("\n")).unwrap();
    let out = dir.path().join("records.csv");
    let output = tdse(&small_run_args(
        out.to_str().unwrap(),
        &[
            "--potential",
            "file",
            "--potential-file",
            table.to_str().unwrap(),
        ],
    ));
    assert!(output.status.success(), "{}", stderr_of(&output));

    let (_, rows) = parse_csv(&out);
    // No closed-form reference: those cells stay empty.
    assert!(rows.iter().all(|r| r[7].is_empty() && r[8].is_empty()));
    assert!(stdout_of(&output).contains("max_relative_error=n/a"));
}

#[test]
fn compare_reports_error_ratio_above_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("compare.csv");
    let output = tdse(&[
        "compare",
        "--xmin",
        "-30",
        "--xmax",
        "30",
        "--J",
        "400",
        "--x0",
        "0",
        "--sigma",
        "2",
        "--p0",
        "0",
        "--dt",
        "0.01",
        "--tmax",
        "5",
        "--every",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let (header, rows) = parse_csv(&out);
    assert_eq!(
        header.join(","),
        "time,uncertainty_tridiagonal,uncertainty_pentadiagonal,analytic_reference,\
         relative_error_tridiagonal,relative_error_pentadiagonal"
    );
    assert_eq!(rows.len(), 11);

    let summary = stdout_of(&output);
    let ratio: f64 = summary
        .split_whitespace()
        .find_map(|t| t.strip_prefix("ratio_tri_over_penta="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio > 1.0, "ratio = {ratio}");
}

#[test]
fn compare_requires_analytic_reference() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("v.txt");
    let values: Vec<String> = (0..=800).map(|_| "0.0".to_string()).collect();
    std::fs::write(&table, values.join("\n")).unwrap();
    let output = tdse(&[
        "compare",
        "--xmin",
        "-40",
        "--xmax",
        "40",
        "--J",
        "800",
        "--tmax",
        "1",
        "--potential",
        "file",
        "--potential-file",
        table.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn converge_requires_three_spacings() {
    let output = tdse(&[
        "converge", "--xmin", "-30", "--xmax", "30", "--x0", "0", "--p0", "0", "--tmax", "1",
        "--dx", "0.4",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).contains("insufficient"));
}

#[test]
fn converge_recovers_both_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("orders.csv");
    let output = tdse(&[
        "converge",
        "--xmin",
        "-30",
        "--xmax",
        "30",
        "--x0",
        "0",
        "--sigma",
        "2",
        "--p0",
        "0",
        "--tmax",
        "1",
        "--dx",
        "0.4,0.2,0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let (header, rows) = parse_csv(&out);
    assert_eq!(header.join(","), "dx,error_tridiagonal,error_pentadiagonal");
    assert_eq!(rows.len(), 3);

    let summary = stdout_of(&output);
    let grab = |key: &str| -> f64 {
        summary
            .split_whitespace()
            .find_map(|t| t.strip_prefix(key))
            .unwrap()
            .parse()
            .unwrap()
    };
    let tri = grab("order_tridiagonal=");
    let penta = grab("order_pentadiagonal=");
    assert!((tri - 2.0).abs() < 0.4, "tridiagonal order {tri}");
    assert!((penta - 4.0).abs() < 0.6, "pentadiagonal order {penta}");
}
