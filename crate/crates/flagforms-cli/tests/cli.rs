//! End-to-end tests of the `flagforms` binary: flag handling, config-file
//! layering, report formats, exit codes, and byte determinism.

use std::process::{Command, Output};

fn flagforms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagforms"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is valid JSON")
}

#[test]
fn pair_reports_the_unit_rank_two_pairing() {
    let output = flagforms(&["pair", "--n", "2", "--alpha", "1,0"]);
    let doc = stdout_json(&output);
    assert_eq!(doc["schema"], "flagforms-report/1");
    assert_eq!(doc["command"], "pair");
    assert_eq!(doc["n"], 2);
    assert_eq!(doc["alpha"][0], 1);
    assert_eq!(doc["alpha"][1], 0);
    assert_eq!(doc["C1"]["mode"], "user_supplied");
    assert_eq!(doc["C1"]["value"], 1.0);
    assert_eq!(doc["result"], 1.0);
    assert_eq!(doc["exact_numerator"], "1");
    assert_eq!(doc["exact_denominator"], "1");
    assert_eq!(doc["pass"], true);
}

#[test]
fn pair_reports_a_vanishing_repeated_index() {
    let output = flagforms(&["pair", "--n", "3", "--alpha", "3,0,0"]);
    let doc = stdout_json(&output);
    assert_eq!(doc["result"], 0.0);
    assert_eq!(doc["exact_numerator"], "0");
    assert_eq!(doc["exact_denominator"], "1");
    assert_eq!(doc["pass"], true);
}

#[test]
fn pair_scales_by_a_volume_derived_constant() {
    let output = flagforms(&[
        "pair",
        "--n",
        "2",
        "--alpha",
        "0,1",
        "--c1-mode",
        "volume:12.566370614359172:1,-1",
    ]);
    let doc = stdout_json(&output);
    assert_eq!(doc["C1"]["mode"], "orbit_volume");
    let value = doc["result"].as_f64().unwrap();
    assert!((value + 2.0 * std::f64::consts::PI).abs() < 1e-12, "{value}");
    assert_eq!(doc["exact_numerator"], "-1");
}

#[test]
fn mismatched_index_length_exits_with_a_config_error() {
    let output = flagforms(&["pair", "--n", "3", "--alpha", "2,1"]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("error"), "{stderr}");
}

#[test]
fn missing_command_exits_with_a_config_error() {
    let output = flagforms(&[]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("no command"), "{stderr}");
}

#[test]
fn unknown_format_exits_with_a_config_error() {
    let output = flagforms(&["basis", "--format", "yaml"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn csv_rows_match_the_json_checks() {
    let json_doc = stdout_json(&flagforms(&["basis"]));
    let csv_out = flagforms(&["basis", "--format", "csv"]);
    assert!(csv_out.status.success());
    let csv = String::from_utf8(csv_out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("name,value,tol,pass"));

    let checks = json_doc["checks"].as_array().unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), checks.len());
    for (row, check) in rows.iter().zip(checks) {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[0], check["name"].as_str().unwrap());
        let value: f64 = cells[1].parse().unwrap();
        assert_eq!(value, check["value"].as_f64().unwrap());
        let tol: f64 = cells[2].parse().unwrap();
        assert_eq!(tol, check["tol"].as_f64().unwrap());
        let pass: bool = cells[3].parse().unwrap();
        assert_eq!(pass, check["pass"].as_bool().unwrap());
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "command=basis\nformat=csv\nseed=5\n").unwrap();

    let output = flagforms(&["--config", path.to_str().unwrap(), "--format", "json"]);
    let doc = stdout_json(&output);
    assert_eq!(doc["command"], "basis");
    assert_eq!(doc["config"]["format"], "json");
    assert_eq!(doc["config"]["seed"], 5);
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let output = flagforms(&["basis", "--out", path.to_str().unwrap()]);
    assert!(output.status.success());
    assert!(output.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["command"], "basis");
    assert_eq!(doc["pass"], true);
}

#[test]
fn a_failing_tolerance_override_exits_one() {
    let output = flagforms(&["basis", "--tol", "gram_defect_n3=-1"]);
    assert_eq!(output.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(doc["pass"], false);
    assert_eq!(doc["config"]["tol_overrides"]["gram_defect_n3"], -1.0);
}

#[test]
fn identical_runs_emit_identical_bytes() {
    let first = flagforms(&["roots", "--seed", "123"]);
    let second = flagforms(&["roots", "--seed", "123"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn connection_check_serializes_a_unitary_tuple() {
    let output = flagforms(&["connection-check", "--n", "2", "--g", "1", "--seed", "3"]);
    let doc = stdout_json(&output);
    let tuple = &doc["tuple"];
    assert_eq!(tuple["n"], 2);
    assert_eq!(tuple["g"], 1);
    let entries = tuple["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for entry in entries {
        let cells = entry.as_array().unwrap();
        assert_eq!(cells.len(), 4);
        // Unitarity leaves every row with unit norm; entries are [re, im].
        let a = (cells[0][0].as_f64().unwrap(), cells[0][1].as_f64().unwrap());
        let b = (cells[1][0].as_f64().unwrap(), cells[1][1].as_f64().unwrap());
        let row_norm = a.0 * a.0 + a.1 * a.1 + b.0 * b.0 + b.1 * b.1;
        assert!((row_norm - 1.0).abs() < 1e-9, "{row_norm}");
    }
}
