use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn qtel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtel"))
        .args(args)
        .env("QTEL_THREADS", "1")
        .output()
        .expect("spawn qtel")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn echo_value(csv: &str, key: &str) -> Option<String> {
    let prefix = format!("# {key} = ");
    csv.lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(qtel(&["--help"]).status.code(), Some(0));
    assert_eq!(qtel(&["--version"]).status.code(), Some(0));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(qtel(&["bogus"]).status.code(), Some(2));
}

#[test]
fn malformed_verify_list_is_usage_error() {
    let out = qtel(&["verify", "--p-values", "0.1,abc"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qtel(&["verify", "--epsilon-values", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_is_usage_error() {
    assert_eq!(qtel(&["probs", "--N", "9"]).status.code(), Some(2));
    assert_eq!(qtel(&["probs", "--epsilon", "2"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_one() {
    let out = qtel(&["probs", "--out", "/nonexistent-dir/qtel/probs.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_passes_on_small_grid() {
    let out = qtel(&[
        "verify",
        "--p-values",
        "0,0.5",
        "--indist-values",
        "0.5,1",
        "--epsilon-values",
        "1",
        "--phi-values",
        "0,1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&stdout(&out));
    assert!(rows.iter().any(|r| r[0] == "n2" && r[6] == "pass"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "# test configuration\nN = 3\nepsilon = 0.5\nindist = 0.8\nalpha = 2\n").unwrap();
    let out = qtel(&["probs", "--config", path.to_str().unwrap(), "--epsilon", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(echo_value(&text, "N").as_deref(), Some("3"));
    let eps: f64 = echo_value(&text, "epsilon").unwrap().parse().unwrap();
    assert_eq!(eps, 0.25);
    let total: f64 = data_rows(&text).iter().map(|r| r[6].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12, "sum {total}");
}

#[test]
fn output_file_gets_manifest_with_digest() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("probs.csv");
    let out = qtel(&["probs", "--N", "2", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let body = std::fs::read(&out_path).unwrap();
    let manifest_path = Path::new(&format!("{}.manifest.json", out_path.display())).to_path_buf();
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["command"], "probs");
    let digest = format!("{:x}", Sha256::digest(&body));
    assert_eq!(manifest["outputs"][0]["sha256"], digest.as_str());
}

#[test]
fn curve_with_two_samples() {
    let out = qtel(&["curve", "--N", "3", "--samples", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 2);
    let lo: f64 = rows[0][0].parse().unwrap();
    let hi: f64 = rows[1][0].parse().unwrap();
    assert!((lo + std::f64::consts::PI).abs() < 1e-12 && (hi - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn two_photon_curve_is_flat() {
    let out = qtel(&["curve", "--N", "2", "--epsilon", "0.7", "--indist", "0.9", "--alpha", "1", "--samples", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let expected = 0.5 * 0.7 * (-0.5f64).exp() * 0.9;
    for row in data_rows(&stdout(&out)) {
        let f: f64 = row[1].parse().unwrap();
        assert!((f - expected).abs() < 1e-12, "{f} vs {expected}");
    }
}

#[test]
fn optimize_json_output() {
    let out = qtel(&["optimize", "--N", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["command"], "optimize");
    let records = doc["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    let alpha = records[0]["alpha_opt"].as_f64().unwrap();
    assert!((alpha - 4.0).abs() < 1e-3, "alpha {alpha}");
}
