//! End-to-end checks of the command line: config handling, artifacts,
//! reproducibility, exit codes.

use std::path::{Path, PathBuf};
use std::process::Command as Process;

use infobridge_cli::{load_config, run, RunConfig};

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "infobridge-cli-{tag}-{}",
        std::process::id()
    ));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

#[test]
fn load_rejects_missing_file_and_bad_schema() {
    assert!(load_config(Path::new("/nonexistent/config.json")).is_err());
    let dir = scratch_dir("schema");
    let path = write_config(&dir, "bad.json", r#"{"command": "nope", "seed": 1}"#);
    let err = load_config(&path).unwrap_err();
    assert!(err.to_string().contains("schema"), "got: {err}");
}

#[test]
fn capacity_run_writes_increasing_energies() {
    let dir = scratch_dir("capacity");
    let config: RunConfig = serde_json::from_str(&format!(
        r#"{{
            "command": "capacity",
            "seed": 5,
            "set": {{"variant": "cantor", "a": 1.0, "b": 2.0, "branches": 2, "ratio": 0.2}},
            "levels": [2, 3, 4, 5],
            "out_dir": {:?}
        }}"#,
        dir.join("out")
    ))
    .unwrap();
    config.validate().unwrap();
    let report = run(&config).unwrap();
    let csv = std::fs::read_to_string(dir.join("out/capacity.csv")).unwrap();
    let energies: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(energies.len(), 4);
    assert!(
        energies.windows(2).all(|w| w[1] > w[0]),
        "energies not increasing: {energies:?}"
    );
    assert_eq!(report.artifacts.len(), 2);
}

#[test]
fn experiment_run_reports_estimates_and_verdict() {
    let dir = scratch_dir("experiment");
    let config: RunConfig = serde_json::from_str(&format!(
        r#"{{
            "command": "experiment",
            "seed": 11,
            "law": {{"kind": "atomic", "atoms": [
                {{"time": 1.0, "weight": 0.5}},
                {{"time": 2.0, "weight": 0.5}}
            ]}},
            "levels": [2, 3],
            "n_paths": 300,
            "out_dir": {:?}
        }}"#,
        dir.join("out")
    ))
    .unwrap();
    config.validate().unwrap();
    let report = run(&config).unwrap();
    let outputs = &report.report["outputs"];
    assert!(outputs["verdict"]["consistent_with_predictable"].is_boolean());
    assert_eq!(outputs["estimates"].as_array().unwrap().len(), 2);
    assert!(outputs["per_atom"].as_array().unwrap().len() == 2);
    assert!(outputs["mixture"]["holds"].is_boolean());
}

#[test]
fn binary_exit_codes_follow_the_contract() {
    let binary = env!("CARGO_BIN_EXE_infobridge");
    let dir = scratch_dir("exit");

    // config error: missing seed
    let bad = write_config(
        &dir,
        "missing-seed.json",
        r#"{"command": "simulate", "law": {"kind": "exponential", "rate": 1.0}}"#,
    );
    let out = Process::new(binary)
        .args(["--config", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    // runtime error: experiment hypothesis violated (support contains 0)
    let gated = write_config(
        &dir,
        "gated.json",
        &format!(
            r#"{{"command": "experiment", "seed": 1, "n_paths": 10, "levels": [2],
                "law": {{"kind": "exponential", "rate": 1.0}},
                "out_dir": {:?}}}"#,
            dir.join("gated-out")
        ),
    );
    let out = Process::new(binary)
        .args(["--config", gated.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0 ∉ Γ"));

    // success, with overrides
    let good = write_config(
        &dir,
        "good.json",
        &format!(
            r#"{{"command": "simulate", "seed": 4, "n_paths": 20,
                "law": {{"kind": "uniform-interval", "a": 1.0, "b": 2.0}},
                "out_dir": {:?}}}"#,
            dir.join("good-out")
        ),
    );
    let out = Process::new(binary)
        .args(["--config", good.to_str().unwrap(), "--paths", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("good-out/paths.csv").exists());
    assert!(dir.join("good-out/report.json").exists());
}

#[test]
fn report_hash_matches_embedded_config() {
    use sha2::{Digest, Sha256};
    let dir = scratch_dir("hash");
    let config: RunConfig = serde_json::from_str(&format!(
        r#"{{"command": "simulate", "seed": 21, "n_paths": 5,
            "law": {{"kind": "uniform-interval", "a": 0.5, "b": 1.5}},
            "out_dir": {:?}}}"#,
        dir.join("out")
    ))
    .unwrap();
    let report = run(&config).unwrap();
    let echoed = &report.report["config"];
    let bytes = serde_json::to_vec(&serde_json::from_value::<RunConfig>(echoed.clone()).unwrap())
        .unwrap();
    let recomputed: String = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    assert_eq!(recomputed, report.config_hash);
}
