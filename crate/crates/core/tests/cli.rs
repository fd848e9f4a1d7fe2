//! End-to-end runs of the `cpflow` binary.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cpflow(args: &[&str], config: Option<&Path>, out: &Path) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cpflow"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.status().expect("cpflow runs").code().expect("exit code")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("input.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_lemmas_default_passes_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    assert_eq!(cpflow(&["verify-lemmas"], None, dir.path()), 0);
    assert!(start.elapsed().as_secs_f64() <= 10.0, "{:?}", start.elapsed());
    for f in ["config.json", "appendix_report.json", "appendix_report.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn verify_lemmas_tolerates_a_loose_leakage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "verify_lemmas": {"leakage": 0.1}}"#);
    assert_eq!(cpflow(&["verify-lemmas"], Some(&cfg), &dir.path().join("out")), 0);
}

#[test]
fn config_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let psi = write_config(dir.path(), r#"{"schema_version": 1, "verify_lemmas": {"psi_n": [4]}}"#);
    assert_eq!(cpflow(&["verify-lemmas"], Some(&psi), &dir.path().join("a")), 64);
    let odd = write_config(dir.path(), r#"{"schema_version": 1, "falsify": {"dims": [[6, 1]]}}"#);
    assert_eq!(cpflow(&["falsify"], Some(&odd), &dir.path().join("b")), 64);
    assert_eq!(cpflow(&["flow"], Some(&dir.path().join("missing.json")), &dir.path().join("c")), 64);
    assert_eq!(cpflow(&["flow", "--threads", "many"], None, &dir.path().join("d")), 64);
}

#[test]
fn falsify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cpflow(&["falsify", "--seed", "11"], Some(&configs().join("quick_falsify.json")), dir.path()), 0);
    assert_eq!(read_json(&dir.path().join("counterexamples.json")), Value::Array(vec![]));
    let report = read_json(&dir.path().join("falsify_report.json"));
    assert_eq!(report["spec"]["seed"], 11);
    assert_eq!(read_json(&dir.path().join("config.json"))["seed"], 11);
}

#[test]
fn sphere_preset_blows_up() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cpflow(&["flow"], Some(&configs().join("sphere.json")), dir.path()), 0);
    assert_eq!(read_json(&dir.path().join("summary.json"))["classification"], "BLOWUP_DETECTED");
}

#[test]
fn totally_geodesic_preset_decays() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cpflow(&["flow"], Some(&configs().join("totally_geodesic.json")), dir.path()), 0);
    assert_eq!(read_json(&dir.path().join("summary.json"))["classification"], "DECAY_DETECTED");
}

#[test]
fn clifford_preset_completes_and_echo_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(cpflow(&["flow", "--threads", "1"], Some(&configs().join("clifford.json")), &a), 0);
    assert_eq!(read_json(&a.join("summary.json"))["classification"], "COMPLETED");
    assert_eq!(cpflow(&["flow"], Some(&a.join("config.json")), &b), 0);
    for f in ["trajectory.csv", "events.jsonl", "summary.json", "config.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn perturbed_preset_is_inconclusive_or_classified() {
    let dir = tempfile::tempdir().unwrap();
    let code = cpflow(&["flow"], Some(&configs().join("perturbed_sphere.json")), dir.path());
    assert!(code == 0 || code == 3, "{code}");
}

#[test]
fn geometry_of_totally_geodesic_preset() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cpflow(&["geometry"], Some(&configs().join("totally_geodesic.json")), dir.path()), 0);
    let summary = read_json(&dir.path().join("summary.json"));
    assert!(summary["max_h2"].as_f64().unwrap() <= 1e-6);
    assert!(dir.path().join("nodes.csv").exists());
}
