//! End-to-end checks of the esst binary: exit codes, file layout, and the
//! byte-exactness of repeated runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn esst() -> Command {
    Command::new(env!("CARGO_BIN_EXE_esst"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process exited")
}

#[test]
fn simulate_reference_config_writes_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = esst()
        .args(["simulate", "--config"])
        .arg(repo_config("fig3a.cfg"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let left = fs::read_to_string(dir.path().join("populations_left.csv")).unwrap();
    let right = fs::read_to_string(dir.path().join("populations_right.csv")).unwrap();
    assert!(left.starts_with("t_s,p1,p2\n"));
    assert!(right.starts_with("t_s,p1,p2\n"));

    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["model"], "effective");
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs[0]["enantiomer"], "left");
    assert!(runs[0]["peak_p2"].as_f64().unwrap() <= 1e-10);
    assert!(runs[1]["peak_p2"].as_f64().unwrap() >= 0.999);
    assert!(summary["protocol"]["discrimination"].as_f64().unwrap() >= 0.999);
}

#[test]
fn simulate_is_byte_reproducible() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let out = esst()
            .args(["simulate", "--config"])
            .arg(repo_config("fig3b.cfg"))
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 0);
    }
    for name in ["populations_left.csv", "populations_right.csv", "summary.json"] {
        let a = fs::read(dirs[0].path().join(name)).unwrap();
        let b = fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
}

#[test]
fn achiral_coupling_gives_identical_traces() {
    // With the 1 <-> 2 dipole zeroed nothing distinguishes the mirror forms.
    let base = fs::read_to_string(repo_config("fig3a.cfg")).unwrap();
    let achiral = base
        .replace("z_21 = 1.0", "z_21 = 0.0")
        .split("[protocol]")
        .next()
        .unwrap()
        .to_string();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("achiral.cfg");
    fs::write(&cfg, achiral).unwrap();

    let out = esst()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let left = fs::read(dir.path().join("populations_left.csv")).unwrap();
    let right = fs::read(dir.path().join("populations_right.csv")).unwrap();
    assert_eq!(left, right, "achiral traces must be byte-equal");
}

#[test]
fn model_and_enantiomer_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let out = esst()
        .args(["simulate", "--config"])
        .arg(repo_config("fig3a.cfg"))
        .arg("--out")
        .arg(dir.path())
        .args(["--model", "full", "--enantiomer", "right"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("populations_left.csv").exists());
    let right = fs::read_to_string(dir.path().join("populations_right.csv")).unwrap();
    assert!(right.starts_with("t_s,p1,p2,p3p,p3m\n"), "full model carries four columns");
}

#[test]
fn design_synchronized_transfer_solves_ratio_three() {
    let out = esst()
        .args(["design", "--config"])
        .arg(repo_config("fig3a.cfg"))
        .args(["--mode", "sync_right", "--n-left", "1", "--n-right", "0"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["solution"]["mode"], "sync_transfer_right");
    assert_eq!(report["solution"]["ratio"].as_f64().unwrap(), 3.0);
    let t = report["solution"]["transfer_time"].as_f64().unwrap();
    assert!((t - 1.25e-6).abs() < 1e-12);
    // The echoed field must realize the ratio through the 1 <-> 2 amplitude.
    let amp = report["fields"]["field_12"]["amplitude_2pi_mhz"].as_f64().unwrap();
    assert!((amp - 3.0 * 0.34641016151377546).abs() < 1e-12);
    assert!(report["fidelity"]["p2_right"].as_f64().unwrap() >= 0.999);
    assert!(report["fidelity"]["p2_left"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn design_dark_mode_solves_ratio_minus_one() {
    let out = esst()
        .args(["design", "--config"])
        .arg(repo_config("fig3a.cfg"))
        .args(["--mode", "dark_left", "--n", "0"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["solution"]["ratio"].as_f64().unwrap(), -1.0);
    let t = report["solution"]["transfer_time"].as_f64().unwrap();
    assert!((t - 1.25e-6).abs() < 1e-12);
}

#[test]
fn design_rejects_unorderable_period_counts() {
    let out = esst()
        .args(["design", "--config"])
        .arg(repo_config("fig3a.cfg"))
        .args(["--mode", "sync_right", "--n-left", "1", "--n-right", "1"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("n_left > n_right"), "stderr: {stderr}");
}

#[test]
fn design_falls_back_to_config_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("design.json");
    let out = esst()
        .args(["design", "--config"])
        .arg(repo_config("fig3b.cfg"))
        .arg("--out")
        .arg(&report_path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["solution"]["mode"], "sync_transfer_right");
    let on_disk: Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report, on_disk);
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("verify.json");
    let out = esst()
        .args(["verify", "--config"])
        .arg(repo_config("fig3a.cfg"))
        .arg("--out")
        .arg(&report_path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["passed"], true);
    let names: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"config_loop_phase"));
    assert!(names.contains(&"elimination_ladder"));
    assert!(report_path.exists());
}

#[test]
fn verify_rejects_corrupted_config_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[rotor]\na_2pi_ghz = up\n").unwrap();
    let report_path = dir.path().join("verify.json");
    let out = esst()
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&report_path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(!report_path.exists(), "no report may be written for a bad config");
}

#[test]
fn missing_config_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = esst()
        .args(["simulate", "--config"])
        .arg(dir.path().join("nope.cfg"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("nope.cfg"), "stderr names the path: {stderr}");
}
