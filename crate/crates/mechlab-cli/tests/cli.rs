//! End-to-end runs of the compiled binary: exit codes, output anchors, and
//! byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mechlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mechlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn cc_const_solves_the_single_item_point() {
    let out = mechlab(&["cc-const", "--n", "1", "--alpha", "1"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let row = text.lines().nth(1).expect("data row");
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(&fields[..3], &["1", "1", "3"], "row: {row}");
}

#[test]
fn cc_const_rejects_degenerate_alpha() {
    let out = mechlab(&["cc-const", "--n", "1", "--alpha", "0"]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = mechlab(&["verify", "--suite", "nope"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("unknown suite"), "stderr: {}", stderr(&out));
}

#[test]
fn bounds_suite_prints_checks_and_passes() {
    let out = mechlab(&["verify", "--suite", "bounds", "--samples", "1000"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("[pass]"), "stdout: {text}");
    assert!(text.contains("0 failed"), "stdout: {text}");
}

#[test]
fn qgame_report_carries_exact_rationals() {
    let out = mechlab(&["qgame-verify", "--m", "2", "--trials", "40"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(
        report["case_probabilities"],
        serde_json::json!(["1/3", "2/3"])
    );
    assert!(report["min_gap"].as_f64().unwrap() >= -1e-12);
    assert_eq!(report["passed"], serde_json::json!(true));

    let out = mechlab(&["qgame-verify", "--m", "4", "--trials", "1"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn figure_panel_b_hits_the_anchor_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig1b.csv");
    let out = mechlab(&["figure1", "--panel", "b", "--out", csv.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let mut anchors = std::collections::HashMap::new();
    for line in fs::read_to_string(&csv).unwrap().lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[3] == "1" {
            anchors.insert(
                (f[1].to_string(), f[2].to_string()),
                f[4].parse::<f64>().unwrap(),
            );
        }
    }
    assert!((anchors[&("cdw".into(), "1".into())] - 1.0).abs() < 1e-12);
    assert!((anchors[&("bspa".into(), "3".into())] - 3.0).abs() < 1e-6);
    assert!((anchors[&("vcg".into(), "5".into())] - 5.0).abs() < 1e-6);

    let manifest_path = dir.path().join("fig1b.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).expect("manifest json");
    assert_eq!(manifest["rows"], serde_json::json!(120));
    assert_eq!(manifest["csv"], serde_json::json!("fig1b.csv"));
}

fn write_config(dir: &Path, out_name: &str, m_range: (u32, u32)) -> std::path::PathBuf {
    let out = dir.join(out_name);
    let config = serde_json::json!({
        "name": "demo",
        "marginals": [{"family": "exponential", "params": {"rate": 1.0}}],
        "m_range": [m_range.0, m_range.1],
        "mechanisms": [
            {"mechanism": "srev", "bidders": 1},
            {"mechanism": "vcg", "bidders": 2}
        ],
        "sampling": {"seed": 99, "samples": 50000},
        "out": out
    });
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

#[test]
fn mech_eval_reruns_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let config = write_config(dir, "run.csv", (1, 3));
        let out = mechlab(&["mech-eval", "--config", config.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    }
    for name in ["run.csv", "run.manifest.json"] {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }

    // Single-buyer separate-sale revenue is closed form: m posted prices at
    // the monopoly point of the unit exponential, 1/e each.
    for line in fs::read_to_string(dir_a.path().join("run.csv"))
        .unwrap()
        .lines()
        .skip(1)
    {
        let f: Vec<&str> = line.split(',').collect();
        if f[1] == "srev" {
            let m: f64 = f[3].parse().unwrap();
            let mean: f64 = f[4].parse().unwrap();
            assert!((mean - m * (-1.0f64).exp()).abs() < 1e-9, "row: {line}");
        }
    }
}

#[test]
fn empty_m_range_fails_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "never.csv", (3, 2));
    let out = mechlab(&["mech-eval", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("m_range"), "stderr: {}", stderr(&out));
    assert!(!dir.path().join("never.csv").exists());
}
