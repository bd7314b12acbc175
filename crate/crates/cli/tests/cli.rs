//! End-to-end tests of the `walkersim` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn walkersim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walkersim"))
        .args(args)
        .env_remove("WALKERSIM_LOG")
        .output()
        .expect("binary runs")
}

fn error_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let line = text.lines().last().expect("error line on stderr");
    serde_json::from_str(line).expect("stderr carries JSON")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_writes_the_documented_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = walkersim(&["run", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in [
        "telemetry.csv",
        "force_left.csv",
        "force_right.csv",
        "events.jsonl",
        "features.json",
    ] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let features: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("features.json")).unwrap()).unwrap();
    assert_eq!(features["schema_version"], "1.0");
    assert_eq!(features["status"], "complete");
}

#[test]
fn same_inputs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(walkersim(&["run", "--out", p(&a), "--seed", "9"])
        .status
        .success());
    assert!(walkersim(&["run", "--out", p(&b), "--seed", "9"])
        .status
        .success());
    for name in [
        "telemetry.csv",
        "force_left.csv",
        "force_right.csv",
        "events.jsonl",
        "features.json",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"target_velocity": -1.0}"#).unwrap();
    let o = walkersim(&[
        "run",
        "--config",
        p(&cfg),
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert_eq!(e["error"]["kind"], "config");
    assert_eq!(e["error"]["field"], "target_velocity");

    fs::write(&cfg, "{\n  \"dt\": 0.01,\n  \"speed\": 3\n}").unwrap();
    let o = walkersim(&[
        "run",
        "--config",
        p(&cfg),
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert!(e["error"]["field"].as_str().unwrap().starts_with("line 3"));
    assert!(e["error"]["message"].as_str().unwrap().contains("speed"));
}

#[test]
fn unknown_schema_major_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("v2.json");
    fs::write(&cfg, r#"{"schema_version": "2.0"}"#).unwrap();
    let o = walkersim(&[
        "run",
        "--config",
        p(&cfg),
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn incomplete_run_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.json");
    fs::write(&cfg, r#"{"time_cap": 3.0}"#).unwrap();
    let out = dir.path().join("o");
    let o = walkersim(&["run", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["error"]["kind"], "incomplete");
    assert!(out.join("telemetry.csv").is_file());
}

#[test]
fn batch_emits_report_summary_and_charts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("batch");
    let o = walkersim(&["batch", "--out", p(&out), "--variant", "welch"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for run in ["A1", "A2", "B1", "B2"] {
        assert!(out.join(run).join("features.json").is_file());
    }
    for name in [
        "report.json",
        "summary.txt",
        "gait_duration.svg",
        "step_count.svg",
        "stance_pct.svg",
        "swing_pct.svg",
    ] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["variant"], "welch");
    assert_eq!(report["deltas"].as_array().unwrap().len(), 4);
    for m in report["metrics"].as_array().unwrap() {
        assert!(m["t_test"]["significant"].is_boolean());
    }
}

#[test]
fn batch_with_one_condition_skips_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("a_only.json");
    fs::write(
        &cfg,
        r#"{"runs": [{"trial_id": "A1", "rng_seed": 1}, {"trial_id": "A2", "rng_seed": 2}]}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = walkersim(&["batch", "--config", p(&cfg), "--out", p(&out)]);
    assert!(o.status.success());
    assert!(out.join("A1").join("telemetry.csv").is_file());
    assert!(!out.join("report.json").exists());
}

#[test]
fn failed_run_keeps_completed_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one_bad.json");
    fs::write(
        &cfg,
        r#"{"runs": [
            {"trial_id": "A1"},
            {"trial_id": "B1", "condition": "B", "target_distance": 0.6}
        ]}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = walkersim(&["batch", "--config", p(&cfg), "--out", p(&out)]);
    assert!(!o.status.success());
    assert!(!out.join("report.json").exists());
    assert!(out.join("A1").join("features.json").is_file());
    assert!(out.join("B1").join("telemetry.csv").is_file());
    assert_eq!(error_json(&o)["error"]["run"], "B1");
}

#[test]
fn analyze_matches_the_in_process_features() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert!(walkersim(&["run", "--out", p(&run)]).status.success());
    let o = walkersim(&[
        "analyze",
        "--left",
        p(&run.join("force_left.csv")),
        "--right",
        p(&run.join("force_right.csv")),
        "--path-length",
        "8",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let analyzed: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let in_process: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("features.json")).unwrap()).unwrap();
    assert_eq!(analyzed["features"], in_process["features"]);
}

#[test]
fn analyze_reports_truncation_row() {
    let dir = tempfile::tempdir().unwrap();
    let left = dir.path().join("l.csv");
    let right = dir.path().join("r.csv");
    fs::write(&left, "t,force\n0,700\n0.01,700\n0.02\n").unwrap();
    fs::write(&right, "t,force\n0,700\n").unwrap();
    let o = walkersim(&["analyze", "--left", p(&left), "--right", p(&right)]);
    assert_eq!(o.status.code(), Some(4));
    let e = error_json(&o);
    assert_eq!(e["error"]["kind"], "format");
    assert_eq!(e["error"]["row"], 4);
}

#[test]
fn plot_rebuilds_identical_charts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("batch");
    assert!(walkersim(&["batch", "--out", p(&out)]).status.success());
    let again = dir.path().join("plots");
    let o = walkersim(&[
        "plot",
        "--report",
        p(&out.join("report.json")),
        "--out",
        p(&again),
    ]);
    assert!(o.status.success());
    for name in [
        "gait_duration.svg",
        "step_count.svg",
        "stance_pct.svg",
        "swing_pct.svg",
    ] {
        assert_eq!(
            fs::read(out.join(name)).unwrap(),
            fs::read(again.join(name)).unwrap()
        );
    }
}
