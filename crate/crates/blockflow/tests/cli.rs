//! The `blockflow` binary end to end: output, exit statuses and help text.

mod common;

use common::{blockflow, demo_model, stderr, stdout, write_model};
use serde_json::Value;

const LOOP: &str = r#"{"step_size": 0.01, "blocks": [
    {"name": "src", "library": "stdblocks", "label": "Constant", "parameters": {"value": 1.0}},
    {"name": "sum", "library": "stdblocks", "label": "Sum", "parameters": {"signs": "++"}},
    {"name": "g2", "library": "stdblocks", "label": "Gain", "parameters": {"k": 0.5}},
    {"name": "g1", "library": "stdblocks", "label": "Gain", "parameters": {"k": 0.5}}],
  "connections": [{"from": "src.0", "to": "sum.0"}, {"from": "g2.0", "to": "sum.1"},
                  {"from": "sum.0", "to": "g1.0"}, {"from": "g1.0", "to": "g2.0"}]}"#;

fn single_block(library: &str, label: &str) -> String {
    format!(
        r#"{{"step_size": 0.01, "blocks": [
            {{"name": "b", "library": "{library}", "label": "{label}", "parameters": {{"value": 1.0}}}}]}}"#
    )
}

#[test]
fn help_text_matches_golden_files() {
    let golden = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for command in ["", "validate", "schedule", "run", "codegen", "blocks"] {
        let args: Vec<&str> = [command, "--help"].into_iter().filter(|a| !a.is_empty()).collect();
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_blockflow")).args(&args).output().unwrap();
        assert!(out.status.success());
        let file = golden.join(format!("help_{}.txt", if command.is_empty() { "top" } else { command }));
        assert_eq!(stdout(&out), std::fs::read_to_string(&file).unwrap(), "{}", file.display());
    }
}

#[test]
fn demo_model_validates() {
    let out = blockflow(&["validate", demo_model().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("ok: "));
}

#[test]
fn algebraic_loop_exits_1_and_names_the_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "loop.json", LOOP);
    let out = blockflow(&["validate", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("algebraic loop: g1 -> g2 -> sum -> g1"), "{}", stderr(&out));
}

#[test]
fn plugin_problems_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("nosuchlib", "Constant", "plugin library 'nosuchlib' not found"),
        ("stdblocks", "Gian", "did you mean 'Gain'?"),
        ("legacyabi", "Constant", "plugin ABI 1, host ABI 2"),
        ("nosymbol", "Constant", "blockflow_plugin_manifest"),
    ];
    for (library, label, expected) in cases {
        let model = write_model(dir.path(), "m.json", &single_block(library, label));
        for command in ["validate", "run"] {
            let out = blockflow(&[command, model.to_str().unwrap(), "--steps", "1"][..if command == "run" { 4 } else { 2 }]);
            assert_eq!(out.status.code(), Some(2), "{library}/{label}: {}", stderr(&out));
            assert!(stderr(&out).contains(expected), "{library}/{label}: {}", stderr(&out));
        }
    }
}

#[test]
fn non_finite_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        dir.path(),
        "nan.json",
        r#"{"step_size": 0.01, "blocks": [
            {"name": "n", "library": "probeblocks", "label": "EmitNaN", "parameters": {"at_step": 3}}]}"#,
    );
    let out = blockflow(&["run", model.to_str().unwrap(), "--steps", "10"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("step 3"), "{}", stderr(&out));
}

#[test]
fn unreadable_inputs_and_unwritable_outputs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    assert_eq!(blockflow(&["validate", missing.to_str().unwrap()]).status.code(), Some(3));

    // A directory cannot be created below a regular file, whoever runs the test.
    let file = dir.path().join("plain");
    std::fs::write(&file, "").unwrap();
    let out_dir = file.join("bundle");
    let out = blockflow(&["codegen", demo_model().to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("cannot write"));
}

#[test]
fn run_logs_one_row_per_step_plus_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let log = format!("plant.0={}", csv.display());
    let out = blockflow(&["run", demo_model().to_str().unwrap(), "--steps", "1000", "--log", &log]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[0], "time,v0,v1");
    assert!(lines[1].starts_with("0.0000000000000000e0,2.9999999999999999e-1,0.0000000000000000e0"), "{}", lines[1]);

    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["executed_steps"], 1000);
    assert_eq!(report["final_time"], 1.0);
    assert_eq!(report["plugins"][0]["library"], "stdblocks");
    assert_eq!(report["plugins"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn overrides_are_applied_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.csv");
    let tuned = dir.path().join("tuned.csv");
    let model = demo_model();
    let run = |csv: &std::path::Path, set: &[&str]| {
        let log = format!("pid.0={}", csv.display());
        let mut args = vec!["run", model.to_str().unwrap(), "--steps", "5", "--log", &log];
        args.extend_from_slice(set);
        let out = blockflow(&args);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        serde_json::from_str::<Value>(&stdout(&out)).unwrap()
    };
    assert_eq!(run(&base, &[])["overrides"], serde_json::json!([]));
    let report = run(&tuned, &["--set", "pid.Kp=12.5"]);
    assert_eq!(report["overrides"], serde_json::json!(["pid.Kp=12.5"]));
    assert_ne!(std::fs::read(&base).unwrap(), std::fs::read(&tuned).unwrap());

    let out = blockflow(&["run", model.to_str().unwrap(), "--steps", "1", "--set", "nobody.k=1"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn independent_faults_are_reported_together() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        dir.path(),
        "two.json",
        r#"{"step_size": 0.01, "blocks": [
            {"name": "c", "library": "stdblocks", "label": "Constant", "parameters": {"value": [1.0, 2.0, 3.0]}},
            {"name": "s", "library": "stdblocks", "label": "Selector", "parameters": {"indices": [0, 1]}},
            {"name": "g", "library": "stdblocks", "label": "Gain", "parameters": {"k": 2.0}},
            {"name": "x", "library": "stdblocks", "label": "Gian", "parameters": {}}],
          "connections": [{"from": "c.0", "to": "s.0"}]}"#,
    );
    let out = blockflow(&["validate", "--json", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["ok"], false);
    assert_eq!(doc["exit_code"], 2);
    let messages: Vec<&str> = doc["diagnostics"].as_array().unwrap().iter().map(|d| d["message"].as_str().unwrap()).collect();
    assert!(messages.iter().any(|m| m.contains("did you mean 'Gain'?")), "{messages:?}");
    assert!(messages.contains(&"input g.0 is not connected"), "{messages:?}");
    let categories: Vec<&str> = doc["diagnostics"].as_array().unwrap().iter().map(|d| d["category"].as_str().unwrap()).collect();
    assert!(categories.contains(&"plugin") && categories.contains(&"model"), "{categories:?}");
}

#[test]
fn validate_json_on_a_good_model() {
    let out = blockflow(&["validate", "--json", demo_model().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc, serde_json::json!({"ok": true, "exit_code": 0, "diagnostics": []}));
}

#[test]
fn schedule_prints_the_demo_order() {
    let out = blockflow(&["schedule", demo_model().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let order: Vec<&str> = doc["order"].as_array().unwrap().iter().map(|b| b["name"].as_str().unwrap()).collect();
    assert_eq!(order, ["plant", "angle", "reference", "error", "pid", "limit"]);
    assert_eq!(doc["step_size"], 0.001);
}

#[test]
fn blocks_lists_labels_and_checksum() {
    let out = blockflow(&["blocks", "--library", "stdblocks"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("stdblocks (ABI 2)\n"), "{text}");
    for label in ["Constant", "Gain", "PID", "Pendulum", "UnitDelay"] {
        assert!(text.lines().any(|l| l.trim() == label), "{label} missing from {text}");
    }
    let out = blockflow(&["blocks", "--library", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn environment_path_is_searched_after_flags() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_blockflow"))
        .args(["blocks", "--library", "probeblocks"])
        .env("BLOCKFLOW_PLUGIN_PATH", common::plugin_dir())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("Probe"));
}
