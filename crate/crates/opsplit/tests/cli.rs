//! End-to-end tests of the `opsplit` binary: subcommands, exit codes,
//! JSON output shapes, and the trace-directory environment variable.

use serde_json::Value;
use std::process::{Command, Output};

fn opsplit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_opsplit"))
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout was not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process was not killed by a signal")
}

#[test]
fn constants_compose_prints_the_sharp_constant_and_ranges() {
    let output = opsplit()
        .args(["constants", "compose", "--alphas", "0.75,0.125", "--eps", "0.1"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0);
    let v = stdout_json(&output);
    assert!((v["phi"].as_f64().unwrap() - 22.0 / 29.0).abs() < 1e-15);
    assert!((v["km_sup"]["value"].as_f64().unwrap() - 29.0 / 22.0).abs() < 1e-12);
    assert_eq!(v["km_sup"]["inclusive"], Value::Bool(false));
    assert_eq!(v["extended_sup"]["inclusive"], Value::Bool(true));
    // The extended cap sits strictly below the classical one.
    assert!(
        v["extended_sup"]["value"].as_f64().unwrap() < v["km_sup"]["value"].as_f64().unwrap()
    );
}

#[test]
fn constants_compare_prints_the_classical_bounds_next_to_the_sharp_one() {
    let output = opsplit()
        .args(["constants", "compare", "--alphas", "0.75,0.125"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0);
    let v = stdout_json(&output);
    let phi = v["phi"].as_f64().unwrap();
    let phi_tilde = v["phi_tilde"].as_f64().unwrap();
    let phi_hat = v["phi_hat"].as_f64().unwrap();
    assert!((phi - 22.0 / 29.0).abs() < 1e-15);
    assert!((phi_tilde - 6.0 / 7.0).abs() < 1e-15);
    assert!((phi_hat - 25.0 / 32.0).abs() < 1e-15);
    assert!(phi < phi_hat && phi_hat < phi_tilde);
    let gap = v["additive_gap"].as_f64().unwrap();
    assert!((gap - (phi_hat - phi)).abs() < 1e-15);
}

#[test]
fn constants_fb_prints_the_step_constant_and_cap() {
    let output = opsplit()
        .args(["constants", "fb", "--beta", "1", "--gamma", "1", "--eps", "0.1"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0);
    let v = stdout_json(&output);
    assert!((v["phi"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert!((v["lambda_sup"].as_f64().unwrap() - 1.44).abs() < 1e-12);
}

#[test]
fn constants_reject_an_alpha_outside_the_open_interval() {
    let output = opsplit()
        .args(["constants", "compose", "--alphas", "1.5"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 2);
    let v = stdout_json(&output);
    assert_eq!(v["kind"], "validation");
    assert_eq!(v["bound"], "alpha_range");
    assert!(v["error"].as_str().unwrap().contains("1.5"));
}

#[test]
fn constants_fb_rejects_an_oversized_step() {
    let output = opsplit()
        .args(["constants", "fb", "--beta", "1", "--gamma", "1.9", "--eps", "0.1"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 2);
    let v = stdout_json(&output);
    assert_eq!(v["bound"], "gamma_upper");
}

#[test]
fn run_redirects_traces_into_the_environment_directory() {
    let dir = tempfile::tempdir().unwrap();
    let trace_dir = dir.path().join("traces");
    let spec_path = dir.path().join("scalar.json");
    std::fs::write(
        &spec_path,
        r#"{
            "name": "scalar-smoke",
            "kind": {"type": "scalar_fixture", "shift": 3.0},
            "schedule": {"mode": "classical", "lambda": {"rule": "constant", "value": 1.0}},
            "stop": {"max_iterations": 50, "residual_tolerance": 1e-10},
            "output": {"csv": "deep/nested/scalar.csv", "json": "scalar.json"}
        }"#,
    )
    .unwrap();
    let output = opsplit()
        .arg("run")
        .arg(&spec_path)
        .env("OPSPLIT_TRACE_DIR", &trace_dir)
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0, "{}", String::from_utf8_lossy(&output.stdout));
    let report = stdout_json(&output);
    assert_eq!(report["name"], "scalar-smoke");
    assert_eq!(report["reached_residual_target"], Value::Bool(true));
    assert_eq!(report["fejer_violations"], 0);
    // Only base names survive the redirect: deep/nested/ is dropped.
    let csv_path = trace_dir.join("scalar.csv");
    let json_path = trace_dir.join("scalar.json");
    assert_eq!(report["trace_csv"].as_str().unwrap(), csv_path.to_str().unwrap());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("index,residual,lambda,alpha,error_norm,dist_to_ref,running_sum"));
    let trace: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(trace["algorithm"], "proximal_gradient");
    assert_eq!(trace["stop_reason"], "residual_tolerance");
}

#[test]
fn run_without_the_env_var_honors_the_spec_path() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out/scalar.csv");
    let spec_path = dir.path().join("scalar.json");
    std::fs::write(
        &spec_path,
        format!(
            r#"{{
                "kind": {{"type": "scalar_fixture"}},
                "schedule": {{"mode": "classical", "lambda": {{"rule": "constant", "value": 1.0}}}},
                "stop": {{"max_iterations": 50, "residual_tolerance": 1e-10}},
                "output": {{"csv": {csv:?}}}
            }}"#
        ),
    )
    .unwrap();
    let output = opsplit()
        .arg("run")
        .arg(&spec_path)
        .env_remove("OPSPLIT_TRACE_DIR")
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0);
    assert!(csv.exists(), "parent directories are created on demand");
}

#[test]
fn unmet_tolerance_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("slow.json");
    std::fs::write(
        &spec_path,
        r#"{
            "kind": {"type": "scalar_fixture", "shift": 3.0},
            "schedule": {"mode": "classical", "lambda": {"rule": "constant", "value": 0.5}},
            "stop": {"max_iterations": 3, "residual_tolerance": 1e-12}
        }"#,
    )
    .unwrap();
    let output = opsplit().arg("run").arg(&spec_path).output().unwrap();
    assert_eq!(exit_code(&output), 3);
    let report = stdout_json(&output);
    assert_eq!(report["reached_residual_target"], Value::Bool(false));
    assert_eq!(report["stop_reason"], "max_iterations");
}

#[test]
fn relaxation_above_the_classical_cap_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("hot.json");
    std::fs::write(
        &spec_path,
        r#"{
            "kind": {"type": "scalar_fixture"},
            "schedule": {"mode": "classical", "lambda": {"rule": "constant", "value": 1.2}},
            "stop": {"max_iterations": 10}
        }"#,
    )
    .unwrap();
    let output = opsplit().arg("run").arg(&spec_path).output().unwrap();
    assert_eq!(exit_code(&output), 2);
    let v = stdout_json(&output);
    assert_eq!(v["kind"], "validation");
    assert_eq!(v["bound"], "lambda_range");
}

#[test]
fn a_missing_spec_file_reports_cleanly() {
    let output = opsplit().args(["run", "/nonexistent/spec.json"]).output().unwrap();
    assert_eq!(exit_code(&output), 2);
    let v = stdout_json(&output);
    assert_eq!(v["kind"], "validation");
}

#[test]
fn compare_reports_both_relaxation_arms() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("feas.json");
    std::fs::write(
        &spec_path,
        r#"{
            "name": "feas",
            "kind": {"type": "feasibility", "dimension": 2, "seed": 0},
            "schedule": {"mode": "classical", "lambda": {"rule": "constant", "value": 1.0}},
            "stop": {"max_iterations": 6000, "residual_tolerance": 1e-6}
        }"#,
    )
    .unwrap();
    let output = opsplit().arg("compare").arg(&spec_path).output().unwrap();
    assert_eq!(exit_code(&output), 0);
    let v = stdout_json(&output);
    assert_eq!(v["metric"], "set_distance");
    assert_eq!(v["baseline"]["label"], "legacy_cap");
    assert_eq!(v["extended"]["label"], "sharp_cap");
    assert_eq!(v["baseline"]["reached"], Value::Bool(true));
    assert_eq!(v["extended"]["reached"], Value::Bool(true));
    // 0.95/(2/3) vs 0.95/(7/12): the sharp constant admits the larger cap.
    let legacy = v["baseline"]["lambda"].as_f64().unwrap();
    let sharp = v["extended"]["lambda"].as_f64().unwrap();
    assert!((legacy - 1.425).abs() < 1e-12);
    assert!((sharp - 0.95 * 12.0 / 7.0).abs() < 1e-12);
}

#[test]
fn batch_runs_all_specs_and_exits_with_the_worst_code() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("01_ok.json"),
        r#"{
            "kind": {"type": "scalar_fixture"},
            "schedule": {"mode": "classical", "lambda": {"rule": "constant", "value": 1.0}},
            "stop": {"max_iterations": 50, "residual_tolerance": 1e-10}
        }"#,
    )
    .unwrap();
    std::fs::write(dir.path().join("02_broken.json"), r#"{"kind": "nope"}"#).unwrap();
    std::fs::write(dir.path().join("readme.txt"), "not a spec").unwrap();
    let output = opsplit()
        .arg("batch")
        .arg(dir.path())
        .args(["--jobs", "2"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 2);
    let v = stdout_json(&output);
    assert_eq!(v["total"], 2);
    assert_eq!(v["failed"], 1);
    let entries = v["entries"].as_array().unwrap();
    assert!(entries[0]["path"].as_str().unwrap().ends_with("01_ok.json"));
    assert_eq!(entries[0]["exit_code"], 0);
    assert!(entries[0]["report"]["final_residual"].as_f64().unwrap() <= 1e-10);
    assert!(entries[1]["path"].as_str().unwrap().ends_with("02_broken.json"));
    assert_eq!(entries[1]["exit_code"], 2);
    assert_eq!(entries[1]["error"]["kind"], "validation");
}

#[test]
fn identical_runs_produce_identical_trace_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("lasso.json");
    std::fs::write(
        &spec_path,
        r#"{
            "kind": {"type": "lasso", "rows": 10, "cols": 25, "seed": 5, "tau": 0.1},
            "schedule": {"mode": "extended", "eps": 0.1,
                         "lambda": {"rule": "constant", "value": 1.44},
                         "errors": {"forward": {"scale": 0.001, "seed": 2}}},
            "stop": {"max_iterations": 200},
            "output": {"csv": "lasso.csv"}
        }"#,
    )
    .unwrap();
    let run = |tag: &str| {
        let trace_dir = dir.path().join(tag);
        let output = opsplit()
            .arg("run")
            .arg(&spec_path)
            .env("OPSPLIT_TRACE_DIR", &trace_dir)
            .output()
            .unwrap();
        assert_eq!(exit_code(&output), 0);
        std::fs::read(trace_dir.join("lasso.csv")).unwrap()
    };
    assert_eq!(run("first"), run("second"), "trace bytes must be identical");
}

#[test]
fn help_lists_every_subcommand() {
    let output = opsplit().arg("--help").output().unwrap();
    assert_eq!(exit_code(&output), 0);
    let text = String::from_utf8_lossy(&output.stdout);
    for needle in ["constants", "run", "compare", "batch"] {
        assert!(text.contains(needle), "missing {needle} in help output");
    }
}
