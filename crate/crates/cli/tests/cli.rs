use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn chowkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chowkit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SURFACE: &str = "variety = blowup(quotient(product(projective_space(1), projective_space(1)), swap), 2, -1)\n\
                       tasks = [verify-ck, poincare, murre-B, murre-Bprime, murre-C, murre-D, roundtrip]\n\
                       seed = 42\n";

#[test]
fn config_file_run_passes() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(SURFACE.as_bytes()).unwrap();
    let out = chowkit(&["run", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS [murre-B] Murre B"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn machine_output_is_stable() {
    let a = chowkit(&["run", "--format", "machine", SURFACE]);
    let b = chowkit(&["run", "--format", "machine", SURFACE]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let raw = stdout(&a);
    let at = |k: &str| raw.find(&format!("\"{k}\":")).unwrap();
    assert!(at("config") < at("datum") && at("datum") < at("checks") && at("checks") < at("timing"));
    let check = &raw[at("checks")..];
    let at = |k: &str| check.find(&format!("\"{k}\":")).unwrap();
    assert!(at("task") < at("name") && at("name") < at("status") && at("status") < at("witness"));
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["timing"].is_null());
    assert_eq!(v["config"]["seed"], 42);
    assert_eq!(v["datum"]["ranks"], serde_json::json!([1, 3, 1]));
}

#[test]
fn format_key_in_config() {
    let out = chowkit(&["run", "variety = projective_space(1); tasks = [verify-ck]; format = machine"]);
    assert!(serde_json::from_slice::<Value>(&out.stdout).is_ok());
}

#[test]
fn timing_only_when_requested() {
    let out = chowkit(&["run", "--timing", "--format", "machine", "variety = projective_space(2); tasks = [poincare]"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["timing"]["total_ms"].is_u64());
}

#[test]
fn config_errors_exit_2() {
    let out = chowkit(&["run", "variety = blowup(projective_space(2), 1, 0); tasks = [lift]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("variety.multiplier"));
    let out = chowkit(&["run", "variety = projective_space(2)\ntasks = [lift, murre-Z]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tasks[1]"));
    let out = chowkit(&["run", "variety = projective_space(2)\ntasks = [lift"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = chowkit(&["run", "/nonexistent/config"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn construction_failure_exits_1() {
    let out = chowkit(&["run", "variety = blowup(projective_space(0), 1, -1); tasks = [verify-ck]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL [build]"));
}

#[test]
fn fuzz_subcommand_overrides_seed_and_cases() {
    let out = chowkit(&[
        "fuzz",
        "--cases",
        "50",
        "--seed",
        "9",
        "--format",
        "machine",
        "variety = product(projective_space(1), projective_space(2)); tasks = [verify-ck]",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["tasks"], serde_json::json!(["oracle-fuzz"]));
    assert_eq!(v["checks"][0]["name"], "composition agrees with oracle (50 cases, seed 9)");
}

#[test]
fn describe_lists_projectors() {
    let out = chowkit(&["describe", "variety = blowup(projective_space(2), 1, -1); tasks = [lift]"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("CH^1: l, e1_1"), "{text}");
    assert!(text.contains("π_2 = (l × l) - (e1_1 × e1_1)"), "{text}");
}
