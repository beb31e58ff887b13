use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_restricted-orbits"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn bounds_equal_masses() {
    let out = run(&["bounds", "--m1", "1", "--m2", "1", "--m3", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["d1"].as_f64().unwrap() - 11.523843).abs() < 1e-6);
    assert!((v["C"].as_f64().unwrap() - 3.2540677186).abs() < 1e-9);
    assert_eq!(v["argmin"], 0);
}

#[test]
fn bounds_rejects_bad_mass() {
    let out = run(&["bounds", "--m1", "1", "--m2", "0", "--m3", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table_four_passes_and_is_deterministic() {
    let a = bin().args(["tables", "--table", "4"]).env("RESTRICTED_ORBITS_THREADS", "1").output().unwrap();
    let b = bin().args(["tables", "--table", "4"]).env("RESTRICTED_ORBITS_THREADS", "4").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("table,a,b,theta,m1"));
    assert_eq!(lines.count(), 22);
}

#[test]
fn table_two_reports_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t2.csv");
    let out = run(&["tables", "--table", "2", "--out", csv.to_str().unwrap(), "--readings"]);
    assert_eq!(out.status.code(), Some(1));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 25);
    assert!(text.lines().nth(1).unwrap().contains("pi/30"));
    assert!(text.lines().nth(1).unwrap().ends_with(",corrected"));
}

#[test]
fn invalid_thread_count() {
    let out = bin().args(["bounds", "--m1", "1", "--m2", "1", "--m3", "1"]).env("RESTRICTED_ORBITS_THREADS", "0").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn minimize_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"masses": [1, 1, 1], "T": 1,
            "loop": {"kind": "circular", "a": 0.33, "theta": "pi/2"},
            "output": {"report": "report.json", "loop_json": "orbit.json", "loop_csv": "orbit.csv", "log_csv": "log.csv"}}"#,
    );
    let out = run(&["minimize", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["certification"]["degree"], 1);
    assert!(report["certification"]["action"].as_f64().unwrap() < 10.4466);
    let log = std::fs::read_to_string(dir.path().join("log.csv")).unwrap();
    assert!(log.lines().count() >= 2);
    let samples = std::fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    assert_eq!(samples.lines().count(), 1025);

    let orbit = dir.path().join("orbit.json");
    let out = run(&["verify", "--loop", orbit.to_str().unwrap(), "--m1", "1", "--m2", "1", "--m3", "1", "--degree", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "pass");
    let out = run(&["verify", "--loop", orbit.to_str().unwrap(), "--m1", "1", "--m2", "1", "--m3", "1", "--degree", "-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_semi_axis_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"masses": [1, 1, 1], "loop": {"kind": "elliptic", "a": 0.2, "theta": 0.1}}"#);
    let out = run(&["minimize", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`b`"));
}

#[test]
fn zero_loop_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let lp = write(dir.path(), "zero.json", r#"{"T": 1, "K": 2, "cos": [[0, 0], [0, 0]], "sin": [[0, 0], [0, 0]]}"#);
    let out = run(&["verify", "--loop", &lp, "--m1", "1", "--m2", "1", "--m3", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "fail");
    let reasons = v["certification"]["failures"].as_array().unwrap();
    assert!(reasons.iter().any(|r| r.as_str().unwrap().contains("not below d1")));
}

#[test]
fn loop_through_a_primary_fails() {
    let dir = tempfile::tempdir().unwrap();
    // A counter-rotating circle of the primaries' orbital radius meets each of them.
    let l = (3.0 / (4.0 * std::f64::consts::PI.powi(2))).cbrt();
    let r = l / 3f64.sqrt();
    let lp = write(
        dir.path(),
        "hit.json",
        &format!(r#"{{"T": 1, "K": 1, "cos": [[{r:?}, 0]], "sin": [[0, {:?}]]}}"#, -r),
    );
    let out = run(&["verify", "--loop", &lp, "--m1", "1", "--m2", "1", "--m3", "1"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["verdict"], "fail");
}

#[test]
fn even_harmonic_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let lp = write(dir.path(), "even.json", r#"{"T": 1, "K": 1, "cos": [[0.1, 0]], "sin": [[0, 0.1]], "harmonics": [2]}"#);
    let out = run(&["verify", "--loop", &lp, "--m1", "1", "--m2", "1", "--m3", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
