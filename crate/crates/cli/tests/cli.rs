use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const MINIMAL: &str = r#"name = "tri"
graph = "triangle"
kind = "edge"
weight = "power:2"
initial_weight = 1.0
horizon = 2000
replicas = 20
seed = 5
"#;

fn rrw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrw")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_artifacts_deterministically() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), MINIMAL);
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let out = dir.path().join("out");
        let o = rrw(&["simulate", "--config", &config, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains("attraction fraction"));
        let files: Vec<String> = ["tri-5.csv", "tri-5-summary.csv", "tri-5.json", "tri-5.toml"]
            .iter()
            .map(|f| fs::read_to_string(out.join(f)).unwrap())
            .collect();
        snapshots.push(files);
    }
    assert_eq!(snapshots[0], snapshots[1]);
    let json: serde_json::Value = serde_json::from_str(&snapshots[0][2]).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["config"]["weight"], "power:2");
    assert_eq!(json["result"]["replicas"].as_array().unwrap().len(), 20);
    assert!(snapshots[0][1].contains("schema_version"));
    assert_eq!(snapshots[0][0].lines().count(), 21);
}

#[test]
fn seed_flag_and_format_restrict_outputs() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), MINIMAL);
    let out = dir.path().join("o");
    let o = rrw(&["simulate", "--config", &config, "--out", out.to_str().unwrap(), "--seed", "9", "--format", "json", "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("tri-9.json").exists());
    assert!(!out.join("tri-9.csv").exists());
}

#[test]
fn invalid_weight_exits_two_and_names_the_field() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &MINIMAL.replace("power:2", "quadratic"));
    let o = rrw(&["simulate", "--config", &config]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("field `weight`"), "{err}");
    assert!(err.contains(":4:"), "{err}");
}

#[test]
fn verify_suites() {
    let o = rrw(&["verify", "qm"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = rrw(&["verify", "joint-bounds"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = rrw(&["verify", "escape", "--replicas", "100", "--horizon", "2000", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["suite"], "escape");
    let o = rrw(&["verify", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_grid_and_failures() {
    let dir = TempDir::new().unwrap();
    let text = format!("{MINIMAL}replicas = 4\n").replace("replicas = 20\n", "");
    let grid = format!("{text}\n[grid]\nexponent = [1.5, 2, 3]\nhorizon = [500, 1000]\n");
    let config = write_config(dir.path(), &grid);
    let out = dir.path().join("s");
    let o = rrw(&["sweep", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("tri-5-sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);

    let empty = write_config(dir.path(), &format!("{text}\n[grid]\n"));
    let o = rrw(&["sweep", "--config", &empty, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("tri-5-sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);

    let failing = write_config(dir.path(), &format!("{text}\n[grid]\nexponent = [2, nan]\n"));
    let o = rrw(&["sweep", "--config", &failing, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("tri-5-sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.contains("failed"));

    let huge = write_config(
        dir.path(),
        &format!("{text}\n[grid]\nhorizon = [{}]\nexponent = [{}]\n", vec!["10"; 200].join(","), vec!["2"; 60].join(",")),
    );
    let o = rrw(&["sweep", "--config", &huge]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_and_bounds() {
    let o = rrw(&["classify-weight", "power:2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let class: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(class["reciprocal_summable"], "holds");
    assert_eq!(rrw(&["classify-weight", "nonsense"]).status.code(), Some(2));

    let o = rrw(&["bounds", "--graph", "triangle", "--kind", "edge", "--weight", "power:2", "--steps", "8", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["k"], 8);
    let names: Vec<&str> = report["bounds"].as_array().unwrap().iter().map(|b| b["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"P(R_k^2 = 4)"));
    assert!(names.contains(&"stuck probability p"));
    assert_eq!(rrw(&["bounds", "--graph", "triangle"]).status.code(), Some(2));
}
