use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use slelab::ExperimentReport;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .output()
        .expect("lab runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_report(path: &Path) -> ExperimentReport {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SUBORDINATOR: &str = r#"{"experiment": "subordinator", "alpha": 0.5, "sampler": "hitting-time", "replicas": 5, "seed": 3}"#;

#[test]
fn check_formulas_passes() {
    let out = lab(&["check-formulas", "--grid", "200"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("duality"));
    assert!(stdout.contains("phi-via-psi"));
    assert!(stdout.contains("FAIL (not gating)"));
}

#[test]
fn check_formulas_rejects_tiny_grid() {
    let out = lab(&["check-formulas", "--grid", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sub.json", SUBORDINATOR);
    let out_dir = dir.path().join("out");
    let out = lab(&[
        "run",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
        "--format",
        "csv,json,svg",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let report = read_report(&out_dir.join("subordinator.json"));
    assert!(report.pass);
    assert_eq!(report.replicas.len(), 5);

    // one header plus one row per replica
    let csv = fs::read_to_string(out_dir.join("subordinator.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + report.replicas.len());

    let svg = fs::read_to_string(out_dir.join("subordinator.svg")).unwrap();
    let slope = report.regression.as_ref().unwrap().slope;
    let annotated = svg
        .split("slope ")
        .nth(1)
        .and_then(|rest| rest.split('<').next())
        .unwrap();
    assert_eq!(annotated, format!("{slope:.3}"));
    assert!(svg.contains("prediction "));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sub.json", SUBORDINATOR);
    let mut reports = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "3")] {
        let out_dir = dir.path().join(name);
        let out = lab(&[
            "run",
            &config,
            "--out",
            out_dir.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert!(out.status.success());
        let mut value: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("subordinator.json")).unwrap())
                .unwrap();
        value.as_object_mut().unwrap().remove("wall_clock_seconds");
        reports.push(value);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sub.json", SUBORDINATOR);
    let out = lab(&["run", &config, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("subordinator.json")).unwrap();
    let report: ExperimentReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.to_json().unwrap(), text);
}

#[test]
fn formula_identities_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "f.json",
        r#"{"experiment": "formula-identities"}"#,
    );
    let out = lab(&[
        "run",
        &config,
        "--out",
        dir.path().to_str().unwrap(),
        "--format",
        "csv,json,svg",
    ]);
    assert!(out.status.success());
    let report = read_report(&dir.path().join("formula-identities.json"));
    assert!(report.replicas.is_empty());
    assert!(report.pass);
    assert!(dir.path().join("formula-identities.csv").exists());
    assert!(!dir.path().join("formula-identities.svg").exists());
}

#[test]
fn missed_tolerance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "tight.json",
        r#"{"experiment": "subordinator", "alpha": 0.5, "replicas": 2, "tolerance": 1e-9}"#,
    );
    let out = lab(&["run", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn invalid_config_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad.json",
        r#"{"experiment": "gmc-kpz", "gamma": 3}"#,
    );
    let out = lab(&["run", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("`gamma`"));

    let out = lab(&["run", &config, "--format", "pdf"]);
    assert!(!out.status.success());
}

#[test]
fn output_directory_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-config");
    let json = format!(
        r#"{{"experiment": "subordinator", "alpha": 0.75, "replicas": 2, "output": {:?}}}"#,
        target.to_str().unwrap()
    );
    let config = write_config(dir.path(), "c.json", &json);
    let out = lab(&["run", &config]);
    assert!(out.status.success());
    assert!(target.join("subordinator.json").exists());
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let config = slelab::ExperimentConfig::load(&path).unwrap();
        config.validate().unwrap();
        seen += 1;
    }
    assert_eq!(seen, 6);
}
