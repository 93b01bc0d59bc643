//! End-to-end runs of the `szoqq` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn szoqq(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_szoqq"));
    cmd.args(args).env_remove("SZOQQ_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const TOY: &str = r#"{"problem": "toy", "eta": 0.01, "mu": 0.001, "lambda_cap": 1.5,
    "lipschitz": 5, "smoothness": 3, "output": {"trace": "toy.csv"}}"#;

fn run_config(config: &Path) -> Output {
    szoqq(&["run", "--config", config.to_str().unwrap(), "--quiet"], &[])
}

fn verify(trace: &Path, problem: &str) -> Output {
    szoqq(&["verify", "--trace", trace.to_str().unwrap(), "--problem", problem], &[])
}

/// Trace text with the wall-clock column blanked.
fn without_wall_time(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "wall_time_ms").unwrap();
    lines
        .map(|l| l.split(',').enumerate().filter(|(i, _)| *i != col).map(|(_, v)| v.to_string()).collect())
        .collect()
}

#[test]
fn toy_run_then_verify_is_clean() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "toy.json", TOY);
    let out = szoqq(&["run", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("reason: BothConditionsMet"));
    let trace = dir.path().join("toy.csv");
    assert!(trace.with_extension("samples.jsonl").exists());
    assert!(trace.with_extension("report.json").exists());

    let v = verify(&trace, "toy");
    assert_eq!(v.status.code(), Some(0));
    let text = stdout(&v);
    assert!(text.contains("infeasible_samples: 0"), "{text}");
    assert!(text.contains("samples: 412"), "{text}");
    assert!(text.contains("constant_growth_events: 0"));
    assert!(text.contains("final_kkt_residual:"));
}

#[test]
fn adaptation_run_reports_two_infeasible_samples() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "adapt.json",
        r#"{"problem": "toy", "eta": 0.01, "mu": 0.001, "lambda_cap": 1.5, "lipschitz": 0.2,
            "smoothness": 0.2, "adaptation": {"enabled": true, "growth_factor": 2},
            "output": {"trace": "adapt.csv"}}"#,
    );
    assert_eq!(run_config(&config).status.code(), Some(0));
    let v = verify(&dir.path().join("adapt.csv"), "toy");
    assert_eq!(v.status.code(), Some(2));
    let text = stdout(&v);
    assert!(text.contains("infeasible_samples: 2"), "{text}");
    assert!(text.contains("constant_growth_events: 2"), "{text}");
}

#[test]
fn malformed_config_fails_without_outputs() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "bad.json", r#"{"problem": "toy", "eta": "#);
    let out = run_config(&config);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"error\""));
    assert!(!dir.path().join("trace.csv").exists());
    assert!(!dir.path().join("trace.samples.jsonl").exists());

    let unknown = write_config(dir.path(), "unknown.json", r#"{"problem": "toy", "etaa": 0.1}"#);
    assert_eq!(run_config(&unknown).status.code(), Some(1));
}

#[test]
fn zero_iteration_cap_writes_only_the_header() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "cap.json",
        r#"{"problem": "toy", "max_iterations": 0, "output": {"trace": "cap.csv"}}"#,
    );
    assert_eq!(run_config(&config).status.code(), Some(2));
    let text = std::fs::read_to_string(dir.path().join("cap.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("k,f0,"));
}

#[test]
fn tampered_trace_is_rejected() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "toy.json", TOY);
    assert_eq!(run_config(&config).status.code(), Some(0));
    let trace = dir.path().join("toy.csv");
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[3].split(',').map(String::from).collect();
    cells[1] = "-123.5".into();
    lines[3] = cells.join(",");
    std::fs::write(&trace, lines.join("\n") + "\n").unwrap();
    let v = verify(&trace, "toy");
    assert_eq!(v.status.code(), Some(1));

    // a clean trace against the wrong problem also fails
    assert_eq!(run_config(&config).status.code(), Some(0));
    assert_eq!(verify(&trace, "control").status.code(), Some(1));
}

#[test]
fn list_names_every_problem() {
    let out = szoqq(&["list"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in ["toy (d=2, m=3)", "control (d=12, m=48)", "control-relaxed (d=12, m=48)", "random:SEED:D:M"] {
        assert!(text.contains(line), "{text}");
    }
}

#[test]
fn seed_from_environment_selects_the_random_instance() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "random.json",
        r#"{"problem": {"name": "random", "d": 3, "m": 2, "seed": 1}, "output": {"trace": "r.csv"}}"#,
    );
    let path = config.to_str().unwrap();
    let out = szoqq(&["run", "--config", path, "--quiet"], &[("SZOQQ_SEED", "7")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("r.report.json")).unwrap();
    assert!(report.contains("random:7:3:2"), "{report}");
    assert_eq!(verify(&dir.path().join("r.csv"), "random:7:3:2").status.code(), Some(0));

    let bad = szoqq(&["run", "--config", path, "--quiet"], &[("SZOQQ_SEED", "seven")]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn reruns_match_except_for_wall_time() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "toy.json", TOY);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for t in [&a, &b] {
        let out = szoqq(&["run", "--config", config.to_str().unwrap(), "--trace", t.to_str().unwrap(), "--quiet"], &[]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
    assert_eq!(
        std::fs::read(a.with_extension("samples.jsonl")).unwrap(),
        std::fs::read(b.with_extension("samples.jsonl")).unwrap()
    );
}

#[test]
fn literal_control_start_is_rejected() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "control.json",
        r#"{"problem": "control", "eta": 0.1, "mu": 0.0001, "lambda_cap": 1, "xi": 2e-5,
            "lipschitz": 20, "smoothness": 20, "output": {"trace": "c.csv"}}"#,
    );
    let out = run_config(&config);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("initial_point"));
}
