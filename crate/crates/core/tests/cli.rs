use std::process::{Command, Output};

use serde_json::Value;

fn cqnls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqnls")).args(args).output().expect("spawn cqnls")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn exact_golden_rule_is_certified() {
    let out = cqnls(&["golden-rule", "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["schema"], "cqnls.golden-rule/1");
    assert_eq!(v["certified"], true);
    assert_eq!(v["gamma0_vector"], serde_json::json!(["32/3", "0", "0", "0"]));
}

#[test]
fn profile_reports_json_and_csv() {
    let out = cqnls(&["profile", "--omega", "0.03"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["schema"], "cqnls.profile/1");
    let a = (1.0f64 + 16.0 * 0.03 / 3.0).sqrt();
    assert!((v["a_omega"].as_f64().unwrap() - a).abs() < 1e-15);
    assert!((v["q_at_zero"].as_f64().unwrap() - (4.0 / (1.0 + a)).sqrt()).abs() < 1e-14);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.csv");
    let out = cqnls(&["profile", "--format", "csv", "--grid-N", "64", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["y", "q", "q_prime"]);
    assert_eq!(rdr.records().count(), 64);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(cqnls(&["profile", "--bogus"]).status.code(), Some(2));
    assert_eq!(cqnls(&["spectrum", "--omega", "0.5"]).status.code(), Some(2));
    assert_eq!(cqnls(&["profile", "--grid-N", "15"]).status.code(), Some(2));
    let out = cqnls(&["simulate", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(cqnls(&[]).status.code(), Some(2));
}

#[test]
fn simulate_writes_frames_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"half_width": 100, "points": 512, "dt": 0.01, "t_end": 2, "output_every": 0.5,
            "initial": {"omega0": 0.1, "perturbation": {"kind": "gaussian", "epsilon": 0.01, "width": 2}},
            "sponge": {"enabled": false}, "analysis": {"enabled": false}}"#,
    )
    .unwrap();
    let csv_path = dir.path().join("frames.csv");
    let out = cqnls(&["simulate", "--config", cfg.to_str().unwrap(), "--format", "csv", "--out", csv_path.to_str().unwrap(), "--plot"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["schema"], "cqnls.simulate/1");
    assert_eq!(v["summary"]["frames"], 5);
    assert_eq!(csv::Reader::from_path(&csv_path).unwrap().records().count(), 5);
    let script = std::fs::read_to_string(dir.path().join("frames.plot.py")).unwrap();
    assert!(script.contains("frames.csv"));
}

#[test]
fn verify_all_reports_selected_criteria() {
    let out = cqnls(&["verify-all", "--only", "1,8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["schema"], "cqnls.acceptance/1");
    let ids: Vec<u64> = v["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![1, 8]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().filter(|l| l.starts_with("PASS")).count(), 2, "{stderr}");
}
