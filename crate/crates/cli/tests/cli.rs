use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn blaster(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blaster"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_accepts_the_shipped_config() {
    let out = blaster(&["validate", "--config", default_config().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("19 terrestrial stations"), "{text}");
}

#[test]
fn bad_config_exits_with_code_two_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"radio": {"total_bandwidth_hz": "wide"}}"#).unwrap();
    let out = blaster(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("radio.total_bandwidth_hz"), "{}", stderr(&out));

    std::fs::write(&path, r#"{"stations": {"p_max_w": 0.05, "p_max_dbm": 17.0}}"#).unwrap();
    let out = blaster(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("stations.p_max"), "{}", stderr(&out));

    let out = blaster(&["validate", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_metrics_and_requested_traces() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(&config, r#"{"traffic": {"peak_ue_count": 40}, "output": {"trace_hours": [3, 20]}}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = blaster(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "4",
        "--solvers",
        "blaster,tnonly",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "hour,solver,ue_count,sum_throughput_bps,sum_log_throughput,network_power_w,satellite_share,active_terrestrial,coverage_ratio,epsilon"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 48);
    assert!(rows[0].starts_with("0,blaster,"));
    assert!(rows[1].starts_with("0,tnonly,"));
    for hour in [3, 20] {
        let trace = std::fs::read_to_string(out_dir.join(format!("trace_{hour}.csv"))).unwrap();
        assert!(trace.starts_with("iteration,utility,epsilon,active_terrestrial\n"));
        assert!(trace.lines().count() > 1);
    }
    assert!(!out_dir.join("trace_4.csv").exists());
}

#[test]
fn unknown_solver_fails_with_generic_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = blaster(&["run", "--solvers", "blaster,greedy", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("greedy"));
}

#[test]
fn trace_command_writes_one_hour() {
    let dir = tempfile::tempdir().unwrap();
    let out = blaster(&[
        "trace",
        "--hour",
        "4",
        "--config",
        default_config().to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let trace = std::fs::read_to_string(dir.path().join("trace_4.csv")).unwrap();
    let utilities: Vec<f64> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(!utilities.is_empty());

    let out = blaster(&["trace", "--hour", "24", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
