use std::path::Path;
use std::process::{Command, Output};

fn follow(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_follow"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn follow")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn priors_prints_layers_and_total() {
    let dir = tempfile::tempdir().unwrap();
    let o = follow(&["priors"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("layer 1: 38x38 x 4 = 5776"), "{text}");
    assert!(text.ends_with("total: 8732\n"));

    let o = follow(&["priors", "--layers", "10x2, 3x3"], dir.path());
    assert!(stdout(&o).ends_with("total: 227\n"));
    let o = follow(&["priors", "--layers", "10by2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_exact_writes_csv_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = follow(&["bench", "--exact", "--out", "report.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    for name in ["SSD", "SSD_NCS", "SSD_LITE"] {
        assert!(table.contains(name), "{table}");
    }
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("backend,count,mean,sd,median,p95,min,max"));
    assert!(csv.contains("numerator,denominator,speedup_ratio"));
    let ssd = csv.lines().find(|l| l.starts_with("SSD,")).unwrap();
    let mean: f64 = ssd.split(',').nth(2).unwrap().parse().unwrap();
    assert!((mean - 0.43209).abs() < 1e-5);
}

#[test]
fn bench_rejects_unknown_backend_and_single_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = follow(&["bench", "--backend", "YOLO"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("YOLO"));
    let o = follow(&["bench", "--backend", "SSD"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_resampling_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, out: &str| {
        let o = follow(&["bench", "--draws", "2000", "--seed", seed, "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(dir.path().join(out)).unwrap()
    };
    assert_eq!(run("5", "a.csv"), run("5", "b.csv"));
    assert_ne!(run("5", "a.csv"), run("6", "c.csv"));
}

#[test]
fn run_writes_trace_and_prints_metrics() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.toml"), "[sim]\nduration_s = 2.0\n").unwrap();
    let o = follow(&["run", "--config", "s.toml", "--out", "t.jsonl", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let metrics: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(metrics["ticks"], 30);
    let trace = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 30);
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    for key in ["tick", "t", "pose", "target", "delta", "case_id", "steering_duty", "throttle_duty"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn concurrent_mode_trace_matches_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.toml"), "[detector]\nbackend = \"SSD\"\n[sim]\nduration_s = 5.0\n").unwrap();
    for (mode, out) in [("deterministic", "d.jsonl"), ("concurrent", "c.jsonl")] {
        let o = follow(&["run", "--config", "s.toml", "--mode", mode, "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(
        std::fs::read(dir.path().join("d.jsonl")).unwrap(),
        std::fs::read(dir.path().join("c.jsonl")).unwrap()
    );
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[servo.throttle]\nmin = 0.09\nmid = 0.075\nmax = 0.1\n").unwrap();
    let o = follow(&["run", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("servo.throttle"), "{}", stderr(&o));

    std::fs::write(dir.path().join("syntax.toml"), "[nav]\nx_thr = \n").unwrap();
    let o = follow(&["run", "--config", "syntax.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    std::fs::write(dir.path().join("typo.toml"), "[vehicle]\nwheelbase = 0.2\n").unwrap();
    let o = follow(&["run", "--config", "typo.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("wheelbase"));
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = follow(&["run", "--config", "missing.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = follow(&["bench", "--exact", "--out", "no/such/dir/r.csv"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = follow(&["run", "--frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = follow(&["bench", "--exact", "--draws", "10"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn calibrate_then_run_converges() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("s.toml"),
        "[detector]\nbackend = \"PERFECT\"\n[sim]\nduration_s = 20.0\n",
    )
    .unwrap();
    let o = follow(&["calibrate", "--config", "s.toml", "--out", "cal.toml"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let fragment = std::fs::read_to_string(dir.path().join("cal.toml")).unwrap();
    let table: toml::Table = toml::from_str(&fragment).unwrap();
    assert!(table["nav"]["x_thr"].as_float().unwrap() > 0.0);
    assert!(table["target"]["point_cy"].as_float().is_some());

    let o = follow(
        &["run", "--config", "s.toml", "--config", "cal.toml", "--out", "t.jsonl"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(m["time_to_converge_s"].as_f64().unwrap() < 30.0);
    assert!((m["final_standoff_m"].as_f64().unwrap() - 2.0).abs() < 0.2);
}

#[test]
fn calibrate_reports_out_of_view_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = follow(&["calibrate", "--grid", "lateral=40,50", "--out", "c.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("outside the field of view"), "{}", stderr(&o));
    let o = follow(&["calibrate", "--grid", "lateral=-0.5,0,0.5,40", "--out", "c.toml"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("out of view"));
}
