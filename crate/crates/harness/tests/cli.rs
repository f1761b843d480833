//! End-to-end binary tests: exit codes, CSV shapes, and byte-level
//! determinism of emitted files.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tensorica"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = run(&["defragment"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).to_lowercase().contains("usage"));
}

#[test]
fn bad_flag_value_is_usage_or_config_error() {
    let out = run(&["simulate", "--d", "twenty"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_schedule_exits_two() {
    // T far too small for the log-factor schedule's feasibility condition
    let out = run(&[
        "simulate",
        "--d",
        "20",
        "--T",
        "50",
        "--schedule",
        "two-phase",
        "--out",
        "/tmp/tensorica-test-infeasible",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn validate_passes() {
    let out = run(&["validate", "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn simulate_emits_deterministic_csvs() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let common = [
        "simulate",
        "--d",
        "5",
        "--T",
        "4000",
        "--replications",
        "2",
        "--seed",
        "7",
        "--quiet",
        "--out",
    ];
    for dir in [dir_a.path(), dir_b.path()] {
        let mut args: Vec<&str> = common.to_vec();
        let s = dir.to_str().unwrap();
        args.push(s);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["experiment_rep0.csv", "experiment_rep1.csv", "experiment_summary.csv"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs between identical invocations");
    }
}

#[test]
fn trace_csv_has_pinned_header_and_consistent_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--d",
        "4",
        "--T",
        "2000",
        "--replications",
        "1",
        "--seed",
        "3",
        "--quiet",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let trace = std::fs::read_to_string(dir.path().join("experiment_rep0.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("run_id,t,phase,tan_angle_min,component_index"));
    let mut final_tan = None;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5, "bad row: {line}");
        assert_eq!(fields[0], "0");
        let t: usize = fields[1].parse().unwrap();
        assert!(t <= 2000);
        assert!(matches!(fields[2], "1" | "2"));
        final_tan = Some(fields[3].parse::<f64>().unwrap().abs());
    }

    // summary's final_error must equal |tan| of the last trace record
    let summary = std::fs::read_to_string(dir.path().join("experiment_summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("run_id,d,T,final_error,window_mean_error"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0..3], ["0", "4", "2000"]);
    let final_error: f64 = row[3].parse().unwrap();
    assert_eq!(Some(final_error), final_tan);
}

#[test]
fn scaling_emits_csv_with_pinned_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "scaling",
        "--d",
        "4",
        "--T",
        "2000,4000,8000",
        "--replications",
        "2",
        "--seed",
        "5",
        "--quiet",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("fitted_slope"));
    let csv = std::fs::read_to_string(dir.path().join("experiment_scaling.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("axis,value,mean_error,stderr,n_runs"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for (row, t) in rows.iter().zip(["2000", "4000", "8000"]) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], "T");
        assert_eq!(fields[1], t);
        assert_eq!(fields[4], "2");
        assert!(fields[2].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn config_file_round_trips_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg_path,
        "name = filecfg\nd = 4\nT = 1000\nreplications = 1\nseed = 11\n",
    )
    .unwrap();
    let out = run(&[
        "simulate",
        "--config",
        cfg_path.to_str().unwrap(),
        "--seed",
        "12",
        "--quiet",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(Path::new(&dir.path().join("filecfg_rep0.csv")).exists());

    // the --seed flag must actually override the file's seed
    let out2 = run(&[
        "simulate",
        "--config",
        cfg_path.to_str().unwrap(),
        "--name",
        "filecfg2",
        "--quiet",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out2.status.code(), Some(0));
    let a = std::fs::read(dir.path().join("filecfg_rep0.csv")).unwrap();
    let b = std::fs::read(dir.path().join("filecfg2_rep0.csv")).unwrap();
    assert_ne!(a, b, "seed override had no effect");
}

#[test]
fn psi2_reports_normal_norm() {
    let out = run(&["psi2", "--distribution", "normal", "--n", "50000", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.starts_with("psi2_norm"))
        .expect("psi2_norm line");
    let val: f64 = line.split('=').nth(1).unwrap().trim().parse().unwrap();
    // sqrt(8/3) ~ 1.633; generous band at n = 5e4
    assert!((val - 1.633).abs() < 0.1, "psi2_norm = {val}");
}

#[test]
fn spacing_reports_probability() {
    let out = run(&["spacing", "--d", "50", "--epsilon", "0.1", "--trials", "500", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("empirical_prob"));
    assert!(text.contains("lower_bound = 0.7"));
}

#[test]
fn spacing_below_minimum_dimension_exits_two() {
    let out = run(&["spacing", "--d", "2", "--epsilon", "0.1", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(2));
}
