//! End-to-end tests of the `aoiq` binary: exit codes, report files, seed
//! reproducibility, and the case-listing mode.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_aoiq");

const GOOD_CONFIG: &str = r#"
    [defaults]
    total_slots = 30000
    warmup_slots = 1000
    seed = 5
    tolerance_rel = 0.05

    [[case]]
    name = "fcfs_det"
    discipline = "fcfs"
    lambda = 0.5
    service = { family = "deterministic", value = 1 }

    [[case]]
    name = "lcfs_geo"
    discipline = "lcfs"
    lambda = 0.5
    service = { family = "geometric", p = 0.5 }

    [[sweep]]
    name = "vac"
    discipline = "fcfs_vacation"
    vary = "vacation_mean"
    lambda = 0.3
    service = { family = "geometric", p = 0.75 }
    vacation_family = "deterministic"
    vacation_means = [1, 2]
"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn aoiq")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GOOD_CONFIG);
    let out = dir.path().join("report.csv");
    let result = run(&["run", &config, "--out", out.to_str().unwrap()]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );

    let wide = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = wide.lines().collect();
    assert_eq!(lines.len(), 5, "header + 4 cases:\n{wide}");
    assert!(lines[0].starts_with("case_name,discipline,lambda,"));
    assert!(lines[1].starts_with("fcfs_det,fcfs,0.5,"));
    assert!(lines[3].starts_with("vac/mean1,fcfs_vacation,0.3,"));
    for row in &lines[1..] {
        assert!(row.ends_with(",ok"), "row not ok: {row}");
    }

    let long = fs::read_to_string(dir.path().join("report_long.csv")).unwrap();
    assert!(long.starts_with("case_name,metric,source,value\n"));
    assert!(long.contains("vac/mean2,avg_age,bound_upper,"));

    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(
        stdout.contains("4 cases: 4 ok, 0 tolerance_exceeded, 0 failed"),
        "summary missing: {stdout}"
    );
}

#[test]
fn stdout_mode_prints_csv_and_summary_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
            [[case]]
            name = "only"
            discipline = "lcfs"
            lambda = 0.5
            service = { family = "deterministic", value = 1 }
            total_slots = 20000
            warmup_slots = 500
            tolerance_rel = 0.05
        "#,
    );
    let result = run(&["run", &config]);
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.starts_with("case_name,discipline,"));
    assert!(stdout
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("only,lcfs_preemptive,"));
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.contains("1 cases: 1 ok"));
}

#[test]
fn list_cases_prints_names_without_running() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GOOD_CONFIG);
    let result = run(&["run", &config, "--list-cases"]);
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert_eq!(
        stdout.lines().collect::<Vec<_>>(),
        ["fcfs_det", "lcfs_geo", "vac/mean1", "vac/mean2"]
    );
}

#[test]
fn failing_case_exits_one_and_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
            [[case]]
            name = "hot"
            discipline = "fcfs"
            lambda = 0.9
            service = { family = "geometric", p = 0.75 }
        "#,
    );
    let out = dir.path().join("report.csv");
    let result = run(&["run", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    let wide = fs::read_to_string(&out).unwrap();
    assert!(wide.lines().nth(1).unwrap().ends_with(",unstable"));
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("FAIL hot [fcfs]: unstable"));
}

#[test]
fn config_errors_exit_two() {
    let missing = run(&["run", "/definitely/not/here.toml"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[[case]]\nname = \"x\"\n");
    let bad = run(&["run", &config]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));
}

#[test]
fn same_seed_reproduces_reports_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GOOD_CONFIG);
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let out_c = dir.path().join("c.csv");
    assert!(run(&[
        "run",
        &config,
        "--out",
        out_a.to_str().unwrap(),
        "--seed",
        "77"
    ])
    .status
    .success());
    assert!(run(&[
        "run",
        &config,
        "--out",
        out_b.to_str().unwrap(),
        "--seed",
        "77"
    ])
    .status
    .success());
    assert!(run(&[
        "run",
        &config,
        "--out",
        out_c.to_str().unwrap(),
        "--seed",
        "78"
    ])
    .status
    .success());
    let a = fs::read(&out_a).unwrap();
    let b = fs::read(&out_b).unwrap();
    let c = fs::read(&out_c).unwrap();
    assert_eq!(a, b, "same seed must give identical bytes");
    assert_ne!(a, c, "different seed must change the simulated columns");
    assert_eq!(
        fs::read(dir.path().join("a_long.csv")).unwrap(),
        fs::read(dir.path().join("b_long.csv")).unwrap()
    );
}
