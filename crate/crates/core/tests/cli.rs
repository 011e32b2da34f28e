use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dubins-escape"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn solve_reports_turn_straight() {
    let out = run(&[
        "solve",
        "--r",
        "0.5",
        "--theta",
        "1.5707963267948966",
        "--R",
        "0.2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["strategy"], "turn-straight");
    assert_eq!(v["strategy_code"], 1);
    assert!((v["t_escape"].as_f64().unwrap() - 0.585_388_53).abs() < 1e-7);
    assert!((v["tangent"]["x"].as_f64().unwrap() - 9.0 / 14.0).abs() < 1e-12);
}

#[test]
fn solve_accepts_degrees_and_negative_headings() {
    let out = run(&["solve", "--r", "0.5", "--theta", "-90", "--deg", "--R", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["strategy"], "turn-only");
    assert_eq!(v["mirrored"], true);
    assert!((v["t_escape"].as_f64().unwrap() - 0.75f64.acos()).abs() < 1e-12);
}

#[test]
fn domain_errors_exit_one_with_json() {
    let out = run(&["solve", "--r", "0", "--theta", "1", "--R", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "CenterStart");

    let out = run(&["solve", "--r", "2", "--theta", "1", "--R", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "StartOutside");

    let out = run(&["solve", "--r", "1", "--theta", "3", "--R", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "OnBoundaryInward");

    let out = run(&["characteristics", "--theta-f", "1.6", "--R", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "SeedOutOfRange");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["solve", "--r", "0.5"]).status.code(), Some(2));
    assert_eq!(
        run(&["solve", "--r", "nan", "--theta", "0", "--R", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["map", "--nr", "1", "--ntheta", "4", "--R", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn trajectory_csv_ends_on_the_boundary() {
    let out = run(&[
        "trajectory",
        "--r",
        "0.5",
        "--theta",
        "1.5707963267948966",
        "--R",
        "0.2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,r,theta,x,y,u"));
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert!((last[0] - 0.585_388_53).abs() < 1e-6);
    assert_eq!(last[1], 1.0);
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["map", "--nr", "16", "--ntheta", "17", "--R", "0.3"][..],
        &["map", "--nr", "16", "--ntheta", "17", "--R", "0.3", "--pgm"][..],
        &[
            "map",
            "--nr",
            "32",
            "--ntheta",
            "33",
            "--R",
            "0.3",
            "--contours",
            "0.3,0.6",
        ][..],
        &["characteristics", "--theta-f", "0.4", "--R", "0.5"][..],
        &["verify", "--count", "20", "--seed", "3", "--n-grid", "400"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn map_headers_and_shapes() {
    let out = run(&["map", "--nr", "8", "--ntheta", "9", "--R", "0.2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("theta,r,strategy,t_escape\n"));
    assert_eq!(text.lines().count(), 1 + 8 * 9);

    let out = run(&["map", "--nr", "8", "--ntheta", "9", "--R", "0.2", "--pgm"]);
    let header = b"P5\n8 9\n255\n";
    assert_eq!(&out.stdout[..header.len()], header);
    assert_eq!(out.stdout.len(), header.len() + 72);

    let out = run(&[
        "map",
        "--nr",
        "8",
        "--ntheta",
        "9",
        "--R",
        "0.2",
        "--boundary",
    ]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("curve_id,theta,r\n"));
}

#[test]
fn characteristics_csv_header() {
    let out = run(&["characteristics", "--theta-f", "0.5", "--R", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("tau,r,theta,lambda_r,lambda_theta,u,h_residual\n"));
}

#[test]
fn verify_writes_summary_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&[
        "verify",
        "--count",
        "50",
        "--seed",
        "42",
        "--n-grid",
        "1000",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&out);
    assert_eq!(summary["passed"], 50);
    assert_eq!(summary["failed"], 0);
    let full: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(full.as_array().unwrap().len(), 50);
    assert!(full[0]["R"].is_f64());
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solve.json");
    let out = run(&[
        "solve",
        "--r",
        "0.3",
        "--theta",
        "0",
        "--R",
        "0.2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["t_escape"], 0.7);
    assert_eq!(v["strategy"], "straight");
}
