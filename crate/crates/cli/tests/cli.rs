use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tunnel_cli::config::{parse_config, Mode};

fn tunnel(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tunnel"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn regime_violation_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = tunnel(dir.path(), &["analytic", "--override", "barrier.k0=1.2"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("tunneling regime"), "{stderr}");
}

#[test]
fn support_violation_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"packet": {"x0": -5.0, "p0": 10.0, "L": 20.0}}"#,
    )
    .unwrap();
    let out = tunnel(dir.path(), &["analytic", "--config", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x0 + L"));
}

#[test]
fn malformed_documents_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"grid": {"min": -10, "max": 10, "n": "many"}}"#,
    )
    .unwrap();
    let out = tunnel(dir.path(), &["analytic", "--config", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.n"));
}

#[test]
fn echo_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = tunnel(dir.path(), &["figure1", "--out", "fig"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("fig_l0.csv")).unwrap();
    let echo = csv.lines().nth(1).unwrap().strip_prefix("# config ").unwrap();
    let reparsed = parse_config(echo, Mode::Figure1, &[]).unwrap();
    assert_eq!(reparsed.echo(), echo);

    fs::write(dir.path().join("echo.json"), echo).unwrap();
    let again = tunnel(dir.path(), &["figure1", "--config", "echo.json"]);
    assert!(again.status.success());
    assert_eq!(fs::read_to_string(dir.path().join("fig_l0.csv")).unwrap(), csv);
}

#[test]
fn figure1_rows_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    assert!(tunnel(dir.path(), &["figure1", "--out", "f"]).status.success());
    let csv = fs::read_to_string(dir.path().join("f_l1.csv")).unwrap();
    let mut lines = csv.lines().skip(2);
    assert_eq!(lines.next(), Some("x,t,re_psi,im_psi,abs2,region,source"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let num = |i: usize| cols[i].parse::<f64>().unwrap();
        assert!((num(2).powi(2) + num(3).powi(2) - num(4)).abs() <= 1e-15);
        assert_eq!(cols[6], "analytic_term_1");
        rows += 1;
    }
    assert_eq!(rows, 1601);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("f_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["version"], tunnel_core::VERSION);
    assert_eq!(summary["result"]["terms"].as_array().unwrap().len(), 3);
}

#[test]
fn validate_and_packet_info_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let out = tunnel(dir.path(), &["validate", "--out", "v"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    let out = tunnel(dir.path(), &["packet-info"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["result"]["dp2"].as_f64().unwrap() - 0.505).abs() < 1e-3);
}
