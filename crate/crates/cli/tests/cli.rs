use std::path::Path;
use std::process::{Command, Output};

use bcslab::potential::RadialPotential;
use bcslab::tcrit::{critical_temperature, TcOptions};

fn bcslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn dc_for_constant_w() {
    let dir = tempfile::tempdir().unwrap();
    let fields = dir.path().join("fields.txt");
    std::fs::write(&fields, "# constant W = 0.5\nW 0 0 0 0.5 0\n").unwrap();
    let out = bcslab(&["dc", "--fields", fields.to_str().unwrap(), "--lambda1", "2", "--lambda2", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let d_c: f64 = rows(&out)[0][0].parse().unwrap();
    assert!((d_c - 1.0).abs() < 1e-9, "{d_c}");
}

#[test]
fn tc_matches_library_and_is_bit_reproducible() {
    let args = ["tc", "--potential", "gaussian:v=5,s=1", "--mu", "1", "--lambda", "1"];
    let a = bcslab(&args);
    let b = bcslab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let row = &rows(&a)[0];
    let v: RadialPotential = "gaussian:v=5,s=1".parse().unwrap();
    let lib = critical_temperature(&v, 1.0, &TcOptions::default()).unwrap();
    assert_eq!(row[1].parse::<f64>().unwrap(), lib.tc);
    assert_eq!(row[2], lib.channel.ell().to_string());
}

#[test]
fn ladder_rows_keep_input_order() {
    let out = bcslab(&["zerorange", "--a", "-1", "--t", "0,0.05,0.1"]);
    assert!(out.status.success());
    let r = rows(&out);
    let ts: Vec<f64> = r.iter().map(|row| row[4].parse().unwrap()).collect();
    assert_eq!(ts, vec![0.0, 0.05, 0.1]);
    let gaps: Vec<f64> = r.iter().map(|row| row[5].parse().unwrap()).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
}

#[test]
fn exit_codes() {
    assert_eq!(bcslab(&["zerorange", "--a", "0.5"]).status.code(), Some(2));
    assert_eq!(bcslab(&["scatlen", "--potential", "gaussian:v=3,s=1"]).status.code(), Some(2));
    assert_eq!(bcslab(&["tc", "--lambda", "0.1,0.3,0.2"]).status.code(), Some(4));
    assert_eq!(bcslab(&["tc", "--mu", "inf"]).status.code(), Some(4));
    assert_eq!(bcslab(&["tc", "--potential", "cubic:v=1"]).status.code(), Some(4));
    assert_eq!(bcslab(&["frobnicate"]).status.code(), Some(4));
    assert_eq!(bcslab(&["verify", "--suite", "no-such-suite"]).status.code(), Some(4));
}

#[test]
fn config_file_with_flag_override_and_unknown_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# zero-range run\na = -0.5\nmu = 2\n").unwrap();
    let out = bcslab(&["zerorange", "--config", cfg.to_str().unwrap(), "--mu", "1"]);
    assert!(out.status.success());
    let r = &rows(&out)[0];
    assert_eq!(r[0].parse::<f64>().unwrap(), -0.5);
    assert_eq!(r[1].parse::<f64>().unwrap(), 1.0);

    std::fs::write(&cfg, "a = -0.5\ntemperature = 1\n").unwrap();
    assert_eq!(bcslab(&["zerorange", "--config", cfg.to_str().unwrap()]).status.code(), Some(4));
}

fn read_manifest(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn csv_and_manifest_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    let out = bcslab(&["scatlen", "--potential", "square_well:v=1,R=1", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("method,a,bs_spectrum_floor,bound_state_free\n"));
    let a: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((a - (1.0 - 1f64.tan())).abs() < 1e-9);

    let manifest = dir.path().join("a.manifest.jsonl");
    bcslab(&["scatlen", "--potential", "gaussian:v=3,s=1", "--out", csv.to_str().unwrap()]);
    let entries = read_manifest(&manifest);
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["status"], "ok");
    assert_eq!(entries[0]["inputs"]["potential"], "square_well:v=1,R=1");
    assert_eq!(entries[1]["exit_code"], 2);
}

#[test]
fn verify_suite_reports_pass() {
    let out = bcslab(&["verify", "--suite", "m-mu"]);
    assert!(out.status.success());
    let r = rows(&out);
    assert!(!r.is_empty() && r.iter().all(|row| row.last().unwrap() == "true"));
}
