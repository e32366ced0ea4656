use std::process::{Command, Output};

use serde_json::Value;

fn ibeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ibeta")).args(args).output().expect("run ibeta")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn multinacci_root() {
    let v = json(&ibeta(&["multinacci", "--q", "1", "--m", "2"]));
    let beta: f64 = v["beta"]["decimal"].as_str().unwrap().parse().unwrap();
    assert_eq!(format!("{beta:.6}"), "1.618034");
}

#[test]
fn integer_base_mvalue_is_one_half() {
    let v = json(&ibeta(&["mvalue", "--beta", "int:2", "--alpha", "0.37", "--method", "series"]));
    assert!((v["value_f64"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn monotone_suite_passes() {
    let out = ibeta(&["verify", "--suite", "monotone", "--q", "1", "--m-max", "8"]);
    assert!(out.status.success());
    let all = [out.stdout, out.stderr].concat();
    assert!(String::from_utf8_lossy(&all).contains("monotone: PASS"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ibeta(&["orbit", "--beta", "bogus", "--alpha", "0", "--x", "1", "--n", "3"]).status.code(), Some(2));
    assert_eq!(ibeta(&["orbit", "--beta", "mult:1,2", "--alpha", "2", "--x", "1", "--n", "3"]).status.code(), Some(2));
    assert_eq!(ibeta(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn compute_errors_exit_1() {
    let out = ibeta(&["mvalue", "--beta", "mult:1,3", "--alpha", "0.3", "--method", "finite", "--max-iter", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no matching"));
}

#[test]
fn csv_carries_config_and_header() {
    let out = ibeta(&["orbit", "--beta", "mult:1,2", "--alpha", "1/2", "--x", "1", "--n", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: {"));
    assert_eq!(lines[1], "n,value,digit,exact");
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("1,0.1180339887"));
}

#[test]
fn scan_writes_plot_file() {
    let path = std::env::temp_dir().join(format!("ibeta-scan-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let v = json(&ibeta(&["scan", "--q", "1", "--m", "2", "--grid", "64", "--points", "2", "--csv", p]));
    assert!(!v["intervals"].as_array().unwrap().is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.starts_with("# config: "));
    assert!(text.lines().nth(1).unwrap().starts_with("interval,alpha,m,matching_time"));
}

#[test]
fn output_is_deterministic() {
    let args = ["mvalue", "--beta", "float:1.9", "--alpha", "0.2", "--method", "birkhoff", "--iters", "20000", "--seed", "7"];
    let (a, b) = (ibeta(&args), ibeta(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
