use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiards")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["shoot", "--shape", "3/8"]).status.code(), Some(1));
    let bad = run(&["cover", "--base", "1/0"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));
}

#[test]
fn unwritable_output_exits_three() {
    let out = run(&["cover", "--base", "3/8", "--out", "/nonexistent-dir/cover.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn cover_reports_degree_and_genus() {
    let out = run(&["cover", "--base", "3/8", "--samples", "20"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["kind"], "cover");
    assert_eq!(v["data"]["degree"], 2);
    assert_eq!(v["data"]["genus"], serde_json::json!([3, 2]));
    assert_eq!(v["data"]["copies"], serde_json::json!([16, 16]));
}

#[test]
fn out_flag_writes_the_same_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("orbit.json");
    let args = ["orbit", "--shape", "square", "--start", "3:0.3", "--dir", "1/4"];
    let stdout = run(&args).stdout;
    let mut with_out = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    assert!(run(&with_out).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
    assert_eq!(json(&run(&args))["data"]["period"], 4);
}

#[test]
fn render_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cover.svg");
    let out = run(&["render", "cover", "--base", "3/8", "--svg", path.to_str().unwrap()]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn clean_experiment_exits_zero() {
    let out = run(&["experiment", "lemma26", "--shape", "square", "--trials", "3", "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["data"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn timing_stays_off_stdout() {
    let out = run(&["shoot", "--shape", "square", "--start", "3:0.3", "--dir", "1.0", "--max-hits", "5"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("elapsed"));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("elapsed"));
}
