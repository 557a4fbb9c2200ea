use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclovan"))
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cyclovan"))
        .args(args)
        .arg("--quiet")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn certify_p7_reports_trivial() {
    let out = run(&["certify", "--p", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "certify");
    assert_eq!(v["result"]["verdict"], "Trivial");
    assert_eq!(v["result"]["r"], 4);
    assert_eq!(v["result"]["h"], 1);
    let w = &v["result"]["witnesses"][0];
    assert_eq!(w["kind"], "half_order");
    assert_eq!(w["q"], 2);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["ok"] == true));
}

#[test]
fn certify_p13_is_invalid_input() {
    let out = run(&["certify", "--p", "13"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["error"]["message"].is_string());
}

#[test]
fn zero_index_is_inconclusive() {
    let out = run(&["indices", "--p", "7", "--q", "2", "--r", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["indices", "--p", "7", "--q", "2", "--r", "4"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["certify"]).status.code(), Some(1));
    assert_eq!(run(&["setup", "--p", "7", "--q", "x"]).status.code(), Some(1));
}

#[test]
fn setup_and_periods_for_p7_q2() {
    let v = json(&run(&["setup", "--p", "7", "--q", "2"]));
    assert_eq!(v["result"]["setup"]["n"], 3);
    assert_eq!(v["result"]["field"]["modulus"], serde_json::json!([1, 1, 0, 1]));
    let out = run(&["periods", "--p", "7", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["v"], 1);
}

#[test]
fn verify_roundtrip_and_tamper() {
    let cert = run(&["certify", "--p", "11"]);
    let text = String::from_utf8(cert.stdout).unwrap();
    let ok = run_stdin(&["verify", "--input", "-"], &text);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));

    let mut v: Value = serde_json::from_str(&text).unwrap();
    let i = v["result"]["witnesses"][0]["i_mod_p"].as_u64().unwrap();
    v["result"]["witnesses"][0]["i_mod_p"] = Value::from((i + 1) % 11);
    let bad = run_stdin(&["verify", "--input", "-"], &v.to_string());
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn cornacchia_and_classnum() {
    let v = json(&run(&["cornacchia", "--d", "1", "--n", "13"]));
    assert_eq!(v["result"]["solution"]["x"], "3");
    assert_eq!(v["result"]["solution"]["y"], "2");
    let v = json(&run(&["classnum", "--p", "23"]));
    assert_eq!(v["result"]["class_number"]["h"], 3);
    assert_eq!(v["result"]["reduced_forms"], 3);
}

#[test]
fn output_is_deterministic() {
    let a = run(&["vandiver", "--p", "11"]).stdout;
    let b = run(&["vandiver", "--p", "11"]).stdout;
    assert_eq!(a, b);
}
