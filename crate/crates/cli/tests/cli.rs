// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::process::{Command, Output};

fn revalu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revalu"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn full_adder_cost() {
    let o = revalu(&["build", "fa"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["gate_count"], 1);
    assert_eq!(v["garbage_count"], 2);
    assert_eq!(v["unit_delay"], 1);
}

#[test]
fn built_cpa_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cpa4.rnl");
    let p = path.to_str().unwrap();
    assert!(revalu(&["build", "cpa", "--width", "4", "--out", p]).status.success());
    let o = revalu(&["verify", p]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["clean"], true);
    assert_eq!(v["round_trip"]["round_trip_failures"], 0);
}

#[test]
fn zero_width_is_usage_error() {
    assert_eq!(revalu(&["build", "cpa", "--width", "0"]).status.code(), Some(2));
}

#[test]
fn fan_out_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fanout.rnl");
    fs::write(
        &path,
        "input a b c\ngate FG a b -> x y\ngate FG x c -> u v\ngate FG x y -> p q\noutput u v p q\n",
    )
    .unwrap();
    let o = revalu(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fan_out") || stdout(&o).contains("FanOut"), "{}", stdout(&o));
}

#[test]
fn missing_file_is_domain_error() {
    let o = revalu(&["verify", "/nonexistent/none.rnl"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn montmul_small_example() {
    let o = revalu(&["montmul", "--x", "3", "--y", "5", "--m", "7", "--n", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1");
    let g = revalu(&["montmul", "--x", "3", "--y", "5", "--m", "7", "--n", "3", "--gate-level"]);
    assert_eq!(stdout(&g).lines().next(), Some("1"));
}

#[test]
fn montexp_small_example() {
    let o = revalu(&["montexp", "--a", "5", "--b", "3", "--mod", "7"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "6");
}

#[test]
fn even_modulus_is_rejected() {
    let o = revalu(&["montmul", "--x", "3", "--y", "5", "--m", "8", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("odd"), "{}", stderr(&o));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["dpa", "--m", "13", "--n", "4", "--traces", "16", "--seed", "7"][..],
        &["trace", "--x", "5", "--y", "9", "--m", "13", "--n", "4"][..],
        &["build", "csa52", "--width", "3"][..],
    ] {
        let a = revalu(args);
        let b = revalu(args);
        assert!(a.status.success(), "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn clocked_dff_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("dff.json");
    let stim = dir.path().join("stim.json");
    assert!(revalu(&["build", "dff", "--width", "1", "--out", manifest.to_str().unwrap()])
        .status
        .success());
    fs::write(
        &stim,
        r#"[{"CP":1,"D":1},{"CP":0,"D":1},{"CP":true,"D":0},{"CP":false,"D":0}]"#,
    )
    .unwrap();
    let o = revalu(&[
        "sim",
        manifest.to_str().unwrap(),
        "--clocked",
        "--stimulus",
        stim.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    let q: Vec<u64> = rows.iter().map(|r| r["Q"].as_u64().unwrap()).collect();
    assert_eq!(q, [0, 1, 1, 0]);
}

#[test]
fn combinational_sim() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fa.rnl");
    let p = path.to_str().unwrap();
    revalu(&["build", "fa", "--out", p]);
    let o = revalu(&["sim", p, "--set", "A=1", "--set", "B=1", "--set", "Cin=1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outputs"]["Sum"], 1);
    assert_eq!(v["outputs"]["Cout"], 1);
}
