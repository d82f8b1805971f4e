use std::path::PathBuf;
use std::process::{Command, Output};

use density_lab::Error;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_density-lab")).args(args).output().expect("binary runs")
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("density-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const THIRDS: &str = r#"{
    "group": {"family": "real_line"},
    "set": {"kind": "points", "lattice": {"period": "1", "residues": ["0", "1/3"]}},
    "objects": {"H": {"kind": "intervals", "intervals": [["0", "2/5"]]}}
}"#;

#[test]
fn usage_errors() {
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bin(&["density", "--instance", "/nonexistent/x.json"]).status.code(), Some(2));
    let bad = scratch("bad.json", r#"{"group": {"family": "real_line"}, "sett": {}}"#);
    let o = bin(&["density", "--instance", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sett"));
}

#[test]
fn density_with_report() {
    let inst = scratch(
        "z3.json",
        r#"{"group": {"family": "z_lattice", "dimension": 1},
            "set": {"kind": "periodic_discrete", "period": [3], "residues": [[0]]}}"#,
    );
    let out = inst.with_extension("out.json");
    let o = bin(&["density", "--instance", inst.to_str().unwrap(), "--notion", "delta", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1/3 (exact, brute-force"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["input_digest"].as_str().unwrap().len(), 64);
    assert_eq!(report["result"]["value"]["value"], "1/3");
    assert_eq!(report["defaults"]["oracle_cap"], 8);
}

#[test]
fn partition_and_pipeline() {
    let inst = scratch("thirds.json", THIRDS);
    let out = inst.with_extension("out.json");
    let o = bin(&["partition", "--instance", inst.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["result"]["n"], 2);
    let o = bin(&["pipeline", "--instance", inst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("covers ℝ: verified"));
}

#[test]
fn accumulation_exits_with_3() {
    let inst = scratch(
        "acc.json",
        r#"{"group": {"family": "real_line"},
            "set": {"kind": "points", "tails": [{"center": "0", "scale": "1", "start": 1}]}}"#,
    );
    let o = bin(&["pipeline", "--instance", inst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let o = bin(&["density", "--instance", inst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Infinite"));
}

#[test]
fn demos_and_selftest() {
    let o = bin(&["demo", "totik"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1/2000000"));
    assert_eq!(bin(&["selftest", "--cap", "5"]).status.code(), Some(0));
    assert_eq!(bin(&["selftest", "--cap", "13"]).status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let v = Error::Verification { stage: "cover".into(), detail: "gap".into() };
    assert_eq!(v.exit_code(), 4);
    assert_eq!(Error::Parse("x".into()).exit_code(), 2);
    assert_eq!(Error::Precondition("x".into()).exit_code(), 3);
}
