use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn plumbers(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plumbers")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("plumbers-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const TREFOIL: &str = r#"{"m":5,"perm":{"x":[1,3,4,2],"y":[3,1,4,2],"z":[3,1,2,4]},"classes":[]}"#;

#[test]
fn build_exports_json_lines() {
    let path = scratch("s4.jsonl");
    let out = plumbers(&["build", "--m", "4", "--space", "S", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 720);
    for (i, l) in lines.iter().enumerate() {
        assert_eq!(l["id"], i);
        for pair in l["boundary"].as_array().unwrap() {
            assert!(pair[0].as_u64().unwrap() < i as u64);
        }
    }
}

#[test]
fn taylor_chain_of_v2_is_a_cycle() {
    let out = plumbers(&["taylor", "--m", "4", "--invariant", "v2", "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["verified_cycle"], true);
    assert_eq!(v["invariant"], "v2");
}

#[test]
fn taylor_chain_of_an_indicator_fails_validation() {
    let out = plumbers(&["taylor", "--m", "4", "--invariant", "indicator:1982", "--verify"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["verified_cycle"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cycle check failed"));
}

#[test]
fn spectral_sequence_converges_to_homology() {
    let ss = json(&plumbers(&["ss", "--m", "4", "--max-page", "3", "--reindex"]));
    assert_eq!(ss["reindexed"], true);
    let pages = ss["pages"].as_array().unwrap();
    assert!(!pages.is_empty());
    let hom = json(&plumbers(&["homology", "--m", "4", "--space", "S"]));
    let total: u64 = hom["ranks"].as_array().unwrap().iter().map(|r| r[1].as_u64().unwrap()).sum();
    let last = pages.last().unwrap();
    let limit: u64 = last["entries"].as_array().unwrap().iter().map(|e| e[2].as_u64().unwrap()).sum();
    assert_eq!(limit, total);
}

#[test]
fn outputs_are_deterministic() {
    let a = plumbers(&["filtration", "--m", "4"]);
    let b = plumbers(&["filtration", "--m", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["cx"].as_array().unwrap().len(), 720);
}

#[test]
fn components_at_four_moves() {
    let v = json(&plumbers(&["components", "--m", "4"]));
    assert_eq!(v["count"], 1);
    assert_eq!(v["components"][0]["size"], 216);
    assert_eq!(v["components"][0]["v2"], "0");
}

#[test]
fn classify_and_chord() {
    let v = json(&plumbers(&["classify", "--cell", TREFOIL]));
    assert_eq!(v["singular"], false);
    assert_eq!(v["v2"], "1");
    let wall = r#"{"m":4,"perm":{"x":[1,2,3],"y":[1,2,3],"z":[1,2,3]},"classes":[{"dir":"x","idx":[1,2]}]}"#;
    let out = plumbers(&["classify", "--cell", wall]);
    assert_eq!(out.status.code(), Some(0));
    let out = plumbers(&["chord", "--cell", TREFOIL]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn derivative_over_a_base_cell() {
    let out = plumbers(&[
        "derivative",
        "--invariant",
        "const:2",
        "--cell",
        r#"{"m":4,"perm":{"x":[1,3,2],"y":[2,1,3],"z":[1,2,3]},"classes":[{"dir":"x","idx":[2,3]}]}"#,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ds = json(&out)["derivatives"].as_array().unwrap().clone();
    assert_eq!(ds.len(), 1);
    assert_eq!(ds[0]["value"], "0");
}

#[test]
fn exit_codes() {
    assert_eq!(plumbers(&["build", "--m", "4", "--bogus"]).status.code(), Some(64));
    assert_eq!(plumbers(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(plumbers(&["build"]).status.code(), Some(64));
    assert_eq!(plumbers(&["build", "--m", "5", "--space", "P", "--max-cells", "1000"]).status.code(), Some(3));
    assert_eq!(plumbers(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_supplies_options() {
    let cfg = scratch("run.json");
    std::fs::write(&cfg, r#"{"m": 3, "space": "P"}"#).unwrap();
    let v = json(&plumbers(&["homology", "--config", cfg.to_str().unwrap()]));
    assert_eq!(v["m"], 3);
    assert_eq!(v["space"], "P");
    // flags win over the file
    let v = json(&plumbers(&["homology", "--config", cfg.to_str().unwrap(), "--space", "S"]));
    assert_eq!(v["space"], "S");
    std::fs::write(&cfg, r#"{"m": 3, "colour": "red"}"#).unwrap();
    assert_eq!(plumbers(&["homology", "--config", cfg.to_str().unwrap()]).status.code(), Some(64));
}
