use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn olab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_olab")).args(args).output().expect("run olab")
}

fn code(args: &[&str]) -> i32 {
    olab(args).status.code().expect("exit code")
}

fn json(args: &[&str]) -> Value {
    serde_json::from_slice(&olab(args).stdout).expect("json output")
}

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel).display().to_string()
}

fn golden(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(file)
}

fn check_golden(file: &str, actual: &[u8]) {
    let path = golden(file);
    if std::env::var_os("OLAB_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read(&path).unwrap_or_else(|e| panic!("{file}: {e}"));
    assert!(expected == actual, "{file} differs from its golden snapshot");
}

#[test]
fn check_axioms_exit_codes() {
    assert_eq!(code(&["check-axioms", &data("spaces/CHAIN3.json")]), 0);
    let out = olab(&["check-axioms", &data("spaces/STAR.json"), "--axiom", "frobenius-minus"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reports"][0]["witness"]["U"], serde_json::json!(["s"]));
    assert_eq!(code(&["check-axioms", "missing.json"]), 3);
    assert_eq!(code(&["check-axioms", "TWO_SLOPES(1,2)", "--axiom", "parallel"]), 1);
    assert_eq!(code(&["check-axioms", "TWO_SLOPES(1,1)", "--axiom", "parallel"]), 0);
}

#[test]
fn malformed_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"points\": [").unwrap();
    assert_eq!(code(&["check-axioms", bad.to_str().unwrap()]), 3);
    assert_eq!(code(&["cones", "CHAIN3", "--region", "nowhere"]), 3);
    assert_eq!(code(&["domain", "STAR", "--region", "z"]), 3);
    assert_eq!(code(&["no-such-command"]), 3);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn budget_exhaustion_is_unknown() {
    let out = Command::new(env!("CARGO_BIN_EXE_olab"))
        .env("OLAB_BUDGET", "1000")
        .args(["check-axioms", "TWO_SLOPES(1,1)", "--axiom", "parallel"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cover_verdicts() {
    let out = olab(&["cover", "VEE", "--a", "x", "--u", "z", "--direction", "below"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "not-covered");

    let v = json(&["cover", "CHAIN3", "--a", "a,b,c", "--u", "c", "--direction", "below"]);
    assert_eq!(v["verdict"], "covered");
    assert!(v["certificate"].is_array() || v["certificate"].is_object());
    assert_eq!(v["bounds"]["budget"], 200_000_000);

    let args = ["cover", "CHAIN3", "--a", "a", "--u", "c", "--max-path-len", "1", "--max-refinement-len", "1"];
    assert_eq!(code(&args), 2);
}

#[test]
fn domains_on_spaces_and_grids() {
    let v = json(&["domain", &data("spaces/CHAIN3.json"), "--region", "a", "--direction", "future", "--semantics", "localic"]);
    assert_eq!(v["domain"], serde_json::json!(["a", "b", "c"]));

    let out = olab(&["domain", "CHAIN3", "--region", ""]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["domain"], serde_json::json!([]));

    let out = olab(&["domain", "CONE_CUT", "--semantics", "all"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let strict: Vec<&Value> = v["report"]["inclusions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|i| i["strict"] == true)
        .collect();
    assert!(strict.iter().any(|i| i["lhs"] == "inext-causal" && i["rhs"] == "bounded-causal"));

    let v = json(&["domain", "CONE_CUT", "--semantics", "localic", "--region", "3:0"]);
    assert_eq!(v["domain"], serde_json::json!([[3, 0]]));
    assert_eq!(code(&["domain", "CONE_CUT", "--region", "9:9"]), 3);
}

#[test]
fn sites_paths_and_cones() {
    let v = json(&["gtop", "CHAIN3"]);
    assert!(v["axioms"].as_array().unwrap().iter().all(|a| a["outcome"] == "holds"));
    assert_eq!(v["kleisli_stability"]["fails"], true);

    let v = json(&["paths", "restrict", "CHAIN3", "--path", "a;b;c", "--past", "c"]);
    assert_eq!(v["restricted"], serde_json::json!([["a"], ["b"], ["c"]]));
    assert_eq!(code(&["paths", "restrict", "CHAIN3", "--path", "c;a", "--past", "a"]), 3);

    let v = json(&["cones", "VEE", "--region", "x"]);
    assert_eq!(v["localic_up"], serde_json::json!(["x", "z"]));
}

#[test]
fn grid_files_load() {
    let v = json(&["domain", &data("grids/cone_cut.json"), "--semantics", "inext-causal"]);
    assert!(v["domain"].is_array());
    assert_eq!(code(&["check-axioms", &data("grids/two_slopes.json"), "--axiom", "parallel"]), 1);
}

#[test]
fn scenario_goldens() {
    assert_eq!(
        String::from_utf8(olab(&["scenario"]).stdout).unwrap().lines().count(),
        olab::grid::GRID_SCENARIOS.len()
    );
    for (name, render, file) in [
        ("MINKOWSKI_PLAIN", "svg", "minkowski_plain.svg"),
        ("REGION_REMOVED", "ascii", "region_removed.ascii"),
        ("TWO_SLOPES(1,2)", "json", "two_slopes1_2.cli.json"),
    ] {
        let out = olab(&["scenario", name, "--render", render]);
        assert_eq!(out.status.code(), Some(0));
        check_golden(file, &out.stdout);
    }
    assert_eq!(code(&["scenario", "NOWHERE"]), 3);
}

#[test]
fn scenario_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = olab(&["scenario", "CONE_CUT", "--render", "svg", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("CONE_CUT.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}
