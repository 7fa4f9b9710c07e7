use std::path::PathBuf;
use std::process::{Command, Output};

use rihull::rearrangement::rearrangements;
use rihull::scenario::Scenario;
use rihull::StepFunction;
use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn rihull(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rihull")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let path = scenario("half_line.json");
    let path = path.to_str().unwrap();
    for command in ["rearrange", "ryff", "hull", "oracle-diff"] {
        let a = rihull(&[command, "--scenario", path]);
        let b = rihull(&[command, "--scenario", path]);
        assert!(a.status.success(), "{command}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{command}");
    }
    let a = rihull(&["verify", "--seed", "42", "--cases", "60"]);
    let b = rihull(&["verify", "--seed", "42", "--cases", "60"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(report(&a)["result"]["seed"], 42);
}

#[test]
fn malformed_rational_is_a_parse_error() {
    let dir = std::env::temp_dir().join(format!("rihull-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let text = std::fs::read_to_string(scenario("two_piece.json")).unwrap().replace("\"3\"]", "\"1/0\"]");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, text).unwrap();
    let out = rihull(&["rearrange", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1/0") && err.contains("line"), "{err}");
    let out = rihull(&["hull", "--scenario", scenario("two_piece.json").to_str().unwrap(), "--p", "1/0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rihull(&["hull", "--scenario", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn emitted_step_functions_round_trip() {
    let path = scenario("half_line.json");
    let s = Scenario::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let out = rihull(&["rearrange", "--scenario", path.to_str().unwrap()]);
    let r = report(&out);
    for (name, f) in &s.functions {
        let expected = rearrangements(f, &s.space).unwrap();
        let entry = &r["result"]["functions"][name];
        for (key, want) in [
            ("mu_f", &expected.mu_f),
            ("kappa_f", &expected.kappa_f),
            ("f_star", &expected.f_star),
            ("f_lowstar", &expected.f_lowstar),
        ] {
            let got: StepFunction = serde_json::from_value(entry[key].clone()).unwrap();
            assert_eq!(&got, want, "{name}.{key}");
        }
    }
}

#[test]
fn csv_tables_and_examples() {
    let dir = std::env::temp_dir().join(format!("rihull-csv-{}", std::process::id()));
    let out = rihull(&["rearrange", "--scenario", scenario("two_piece.json").to_str().unwrap(), "--csv", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let low = std::fs::read_to_string(dir.join("f.f_lowstar.csv")).unwrap();
    assert_eq!(low, "x,value\n0,1\n1/2,3\n1,inf\n");
    let star = std::fs::read_to_string(dir.join("f.f_star.csv")).unwrap();
    assert_eq!(star, "x,value\n0,3\n1/2,1\n");
}

#[test]
fn failed_operations_exit_nonzero() {
    // The weight's infinite-measure level lies below its top level, so epsilon = 0 is unavailable.
    let text = r#"{
        "space": {"density": {"domain": ["0", "inf"], "breaks": [], "values": ["1"]}},
        "functions": {"g": {"domain": ["0", "inf"], "breaks": ["1"], "values": ["1", "0"]}},
        "weight": {"step": {"domain": ["0", "inf"], "breaks": ["1"], "values": ["2", "1"]}}
    }"#;
    let dir = std::env::temp_dir().join(format!("rihull-eps-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("neither.json");
    std::fs::write(&path, text).unwrap();
    let out = rihull(&["hull", "--scenario", path.to_str().unwrap(), "--epsilon", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon = 0"));
    let out = rihull(&["hull", "--scenario", path.to_str().unwrap()]);
    assert!(out.status.success());
    let out = rihull(&["verify", "--scenario", scenario("campaign.json").to_str().unwrap(), "--cases", "20"]);
    assert!(out.status.success());
    assert_eq!(report(&out)["result"]["families"].as_array().unwrap().len(), 3);
}
