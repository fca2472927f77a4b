use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qwires"));
    c.env_remove("QWIRES_CAP");
    c
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn jsonl(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("each line is JSON"))
        .collect()
}

#[test]
fn cluster_classifies_as_wire() {
    let out = run(&["classify", data("cluster.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "Wire");
    let phi = v["normal_form"]["phi"].as_f64().unwrap();
    assert!((phi - std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn verdicts_map_to_exit_codes() {
    for (file, verdict, code) in [
        ("identity.json", "NotGapped", 3),
        ("not_unital.json", "NotUnital", 4),
    ] {
        let out = run(&["classify", data(file).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(code), "{file}");
        assert_eq!(json(&out)["verdict"], verdict);
    }
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"a0": [[[0.7, 0.0], [0.0"#).unwrap();
    let out = run(&["classify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["classify", data("x_gate.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "classify",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compile_then_simulate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let wire = data("cluster.json");
    let out = run(&[
        "compile",
        wire.to_str().unwrap(),
        "H",
        "--out",
        plan.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let mut finished = 0;
    for seed in 0..8 {
        let out = run(&[
            "simulate",
            wire.to_str().unwrap(),
            plan.to_str().unwrap(),
            "--seed",
            &seed.to_string(),
        ]);
        let lines = jsonl(&out);
        let last = lines.last().unwrap();
        match out.status.code() {
            Some(0) => {
                finished += 1;
                assert_eq!(last["type"], "summary");
                assert!(last["max_prob_deviation"].as_f64().unwrap() < 1e-10);
                assert!(last["distance_to_target"].as_f64().unwrap() < 1e-6);
                assert_eq!(lines.len() - 1, last["measured"].as_u64().unwrap() as usize);
            }
            Some(1) => assert_eq!(last["type"], "error"),
            c => panic!("unexpected exit {c:?}"),
        }
    }
    assert!(finished > 0);
}

#[test]
fn plan_for_other_wire_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let out = run(&[
        "compile",
        data("cluster.json").to_str().unwrap(),
        "S:0.3",
        "--out",
        plan.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&[
        "simulate",
        data("t_resource.json").to_str().unwrap(),
        plan.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn same_seed_same_output() {
    let wire = data("t_resource.json");
    let args = ["compile", wire.to_str().unwrap(), "haar", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["compile", wire.to_str().unwrap(), "haar", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn locus_needs_two_samples() {
    let wire = data("t_resource.json");
    assert_eq!(
        run(&["locus", wire.to_str().unwrap(), "--samples", "1"])
            .status
            .code(),
        Some(2)
    );
    let out = run(&[
        "locus",
        wire.to_str().unwrap(),
        "--samples",
        "8",
        "--format",
        "jsonl",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines = jsonl(&out);
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[8]["shape"], "ellipse");
}

#[test]
fn couple_reports_exact_gate_on_cluster() {
    let out = run(&[
        "couple",
        data("cluster.json").to_str().unwrap(),
        "--exchange",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["oracle_distance_to_v"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["v_schmidt_rank"], 2);
    assert_eq!(v["branches"].as_array().unwrap().len(), 8);
    assert_eq!(v["exchange"]["entangling"], true);
}

#[test]
fn exchange_refuses_other_wires() {
    let out = run(&[
        "couple",
        data("t_resource.json").to_str().unwrap(),
        "--exchange",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bose_table_and_cap() {
    let out = run(&["bose", "--format", "jsonl"]);
    assert_eq!(out.status.code(), Some(0));
    let lines = jsonl(&out);
    let summary = lines.last().unwrap();
    assert!((summary["max_entropy"].as_f64().unwrap() - 1.725).abs() <= 0.05);
    assert_eq!(lines.len() - 1, 3 * 5);

    assert_eq!(run(&["bose", "--pairs", "8"]).status.code(), Some(2));
    let out = bin()
        .args(["bose", "--pairs", "2"])
        .env("QWIRES_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn props_pass() {
    let out = run(&["props", "--cases", "10", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn bad_tolerance_is_input_error() {
    let out = run(&[
        "--tol",
        "-1",
        "classify",
        data("cluster.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn forced_outcome_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let wire = data("cluster_nf.json");
    let out = run(&[
        "compile",
        wire.to_str().unwrap(),
        "H",
        "--out",
        plan.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut finished = 0;
    for seed in 0..10 {
        let out = run(&[
            "simulate",
            wire.to_str().unwrap(),
            plan.to_str().unwrap(),
            "--force",
            "1",
            "--seed",
            &seed.to_string(),
        ]);
        if out.status.code() == Some(0) {
            let lines = jsonl(&out);
            assert_eq!(lines[0]["outcome"], 1);
            assert!(lines.len() > 2);
            finished += 1;
        }
    }
    assert!(finished > 0);
}

#[test]
fn single_step_target_and_unreachable_target() {
    let out = run(&[
        "compile",
        data("cluster_nf.json").to_str().unwrap(),
        "WS:0.7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["steps"].as_array().unwrap().len(), 1);

    let out = run(&[
        "compile",
        data("diagonal.json").to_str().unwrap(),
        "X",
        "--max-len",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "NotReached");
}

#[test]
fn couple_branch_selection() {
    let wire = data("cluster.json");
    let out = run(&["couple", wire.to_str().unwrap(), "--branch", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["byproduct_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(
        run(&["couple", wire.to_str().unwrap(), "--branch", "0,1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bose_small_cases() {
    let out = run(&["bose", "--pairs", "1", "--rounds", "1", "--format", "jsonl"]);
    let lines = jsonl(&out);
    assert_eq!(lines[0]["entropy"].as_f64().unwrap(), 0.0);
    assert!((lines[1]["entropy"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let out = run(&["bose", "--rounds", "0"]);
    let v = json(&out);
    assert_eq!(v["max_entropy"].as_f64().unwrap(), 0.0);
}
