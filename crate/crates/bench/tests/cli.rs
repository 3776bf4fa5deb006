use std::fs;
use std::process::Command;

use sdnn_core::{Metric, PointSet};

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdnn-bench"))
}

#[test]
fn gen_unit_vectors_writes_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("units.txt");
    let status = bench()
        .args(["gen", "--generator", "unit-vectors", "--n", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let ps = PointSet::read_text(fs::read(&out).unwrap().as_slice()).unwrap();
    assert_eq!((ps.n(), ps.d()), (5, 5));
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(ps.point(i)[j], if i == j { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn gen_planted_writes_query_and_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("planted.bin");
    let status = bench()
        .args(["gen", "--generator", "planted-nn", "--n", "4", "--d", "50", "--metric", "l2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let ps = PointSet::from_bytes(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(ps.metric(), Metric::L2);
    let q = PointSet::from_bytes(&fs::read(dir.path().join("planted.bin.query")).unwrap()).unwrap();
    assert_eq!((q.n(), q.d()), (1, 50));
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        bench()
            .args(["gen", "--generator", "boolean-cube", "--n", "4", "--d", "8", "--seed", "9", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.txt"), run("b.txt"));
}

#[test]
fn usage_errors_exit_one() {
    let bad_flag = bench().args(["ann-l1", "--bogus"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(1));
    let big_p = bench().args(["ann-lp", "--p", "9", "--trials", "1"]).output().unwrap();
    assert_eq!(big_p.status.code(), Some(1));
    let gen_without_out = bench().args(["gen"]).output().unwrap();
    assert_eq!(gen_without_out.status.code(), Some(1));
    let help = bench().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn large_p_needs_override() {
    let out = bench()
        .args(["ann-lp", "--p", "9", "--allow-large-p", "--eps", "0.9", "--n", "3", "--d", "20", "--trials", "2", "--strategy", "scan"])
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0 | 2)), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn passing_experiment_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mass.json");
    let status = bench().args(["mass-bound", "--instances", "20", "--out"]).arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["format"], "report-v1");
    assert_eq!(v["passed"], true);
}

#[test]
fn failed_threshold_exits_two() {
    // One sketch row cannot reach the accuracy threshold.
    let out = bench().args(["sketch-quality", "--cm", "0.001", "--trials", "50"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn reports_are_bit_reproducible() {
    let run = || {
        bench()
            .args(["ann-l2", "--n", "5", "--d", "500", "--trials", "20", "--seed", "3"])
            .output()
            .unwrap()
            .stdout
    };
    let a = run();
    assert!(!a.is_empty());
    assert_eq!(a, run());
}

#[test]
fn csv_output_is_long_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let status = bench().args(["tournament", "--trials", "2", "--format", "csv", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    assert!(out.exists());
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("label,metric,value"));
    assert!(csv.lines().any(|l| l == "n16,tournament_comparisons,18.0"));
}
