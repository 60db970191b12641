//! End-to-end runs of the `lst` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn lst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lst")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = lst(args);
    assert!(
        out.status.success(),
        "lst {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn sha256_file(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sample_output_is_frozen_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.lst");
    let b = dir.path().join("b.lst");
    let base = ["sample", "--code", "five-qubit", "--p", "0.1", "--shots", "3000", "--seed", "7", "--out"];
    ok(&[&base[..], &[path_str(&a)]].concat());
    ok(&[&base[..], &[path_str(&b), "--threads", "1"]].concat());
    let frozen = "283cc232109873475094f21dc82ece6acd58fe1147ba946ec6d6b9947744fe1b";
    assert_eq!(sha256_file(&a), frozen);
    assert_eq!(sha256_file(&b), frozen);
}

#[test]
fn zero_shots_is_a_usage_error() {
    let out = lst(&["sample", "--shots", "0", "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shots"));
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"shotz": 10}"#).unwrap();
    let out = lst(&["sample", "--config", path_str(&cfg), "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn noiseless_fidelity_estimate_is_consistent_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let ens = dir.path().join("e.lst");
    let report = dir.path().join("r.json");
    let samples = dir.path().join("s.csv");
    ok(&["sample", "--code", "steane", "--shots", "4000", "--seed", "3", "--out", path_str(&ens)]);
    ok(&[
        "estimate",
        path_str(&ens),
        "--observable",
        "0.5*I, 0.5*Z",
        "--bootstrap",
        "200",
        "--out",
        path_str(&report),
        "--samples-csv",
        path_str(&samples),
    ]);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let ratio = r["ratio"].as_f64().unwrap();
    let std = r["bootstrap_std"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() <= 3.0 * std, "{ratio} +- {std}");
    assert_eq!(r["shots_used"].as_u64(), Some(4000));
    let csv = std::fs::read_to_string(&samples).unwrap();
    assert!(csv.starts_with("block,numerator,denominator\n"));
    assert_eq!(csv.lines().count(), 4001);
}

#[test]
fn trivial_single_qubit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ens = dir.path().join("t.lst");
    ok(&["sample", "--code", "trivial-1", "--prep", "plus", "--p", "0.2", "--shots", "2000", "--out", path_str(&ens)]);
    let out = ok(&["estimate", path_str(&ens), "--observable", "X", "--bootstrap", "100"]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    // ⟨X⟩ = 1 - 4p/3 for the depolarized |+⟩.
    let expected = 1.0 - 4.0 * 0.2 / 3.0;
    let (ratio, std) = (r["ratio"].as_f64().unwrap(), r["bootstrap_std"].as_f64().unwrap());
    assert!((ratio - expected).abs() <= 3.0 * std, "{ratio} +- {std}");
}

#[test]
fn mismatched_code_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let ens = dir.path().join("e.lst");
    ok(&["sample", "--code", "five-qubit", "--shots", "10", "--out", path_str(&ens)]);
    let out = lst(&["estimate", path_str(&ens), "--code", "steane"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("do not match"));
}

#[test]
fn second_power_reports_per_moment_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let ens = dir.path().join("e.lst");
    ok(&["sample", "--code", "five-qubit", "--p", "0.05", "--shots", "400", "--out", path_str(&ens)]);
    let out = ok(&["estimate", path_str(&ens), "--coefficients", "0.5,0.5", "--bootstrap", "50"]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["m"].as_u64(), Some(2));
    let moments = r["per_moment"].as_array().unwrap();
    assert_eq!(moments.len(), 2);
    assert_eq!(moments[0]["tuples"].as_u64(), Some(400));
    assert_eq!(moments[1]["tuples"].as_u64(), Some(200));
    assert_eq!(r["blocks"].as_u64(), Some(200));
}

#[test]
fn oracle_check_passes() {
    let out = ok(&["oracle-check", "--shots", "5000", "--seed", "11"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 8);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn sweep_csv_headers_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.csv");
    let g = dir.path().join("t.gp");
    ok(&[
        "threshold-sweep", "--p", "0.01,0.1", "--shots", "200", "--bootstrap", "20", "--out", path_str(&t), "--gnuplot",
        path_str(&g),
    ]);
    assert_eq!(
        header(&t),
        "p,physical_infidelity,lst_m1,lst_m1_std,lst_m2,lst_m2_std,dense_m1,dense_m2,degenerate_m1,degenerate_m2"
    );
    assert_eq!(std::fs::read_to_string(&t).unwrap().lines().count(), 3);
    assert!(std::fs::read_to_string(&g).unwrap().contains("plot "));

    let c = dir.path().join("c.csv");
    ok(&[
        "code-size-sweep", "--code", "five-qubit", "--code", "steane", "--shots", "100,300", "--bootstrap", "20", "--out",
        path_str(&c),
    ]);
    assert_eq!(header(&c), "code,n,shots,fidelity_estimate,bootstrap_std,degenerate");
    assert_eq!(std::fs::read_to_string(&c).unwrap().lines().count(), 5);

    let l = dir.path().join("l.csv");
    ok(&["logical-scaling-sweep", "--ks", "1,2", "--shots", "200", "--bootstrap", "20", "--out", path_str(&l)]);
    assert_eq!(header(&l), "k,shots,mean,std,degenerate");
}
