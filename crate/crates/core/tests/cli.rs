use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hconc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hconc"))
        .args(args)
        .current_dir(dir)
        .env("HCONC_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn verify_writes_clean_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = hconc(
        &["verify", "--n", "4", "--space", "scalar", "--trials", "100", "--seed", "7", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["summary"]["fail"], 0);
    assert_eq!(r["summary"]["seed"], 7);
    assert!(r["summary"]["pass"].as_u64().unwrap() > 0);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["verify", "--trials", "0"],
        vec!["verify", "--p-grid", "2:x:1"],
        vec!["verify", "--space", "banach"],
        vec!["moments"],
        vec![],
    ] {
        let out = hconc(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = Command::new(env!("CARGO_BIN_EXE_hconc"))
        .args(["info"])
        .env("HCONC_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn moments_csv_for_rademacher_sum() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<Vec<f64>> = (0..16u32).map(|b| vec![(4.0 - 2.0 * b.count_ones() as f64) / 2.0]).collect();
    let file = serde_json::json!({ "n": 4, "dim": 1, "values": values });
    std::fs::write(dir.path().join("f.json"), file.to_string()).unwrap();
    let out = hconc(&["moments", "--fn", "f.json", "--p-grid", "2:16:1", "--csv", "m.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("m.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["p", "a_p", "beta_p", "gamma_p", "sqrtp_bound"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 15);
    let row4 = rows.iter().find(|r| r[0].parse::<f64>().unwrap() == 4.0).unwrap();
    assert_eq!(row4[1].parse::<f64>().unwrap(), 2.5);
    assert_eq!(row4[4].parse::<f64>().unwrap(), 8f64.sqrt());
}

#[test]
fn moments_reports_computational_errors_as_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"n": 2, "dim": 1, "values": [[1.0]]}"#).unwrap();
    let out = hconc(&["moments", "--fn", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let rec: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["error"], "LengthMismatch");
}

#[test]
fn matrix_summary_has_khintchine_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let out = hconc(&["matrix", "--n", "2", "--d", "4", "--trials", "2", "--out", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let m = read_json(&dir.path().join("m.json"));
    assert_eq!(m["summary"]["fail"], 0);
    assert!(m["khintchine"]["min_ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn extremal_writes_feasible_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = hconc(
        &["extremal", "--n", "3", "--p", "4", "--iters", "50", "--restarts", "2", "--q", "4", "--tau", "0.25", "--out", "w.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let w = read_json(&dir.path().join("w.json"));
    assert_eq!(w["n"], 3);
    assert!(w["residual"].as_f64().unwrap() <= 1e-8);
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["sharpness"]["p"].as_f64().unwrap(), 4.0);
    assert_eq!(summary["sharpness"]["target_met"], false);
    // the witness file is itself a valid function file
    let values = w["values"].as_array().unwrap();
    assert_eq!(values.len(), 8);
}

#[test]
fn info_lists_registry() {
    let dir = tempfile::tempdir().unwrap();
    let out = hconc(&["info", "--d", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let spaces = doc["spaces"].as_array().unwrap();
    assert_eq!(spaces.len(), 4);
    assert_eq!(spaces[0]["cotype_q"].as_f64().unwrap(), 2.0);
    // operator(2) is outside the registry
    assert!(spaces[3]["error"].is_string());
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |o: &'static str| vec!["verify", "--n", "3", "--space", "schatten", "--d", "2", "--trials", "10", "--seed", "3", "--mode", "p-exact", "--out", o];
    assert_eq!(hconc(&args("a.json"), dir.path()).status.code(), Some(0));
    let again = Command::new(env!("CARGO_BIN_EXE_hconc"))
        .args(args("b.json"))
        .current_dir(dir.path())
        .env("HCONC_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(again.status.code(), Some(0));
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}
