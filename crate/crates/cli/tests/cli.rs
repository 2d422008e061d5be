use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use metric_lab::{Space, WeightMode};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_metric-lab"));
    c.env_remove("METRIC_LAB_CACHE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const MINIMAL: &str = r#"{
  "version": 1,
  "seed": 7,
  "space": {"builder": "grid", "dim": 1, "n_per_side": 8},
  "fields": {"f": {"kind": "random"}},
  "checks": [{"id": "thm2", "field": "f", "params": {"s": 0.5, "p": 1.5, "q": 1.5}}],
  "output": {"dir": "bundle"}
}"#;

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn minimal_grid_run_writes_one_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", MINIMAL);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let reports: Vec<_> = fs::read_dir(tmp.path().join("bundle/reports")).unwrap().collect();
    assert_eq!(reports.len(), 1);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("bundle/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["entries"][0]["inequality_id"], "thm2");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn morrey_p_above_q_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &MINIMAL.replace("\"p\": 1.5", "\"p\": 3.0"));
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = text(&o.stderr);
    assert!(err.contains("Morrey exponents need 1 < p ≤ q"), "{err}");
    assert!(err.contains("checks[0].params"), "{err}");
    assert!(!tmp.path().join("bundle").exists());
}

#[test]
fn parse_errors_report_line_and_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &MINIMAL.replace("\"n_per_side\": 8", "\"n_per_side\": -8"));
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = text(&o.stderr);
    assert!(err.contains("line 4") && err.contains("space"), "{err}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{
      "version": 1,
      "seed": 3,
      "space": {"builder": "grid", "dim": 2, "n_per_side": 12},
      "kernel": {"pattern": "random-pm1"},
      "fields": {
        "f": {"kind": "random", "distribution": {"kind": "bumps", "count": 2}},
        "h": {"kind": "expr", "expr": "ind(x0 - 0.5) * exp(-(x1 - 0.5)^2 / 0.1)"}
      },
      "checks": [
        {"id": "thm2", "field": "h", "params": {"s": 1.0}},
        {"id": "thm3", "field": "f"},
        {"id": "maximal_bound", "norm": {"kind": "lebesgue", "p": 2}, "trials": 3},
        {"id": "sharpness", "target": {"which": "thm2", "params": {"s": 1.0}}, "iterations": 50}
      ]
    }"#;
    let cfg = write_config(tmp.path(), "c.json", body);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", "2"]);
        assert!(matches!(code(&o), 0 | 2), "{}", text(&o.stderr));
    }
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.len(), 5);
    assert_eq!(fa, fb);
    let o = run(&["run", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--seed", "4"]);
    assert!(matches!(code(&o), 0 | 2));
    assert_ne!(files(&a), fb);
}

#[test]
fn report_formats() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", MINIMAL);
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap()])), 0);
    let bundle = tmp.path().join("bundle");
    let out = tmp.path().join("export");
    let o = run(&["report", bundle.to_str().unwrap(), "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csvs: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(csvs.len(), 1);
    let csv = fs::read_to_string(&csvs[0]).unwrap();
    assert_eq!(csv.lines().next(), Some("point_id,lhs,rhs,ratio"));
    assert_eq!(csv.lines().count(), 9);

    let o = run(&["report", bundle.to_str().unwrap(), "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let all: serde_json::Value = serde_json::from_slice(&fs::read(out.join("reports.json")).unwrap()).unwrap();
    assert_eq!(all.as_array().unwrap().len(), 1);

    let o = run(&["report", bundle.to_str().unwrap(), "--format", "summary-text", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let summary = text(&o.stdout);
    assert!(summary.starts_with("thm2 [thm2]: constant"), "{summary}");
    assert!(summary.contains("window [") && summary.contains("condition value"), "{summary}");
    assert_eq!(fs::read_to_string(out.join("summary.txt")).unwrap(), summary);
}

#[test]
fn exploratory_thm1_is_flagged_in_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{
      "version": 1,
      "seed": 5,
      "space": {"builder": "cantor", "level": 5, "dim": 1},
      "certificate": {"r_min": 0.005, "r_max": 0.5, "centers": "all"},
      "kernel": {"pattern": "sign-first-coordinate"},
      "fields": {"f": {"kind": "expr", "expr": "x0 * x0"}},
      "checks": [{"id": "thm1", "field": "f"}],
      "output": {"dir": "bundle"}
    }"#;
    let cfg = write_config(tmp.path(), "c.json", body);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert!(matches!(code(&o), 0 | 2), "{}", text(&o.stderr));
    let o = run(&["report", tmp.path().join("bundle").to_str().unwrap(), "--format", "summary-text"]);
    assert_eq!(code(&o), 0);
    assert!(text(&o.stdout).contains("exploratory (condition 2^{1-ν}c2/c1 ≥ 1)"), "{}", text(&o.stdout));
}

#[test]
fn violations_exit_two_and_keep_the_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    // without projection T*1 > 0 while the upper gradient of 1 vanishes
    let body = r#"{
      "version": 1,
      "space": {"builder": "grid", "dim": 1, "n_per_side": 16},
      "kernel": {"pattern": "sign-first-coordinate", "project": false},
      "fields": {"one": {"kind": "expr", "expr": "1"}},
      "checks": [{"id": "thm1", "field": "one"}],
      "output": {"dir": "bundle"}
    }"#;
    let cfg = write_config(tmp.path(), "c.json", body);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", text(&o.stderr));
    let err = text(&o.stderr);
    assert!(err.contains("thm1") && err.contains("points 0 1 2"), "{err}");
    assert!(tmp.path().join("bundle/reports/00-thm1.json").exists());
}

#[test]
fn failed_preconditions_exit_one_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{
      "version": 1,
      "space": {"builder": "grid", "dim": 1, "n_per_side": 16},
      "fields": {"f": {"kind": "expr", "expr": "x0"}, "zero": {"kind": "expr", "expr": "0"}},
      "checks": [{"id": "poincare", "field": "f", "gradient": "zero", "params": {"s_exp": 1, "q_exp": 2}}],
      "output": {"dir": "bundle"}
    }"#;
    let cfg = write_config(tmp.path(), "c.json", body);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(text(&o.stderr).contains("not an upper gradient"), "{}", text(&o.stderr));
    assert!(!tmp.path().join("bundle").exists());
}

#[test]
fn empty_and_missing_bundles() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["report", tmp.path().to_str().unwrap(), "--format", "summary-text"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(fs::read_to_string(tmp.path().join("export/summary.txt")).unwrap(), "");
    let o = run(&["report", tmp.path().join("nope").to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 1);
    assert!(text(&o.stderr).contains("bundle not found"));
}

#[test]
fn certify_uses_the_cache_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let space = Space::grid(2, 16, WeightMode::CellVolume).unwrap();
    let doc = tmp.path().join("space.json");
    fs::write(&doc, serde_json::to_string(&space.to_document()).unwrap()).unwrap();
    let cache = tmp.path().join("cache");
    let go = || {
        bin()
            .args(["certify", doc.to_str().unwrap()])
            .env("METRIC_LAB_CACHE", &cache)
            .output()
            .unwrap()
    };
    let first = go();
    assert_eq!(code(&first), 0, "{}", text(&first.stderr));
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let nu = v["certificate"]["nu_hat"].as_f64().unwrap();
    assert!((1.8..2.2).contains(&nu), "{nu}");
    assert_eq!(v["points"], 256);
    assert_eq!(v["soundness_violations"], 0);
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
    assert_eq!(go().stdout, first.stdout);
    let o = run(&["certify", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}
