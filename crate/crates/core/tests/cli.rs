use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use surfsim::engine::trace::SimTrace;
use surfsim::output::RunRecord;

fn surfsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfsim")).args(args).output().expect("spawn surfsim")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const CONFIG: &str = r#"{"N": 20, "Ch": 4, "strategy": "surf", "radius": 0.35, "ttl": 5}"#;

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn run_writes_csvs_that_match_the_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", CONFIG);
    let out = tmp.path().join("out");
    let o = surfsim(&["run", "--config", &cfg, "--seed", "9", "--out", out.to_str().unwrap(), "--emit-trace"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let trace = SimTrace::from_log(&read(&out, "trace.log")).unwrap();
    let record = RunRecord::from_trace(0, &trace).unwrap();
    assert_eq!(read(&out, "runs.csv"), surfsim::output::runs_csv(std::slice::from_ref(&record)));
    assert_eq!(read(&out, "delivery_ratio.csv"), surfsim::output::delivery_csv(std::slice::from_ref(&record)));
    assert_eq!(
        read(&out, "accumulative_receivers.csv"),
        surfsim::output::accumulative_csv(&[record])
    );
    assert!(out.join("manifest.json").exists());
    assert!(out.join("topology.txt").exists());
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", CONFIG);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for d in [&a, &b] {
        assert!(surfsim(&["run", "--config", &cfg, "--seed", "3", "--out", d.to_str().unwrap()]).status.success());
    }
    for f in ["runs.csv", "delivery_ratio.csv", "accumulative_receivers.csv", "manifest.json"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
}

#[test]
fn unreadable_config_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = surfsim(&["run", "--config", "/nonexistent/c.json", "--out", tmp.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
}

#[test]
fn validate_fills_defaults_and_names_bad_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let good = write(tmp.path(), "g.json", r#"{"N": 10, "Ch": 3, "strategy": "ca"}"#);
    let o = surfsim(&["validate", "--config", &good]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["radius"], 0.25);
    assert_eq!(v["ca"]["set_size"], 3);

    let bad = write(tmp.path(), "b.json", r#"{"N": 10, "Ch": 3, "strategy": "surf", "radius": -1}"#);
    let o = surfsim(&["validate", "--config", &bad]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("radius"));
}

#[test]
fn sweep_cross_product_has_one_cell_per_combination() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", CONFIG);
    let spec = write(
        tmp.path(),
        "s.json",
        r#"{"parameters": {"Ch": [5, 15], "strategy": ["surf", "rd", "sb", "ca"]}, "seeds": [1, 2]}"#,
    );
    let out = tmp.path().join("sweep");
    let o = surfsim(&["sweep", "--config", &cfg, "--spec", &spec, "--out", out.to_str().unwrap(), "--workers", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cells = read(&out, "cells.csv");
    assert_eq!(cells.lines().count(), 1 + 8);
    assert_eq!(read(&out, "runs.csv").lines().count(), 1 + 16);
    assert_eq!(read(&out, "summary_final_fraction.csv").lines().count(), 1 + 8);
}

#[test]
fn single_value_sweep_matches_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", CONFIG);
    let spec = write(tmp.path(), "s.json", r#"{"parameters": {"strategy": ["surf"]}, "seeds": [4]}"#);
    let s = tmp.path().join("s");
    let r = tmp.path().join("r");
    assert!(surfsim(&["sweep", "--config", &cfg, "--spec", &spec, "--out", s.to_str().unwrap()]).status.success());
    assert!(surfsim(&["run", "--config", &cfg, "--seed", "4", "--out", r.to_str().unwrap()]).status.success());
    for f in ["runs.csv", "delivery_ratio.csv", "accumulative_receivers.csv"] {
        assert_eq!(read(&s, f), read(&r, f), "{f}");
    }
}

#[test]
fn trace_replay_reproduces_run_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", CONFIG);
    let r = tmp.path().join("r");
    let p = tmp.path().join("p");
    assert!(surfsim(&["run", "--config", &cfg, "--seed", "5", "--out", r.to_str().unwrap(), "--emit-trace"])
        .status
        .success());
    let log = r.join("trace.log");
    assert!(surfsim(&["trace-replay", "--trace", log.to_str().unwrap(), "--out", p.to_str().unwrap()])
        .status
        .success());
    for f in ["runs.csv", "delivery_ratio.csv", "accumulative_receivers.csv"] {
        assert_eq!(read(&r, f), read(&p, f), "{f}");
    }

    let broken = write(tmp.path(), "broken.log", "not a trace\n");
    assert!(!surfsim(&["trace-replay", "--trace", &broken, "--out", p.to_str().unwrap()]).status.success());
}
