//! CSV and manifest writers.
//!
//! Per-run files start with `strategy,channels,nodes,seed,cell`, followed by
//! metric columns. `cell` indexes a sweep cell and is 0 for a single run.
//!
//! | file | metric columns |
//! |------|----------------|
//! | `delivery_ratio.csv` | `ordering,position,node,delivery_ratio` |
//! | `accumulative_receivers.csv` | `hop,receivers` |
//! | `runs.csv` | `ttl,slots,truncated,final_receivers,final_fraction,mean_delivery` |
//!
//! `ordering` is `raw` (ascending node id) or `sorted` (descending ratio,
//! ties by node id); `position` is the 0-based row index within an ordering.
//!
//! Aggregated files replace `seed` with `runs` and report `mean,std`:
//! `summary_delivery_ratio.csv`, `summary_accumulative_receivers.csv` and
//! `summary_final_fraction.csv`. Floats use the shortest representation that
//! round-trips.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::engine::{build_topology, run_on_topology};
use crate::error::{Result, SimError};
use crate::metrics::{AggregateReport, MeanStd, MetricsReport};
use crate::SimTrace;

pub const DELIVERY_CSV: &str = "delivery_ratio.csv";
pub const ACCUMULATIVE_CSV: &str = "accumulative_receivers.csv";
pub const RUNS_CSV: &str = "runs.csv";
pub const CELLS_CSV: &str = "cells.csv";
pub const SUMMARY_DELIVERY_CSV: &str = "summary_delivery_ratio.csv";
pub const SUMMARY_ACCUMULATIVE_CSV: &str = "summary_accumulative_receivers.csv";
pub const SUMMARY_FINAL_CSV: &str = "summary_final_fraction.csv";
pub const MANIFEST: &str = "manifest.json";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One finished run, as written to the per-run CSVs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub cell: usize,
    pub report: MetricsReport,
    pub slots: usize,
    pub truncated: bool,
}

impl RunRecord {
    pub fn from_trace(cell: usize, trace: &SimTrace) -> Result<Self> {
        Ok(Self {
            cell,
            report: MetricsReport::from_trace(trace)?,
            slots: trace.slots.len(),
            truncated: trace.meta.truncated,
        })
    }
}

/// An aggregated sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: usize,
    pub aggregate: AggregateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub cells: usize,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(config_hash: String, seeds: Vec<u64>, cells: usize, files: Vec<String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: TOOL_VERSION.to_string(),
            config_hash,
            seeds,
            cells,
            files,
        }
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

fn row(w: &mut csv::Writer<Vec<u8>>, fields: &[String]) {
    w.write_record(fields).expect("in-memory writer");
}

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

/// `(node, value)` pairs in raw and sorted order, tagged with the ordering.
fn orderings(values: Vec<(usize, f64)>) -> Vec<(&'static str, usize, usize, f64)> {
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let raw = values.into_iter().enumerate().map(|(i, (v, x))| ("raw", i, v, x));
    let sorted = sorted.into_iter().enumerate().map(|(i, (v, x))| ("sorted", i, v, x));
    raw.chain(sorted).collect()
}

fn run_key(r: &RunRecord) -> [String; 5] {
    let m = &r.report;
    [s(&m.strategy), s(m.channels), s(m.nodes), s(m.seed), s(r.cell)]
}

pub fn delivery_csv(records: &[RunRecord]) -> String {
    let mut w = writer();
    row(
        &mut w,
        &["strategy", "channels", "nodes", "seed", "cell", "ordering", "position", "node", "delivery_ratio"].map(s),
    );
    for r in records {
        let values = r.report.per_node_delivery.iter().map(|(&v, &x)| (v, x)).collect();
        for (ord, pos, node, x) in orderings(values) {
            let mut f = run_key(r).to_vec();
            f.extend([s(ord), s(pos), s(node), s(x)]);
            row(&mut w, &f);
        }
    }
    finish(w)
}

pub fn accumulative_csv(records: &[RunRecord]) -> String {
    let mut w = writer();
    row(&mut w, &["strategy", "channels", "nodes", "seed", "cell", "hop", "receivers"].map(s));
    for r in records {
        for (h, x) in r.report.accumulative_receivers.iter().enumerate() {
            let mut f = run_key(r).to_vec();
            f.extend([s(h), s(x)]);
            row(&mut w, &f);
        }
    }
    finish(w)
}

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut w = writer();
    row(
        &mut w,
        &[
            "strategy",
            "channels",
            "nodes",
            "seed",
            "cell",
            "ttl",
            "slots",
            "truncated",
            "final_receivers",
            "final_fraction",
            "mean_delivery",
        ]
        .map(s),
    );
    for r in records {
        let m = &r.report;
        let mut f = run_key(r).to_vec();
        f.extend([
            s(m.ttl),
            s(r.slots),
            s(u8::from(r.truncated)),
            s(m.final_receivers()),
            s(m.final_fraction()),
            s(m.mean_delivery()),
        ]);
        row(&mut w, &f);
    }
    finish(w)
}

fn summary_key(c: &CellSummary) -> Vec<String> {
    let a = &c.aggregate;
    vec![s(&a.strategy), s(a.channels), s(a.nodes), s(a.count), s(c.cell)]
}

const SUMMARY_HEAD: [&str; 5] = ["strategy", "channels", "nodes", "runs", "cell"];

fn with_head(extra: &[&str]) -> Vec<String> {
    SUMMARY_HEAD.iter().chain(extra).map(s).collect()
}

fn push_ms(f: &mut Vec<String>, ms: &MeanStd) {
    f.push(s(ms.mean));
    f.push(s(ms.std));
}

pub fn summary_delivery_csv(cells: &[CellSummary]) -> String {
    let mut w = writer();
    row(&mut w, &with_head(&["ordering", "position", "node", "mean", "std"]));
    for c in cells {
        let by_node = &c.aggregate.per_node_delivery;
        let values = by_node.iter().map(|(&v, ms)| (v, ms.mean)).collect();
        for (ord, pos, node, _) in orderings(values) {
            let mut f = summary_key(c);
            f.extend([s(ord), s(pos), s(node)]);
            push_ms(&mut f, &by_node[&node]);
            row(&mut w, &f);
        }
    }
    finish(w)
}

pub fn summary_accumulative_csv(cells: &[CellSummary]) -> String {
    let mut w = writer();
    row(&mut w, &with_head(&["hop", "mean", "std"]));
    for c in cells {
        for (h, ms) in c.aggregate.accumulative_receivers.iter().enumerate() {
            let mut f = summary_key(c);
            f.push(s(h));
            push_ms(&mut f, ms);
            row(&mut w, &f);
        }
    }
    finish(w)
}

pub fn summary_final_csv(cells: &[CellSummary]) -> String {
    let mut w = writer();
    row(&mut w, &with_head(&["mean", "std"]));
    for c in cells {
        let mut f = summary_key(c);
        push_ms(&mut f, &c.aggregate.final_fraction);
        row(&mut w, &f);
    }
    finish(w)
}

/// `cell,<param>...,config_hash`, one row per cell.
pub fn cells_csv(params: &[String], cells: &[(Vec<serde_json::Value>, String)]) -> String {
    let mut w = writer();
    let mut head = vec![s("cell")];
    head.extend(params.iter().cloned());
    head.push(s("config_hash"));
    row(&mut w, &head);
    for (i, (values, hash)) in cells.iter().enumerate() {
        let mut f = vec![s(i)];
        f.extend(values.iter().map(|v| match v {
            serde_json::Value::String(x) => x.clone(),
            other => other.to_string(),
        }));
        f.push(hash.clone());
        row(&mut w, &f);
    }
    finish(w)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| SimError::io(&path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))
}

/// Writes the three per-run CSVs and returns their names.
pub fn write_run_files(dir: &Path, records: &[RunRecord]) -> Result<Vec<String>> {
    ensure_dir(dir)?;
    write_file(dir, DELIVERY_CSV, &delivery_csv(records))?;
    write_file(dir, ACCUMULATIVE_CSV, &accumulative_csv(records))?;
    write_file(dir, RUNS_CSV, &runs_csv(records))?;
    Ok(vec![s(DELIVERY_CSV), s(ACCUMULATIVE_CSV), s(RUNS_CSV)])
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    write_file(dir, MANIFEST, &text)
}

pub const TRACE_LOG: &str = "trace.log";
pub const TOPOLOGY_TXT: &str = "topology.txt";

/// Runs `config` with `seed` and writes the per-run CSVs and manifest into
/// `dir`, plus `trace.log` and `topology.txt` when `emit_trace` is set.
pub fn run_to_dir(config: &ScenarioConfig, seed: u64, dir: &Path, emit_trace: bool) -> Result<RunRecord> {
    let topology = build_topology(config, seed)?;
    let trace = run_on_topology(config, &topology, seed)?;
    let record = RunRecord::from_trace(0, &trace)?;
    let mut files = write_run_files(dir, std::slice::from_ref(&record))?;
    if emit_trace {
        write_file(dir, TRACE_LOG, &trace.to_log())?;
        write_file(dir, TOPOLOGY_TXT, &topology.to_text())?;
        files.extend([s(TRACE_LOG), s(TOPOLOGY_TXT)]);
    }
    write_manifest(dir, &Manifest::new(config.hash(), vec![seed], 1, files))?;
    Ok(record)
}

/// Recomputes the per-run CSVs from a saved trace log.
pub fn replay_to_dir(log: &str, dir: &Path) -> Result<RunRecord> {
    let trace = SimTrace::from_log(log)?;
    let record = RunRecord::from_trace(0, &trace)?;
    write_run_files(dir, std::slice::from_ref(&record))?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn record() -> RunRecord {
        RunRecord {
            cell: 0,
            report: MetricsReport {
                strategy: "surf".into(),
                channels: 5,
                nodes: 4,
                seed: 7,
                ttl: 2,
                per_node_delivery: BTreeMap::from([(1, 0.0), (2, 1.0), (3, 1.0)]),
                accumulative_receivers: vec![0.0, 1.0, 2.0],
            },
            slots: 30,
            truncated: false,
        }
    }

    #[test]
    fn delivery_has_both_orderings() {
        let text = delivery_csv(&[record()]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "strategy,channels,nodes,seed,cell,ordering,position,node,delivery_ratio");
        assert_eq!(lines[1], "surf,5,4,7,0,raw,0,1,0");
        assert_eq!(lines[4], "surf,5,4,7,0,sorted,0,2,1");
        assert_eq!(lines[6], "surf,5,4,7,0,sorted,2,1,0");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn accumulative_and_runs_rows() {
        let acc = accumulative_csv(&[record()]);
        assert_eq!(acc.lines().nth(3), Some("surf,5,4,7,0,2,2"));
        let runs = runs_csv(&[record()]);
        assert_eq!(runs.lines().nth(1), Some("surf,5,4,7,0,2,30,0,2,0.6666666666666666,0.6666666666666666"));
    }

    #[test]
    fn cells_table_unquotes_strings() {
        let text = cells_csv(
            &["strategy".into(), "channel_count".into()],
            &[(vec![serde_json::json!("rd"), serde_json::json!(5)], "ab".into())],
        );
        assert_eq!(text, "cell,strategy,channel_count,config_hash\n0,rd,5,ab\n");
    }
}
