//! Parameter sweeps: the cross product of dotted-key overrides applied to a
//! base config, each cell run over a list of seeds.
//!
//! A sweep spec is JSON:
//!
//! ```json
//! {
//!   "parameters": { "channel_count": [5, 15], "strategy": ["surf", "rd"] },
//!   "seeds": { "start": 1, "count": 30 }
//! }
//! ```
//!
//! `seeds` may also be an explicit list. Parameter keys are dotted paths into
//! the config (`pr.total_load`, `ca.set_size`); cells enumerate the cross
//! product with the lexicographically first key outermost. Runs execute on
//! up to `workers` threads, but results are collected and written in
//! (cell, seed) order, so output does not depend on the worker count.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::config::{validate_value, ScenarioConfig};
use crate::engine::run_dissemination;
use crate::error::{Result, SimError};
use crate::metrics::aggregate_runs;
use crate::output::{self, CellSummary, Manifest, RunRecord};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range { start: u64, count: u64 },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Range { start, count } => (*start..start + count).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub parameters: BTreeMap<String, Vec<Value>>,
    /// Defaults to the base config's own `seed`.
    #[serde(default)]
    pub seeds: Option<SeedSpec>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SimError::config("sweep", e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub values: Vec<Value>,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub params: Vec<String>,
    pub cells: Vec<Cell>,
    pub seeds: Vec<u64>,
    pub base_hash: String,
}

fn canonical_key(key: &str) -> &str {
    match key {
        "N" => "node_count",
        "Ch" => "channel_count",
        "N_ref" => "n_ref",
        other => other,
    }
}

/// Renames alias keys to their canonical names so overrides and base agree.
fn normalize(v: &mut Value) {
    if let Value::Object(map) = v {
        let old = std::mem::take(map);
        for (k, mut child) in old {
            normalize(&mut child);
            map.insert(canonical_key(&k).to_string(), child);
        }
    }
}

/// Sets `path` (dot-separated) in `v`, creating intermediate objects.
pub fn apply_override(v: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = v;
    let parts: Vec<&str> = path.split('.').map(canonical_key).collect();
    let (last, prefix) = parts.split_last().expect("split yields one part");
    for p in prefix {
        let map = cur
            .as_object_mut()
            .ok_or_else(|| SimError::config(path, "parent is not an object"))?;
        cur = map.entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    cur.as_object_mut()
        .ok_or_else(|| SimError::config(path, "parent is not an object"))?
        .insert(last.to_string(), value);
    Ok(())
}

/// Expands the cross product and validates every cell.
pub fn plan(base_text: &str, spec: &SweepSpec) -> Result<SweepPlan> {
    let mut base: Value =
        serde_json::from_str(base_text).map_err(|e| SimError::config("<root>", e.to_string()))?;
    normalize(&mut base);
    let base_cfg = validate_value(base.clone())?;
    let params: Vec<String> = spec.parameters.keys().cloned().collect();
    if let Some((k, _)) = spec.parameters.iter().find(|(_, vals)| vals.is_empty()) {
        return Err(SimError::config(k.as_str(), "sweep parameter has no values"));
    }
    let mut combos: Vec<Vec<Value>> = vec![Vec::new()];
    for vals in spec.parameters.values() {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                vals.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    let cells = combos
        .into_iter()
        .map(|values| {
            let mut v = base.clone();
            for (k, x) in params.iter().zip(&values) {
                apply_override(&mut v, k, x.clone())?;
            }
            Ok(Cell {
                values,
                config: validate_value(v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let seeds = spec
        .seeds
        .as_ref()
        .map_or_else(|| vec![base_cfg.seed], SeedSpec::seeds);
    if seeds.is_empty() {
        return Err(SimError::config("seeds", "at least one seed is required"));
    }
    Ok(SweepPlan {
        params,
        cells,
        seeds,
        base_hash: base_cfg.hash(),
    })
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// In (cell, seed) order.
    pub records: Vec<RunRecord>,
    pub summaries: Vec<CellSummary>,
    /// `(cell, seed, trace log)` when traces were requested.
    pub traces: Vec<(usize, u64, String)>,
}

/// Runs every (cell, seed) pair on a pool of `workers` threads. On failure
/// the error names the first failing run and the cells that completed.
pub fn execute(plan: &SweepPlan, workers: usize, keep_traces: bool) -> Result<SweepOutcome> {
    let jobs: Vec<(usize, u64)> = (0..plan.cells.len())
        .flat_map(|c| plan.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimError::config("workers", e.to_string()))?;
    let results: Vec<Result<(RunRecord, Option<String>)>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, seed)| {
                let trace = run_dissemination(&plan.cells[c].config, seed)?;
                let record = RunRecord::from_trace(c, &trace)?;
                Ok((record, keep_traces.then(|| trace.to_log())))
            })
            .collect()
    });

    let per_cell = plan.seeds.len();
    if let Some(i) = results.iter().position(Result::is_err) {
        let completed = (0..plan.cells.len())
            .filter(|&c| results[c * per_cell..(c + 1) * per_cell].iter().all(Result::is_ok))
            .collect();
        let (cell, seed) = jobs[i];
        let reason = results[i].as_ref().expect_err("position found an error").to_string();
        return Err(SimError::SweepAborted {
            cell,
            seed,
            reason,
            completed,
        });
    }

    let mut records = Vec::with_capacity(jobs.len());
    let mut traces = Vec::new();
    for (r, &(c, seed)) in results.into_iter().zip(&jobs) {
        let (record, log) = r.expect("errors handled above");
        records.push(record);
        if let Some(log) = log {
            traces.push((c, seed, log));
        }
    }
    let summaries = records
        .chunks(per_cell)
        .enumerate()
        .map(|(cell, chunk)| {
            let reports: Vec<_> = chunk.iter().map(|r| r.report.clone()).collect();
            Ok(CellSummary {
                cell,
                aggregate: aggregate_runs(&reports)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepOutcome {
        records,
        summaries,
        traces,
    })
}

pub fn trace_file_name(cell: usize, seed: u64) -> String {
    format!("cell{cell}_seed{seed}.log")
}

/// Writes per-run CSVs, the cell table, per-metric summaries, optional
/// traces under `traces/`, and the manifest.
pub fn write_outputs(dir: &Path, plan: &SweepPlan, outcome: &SweepOutcome) -> Result<()> {
    let mut files = output::write_run_files(dir, &outcome.records)?;
    let cells: Vec<(Vec<Value>, String)> = plan
        .cells
        .iter()
        .map(|c| (c.values.clone(), c.config.hash()))
        .collect();
    let summaries = &outcome.summaries;
    for (name, text) in [
        (output::CELLS_CSV, output::cells_csv(&plan.params, &cells)),
        (output::SUMMARY_DELIVERY_CSV, output::summary_delivery_csv(summaries)),
        (output::SUMMARY_ACCUMULATIVE_CSV, output::summary_accumulative_csv(summaries)),
        (output::SUMMARY_FINAL_CSV, output::summary_final_csv(summaries)),
    ] {
        output::write_file(dir, name, &text)?;
        files.push(name.to_string());
    }
    if !outcome.traces.is_empty() {
        let tdir = dir.join("traces");
        output::ensure_dir(&tdir)?;
        for (c, seed, log) in &outcome.traces {
            let name = trace_file_name(*c, *seed);
            output::write_file(&tdir, &name, log)?;
            files.push(format!("traces/{name}"));
        }
    }
    let manifest = Manifest::new(plan.base_hash.clone(), plan.seeds.clone(), plan.cells.len(), files);
    output::write_manifest(dir, &manifest)
}
