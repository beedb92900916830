//! Evaluation metrics, all computed from a [`SimTrace`] alone.

use std::collections::BTreeMap;

use rand::Rng;

use crate::config::ScenarioConfig;
use crate::engine::run_dissemination;
use crate::engine::trace::SimTrace;
use crate::error::{Result, SimError};
use crate::rng;
use crate::topology::Position;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub strategy: String,
    pub channels: usize,
    pub nodes: usize,
    pub seed: u64,
    pub ttl: u32,
    /// Delivery ratio of every node that is neither an origin nor a competitor.
    pub per_node_delivery: BTreeMap<usize, f64>,
    /// Entry `h`: distinct receivers reached within `h` hops, averaged over messages.
    pub accumulative_receivers: Vec<f64>,
}

impl MetricsReport {
    pub fn from_trace(trace: &SimTrace) -> Result<Self> {
        Ok(Self {
            strategy: trace.meta.strategy.clone(),
            channels: trace.meta.channels,
            nodes: trace.meta.nodes,
            seed: trace.meta.seed,
            ttl: trace.meta.ttl,
            per_node_delivery: delivery_ratio(trace)?,
            accumulative_receivers: accumulative_receivers(trace),
        })
    }

    /// Receivers reached by the end of the run (last hop entry).
    pub fn final_receivers(&self) -> f64 {
        self.accumulative_receivers.last().copied().unwrap_or(0.0)
    }

    pub fn final_fraction(&self) -> f64 {
        if self.nodes <= 1 {
            return 0.0;
        }
        self.final_receivers() / (self.nodes - 1) as f64
    }

    pub fn mean_delivery(&self) -> f64 {
        if self.per_node_delivery.is_empty() {
            return 0.0;
        }
        self.per_node_delivery.values().sum::<f64>() / self.per_node_delivery.len() as f64
    }
}

/// Per node (excluding origins and competitors): distinct messages received
/// over distinct messages originated network-wide.
pub fn delivery_ratio(trace: &SimTrace) -> Result<BTreeMap<usize, f64>> {
    let total = trace.meta.origins.len();
    if total == 0 {
        return Err(SimError::UndefinedRatio);
    }
    let mut received = vec![0usize; trace.meta.nodes];
    for (_, r) in trace.receptions() {
        received[r.node] += 1;
    }
    Ok((0..trace.meta.nodes)
        .filter(|&v| !trace.is_origin(v) && !trace.is_competitor(v))
        .map(|v| (v, received[v] as f64 / total as f64))
        .collect())
}

/// Entry `h` (for `h` in `0..=ttl`) is the number of distinct nodes whose
/// first reception happened at hop `<= h`, averaged over all originated
/// messages. Hop is `initial_ttl - carried_ttl`.
pub fn accumulative_receivers(trace: &SimTrace) -> Vec<f64> {
    let len = trace.meta.ttl as usize + 1;
    let messages = trace.meta.origins.len();
    let mut per_hop = vec![0usize; len];
    for (_, r) in trace.receptions() {
        per_hop[(r.hop as usize).min(len - 1)] += 1;
    }
    let mut acc = 0usize;
    per_hop
        .into_iter()
        .map(|c| {
            acc += c;
            if messages == 0 {
                0.0
            } else {
                acc as f64 / messages as f64
            }
        })
        .collect()
}

/// Fraction of recorded slots each channel spent under PR activity.
pub fn measured_occupancy(trace: &SimTrace) -> Vec<f64> {
    let slots = trace.slots.len().max(1) as f64;
    (0..trace.meta.channels)
        .map(|c| trace.slots.iter().filter(|s| s.pr.is_on(c)).count() as f64 / slots)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Arithmetic mean and sample standard deviation (0 for a single value).
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: 0.0, std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub strategy: String,
    pub channels: usize,
    pub nodes: usize,
    pub ttl: u32,
    pub count: usize,
    pub per_node_delivery: BTreeMap<usize, MeanStd>,
    pub accumulative_receivers: Vec<MeanStd>,
    pub final_fraction: MeanStd,
}

/// Elementwise mean and sample standard deviation across runs that share
/// strategy, channel count, node count and TTL.
pub fn aggregate_runs(reports: &[MetricsReport]) -> Result<AggregateReport> {
    let first = reports
        .first()
        .ok_or_else(|| SimError::Aggregation("no reports".into()))?;
    for r in reports {
        if (r.strategy.as_str(), r.channels, r.nodes, r.ttl)
            != (first.strategy.as_str(), first.channels, first.nodes, first.ttl)
        {
            return Err(SimError::Aggregation(format!(
                "({}, Ch={}, N={}, TTL={}) differs from ({}, Ch={}, N={}, TTL={})",
                r.strategy, r.channels, r.nodes, r.ttl, first.strategy, first.channels, first.nodes, first.ttl
            )));
        }
        if r.per_node_delivery.len() != first.per_node_delivery.len()
            || r.per_node_delivery.keys().ne(first.per_node_delivery.keys())
        {
            return Err(SimError::Aggregation("reports cover different node sets".into()));
        }
    }
    let per_node_delivery = first
        .per_node_delivery
        .keys()
        .map(|&v| {
            let vals: Vec<f64> = reports.iter().map(|r| r.per_node_delivery[&v]).collect();
            (v, MeanStd::of(&vals))
        })
        .collect();
    let accumulative_receivers = (0..first.accumulative_receivers.len())
        .map(|h| {
            let vals: Vec<f64> = reports.iter().map(|r| r.accumulative_receivers[h]).collect();
            MeanStd::of(&vals)
        })
        .collect();
    let finals: Vec<f64> = reports.iter().map(MetricsReport::final_fraction).collect();
    Ok(AggregateReport {
        strategy: first.strategy.clone(),
        channels: first.channels,
        nodes: first.nodes,
        ttl: first.ttl,
        count: reports.len(),
        per_node_delivery,
        accumulative_receivers,
        final_fraction: MeanStd::of(&finals),
    })
}

/// One row of a contention curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentionPoint {
    pub competitors: usize,
    pub mean_delivery: f64,
    pub std_delivery: f64,
}

/// Builds the single-hop contention scenario: node 0 is the source, nodes
/// `1..N` its receivers, followed by `competitors` saturated interferers. All
/// nodes sit in a disc of radius `r / 2` around the square's center, so
/// everyone hears everyone. Relaying is disabled (TTL 1).
pub fn contention_scenario(base: &ScenarioConfig, competitors: usize, seed: u64) -> Result<ScenarioConfig> {
    let receivers = base.node_count.saturating_sub(1);
    let total = 1 + receivers + competitors;
    let mut r = rng::stream(seed, rng::TOPOLOGY, 1);
    let half = base.radius / 2.0;
    let mut positions = vec![[0.5, 0.5]];
    while positions.len() < total {
        let (dx, dy) = (r.gen_range(-half..=half), r.gen_range(-half..=half));
        if Position::new(dx, dy).distance(&Position::new(0.0, 0.0)) <= half {
            positions.push([0.5 + dx, 0.5 + dy]);
        }
    }
    let mut cfg = base.clone();
    cfg.node_count = total;
    cfg.positions = Some(positions);
    cfg.ttl = 1;
    cfg.messages.origins = vec![0];
    cfg.competitors = (1 + receivers..total).collect();
    cfg.surf.n_ref = None;
    let v = serde_json::to_value(&cfg).expect("config serializes");
    crate::config::validate_value(v)
}

/// Mean delivery ratio at the source's receivers for each competitor count,
/// averaged over `seeds`. Rows follow the order of `competitor_counts`
/// sorted ascending.
pub fn contention_curve(
    base: &ScenarioConfig,
    competitor_counts: &[usize],
    seeds: &[u64],
) -> Result<Vec<ContentionPoint>> {
    if seeds.is_empty() {
        return Err(SimError::config("seeds", "at least one seed is required"));
    }
    let mut counts = competitor_counts.to_vec();
    counts.sort_unstable();
    counts.dedup();
    counts
        .into_iter()
        .map(|k| {
            let ratios = seeds
                .iter()
                .map(|&s| {
                    let cfg = contention_scenario(base, k, s)?;
                    let trace = run_dissemination(&cfg, s)?;
                    let report = MetricsReport::from_trace(&trace)?;
                    Ok(report.mean_delivery())
                })
                .collect::<Result<Vec<f64>>>()?;
            let ms = MeanStd::of(&ratios);
            Ok(ContentionPoint {
                competitors: k,
                mean_delivery: ms.mean,
                std_delivery: ms.std,
            })
        })
        .collect()
}
