//! Scenario configuration: JSON in, validated [`ScenarioConfig`] out.
//!
//! Unknown keys are rejected. Every omitted key takes the default listed on
//! its field; `surf.n_ref` and `warmup_slots` default to values derived from
//! other keys and are filled in by [`parse_and_validate`].

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::MAX_CHANNELS;
use crate::error::{Result, SimError};
use crate::spectrum::{EstimationMode, PrActivityModel, Transition};
use crate::strategy::{default_n_ref, StrategyKind, SurfParams};
use crate::topology::Position;

pub const SCHEMA_VERSION: u32 = 1;

/// PR activity: exactly one of `total_load`, `occupancy` or `channels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrConfig {
    /// Aggregate demand `L` in `[0, channel_count]`, split evenly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_load: Option<f64>,
    /// Per-channel stationary occupancy, i.e. `L / channel_count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupancy: Option<f64>,
    /// `p_on + p_off` of each chain when built from a load. Default 0.3.
    #[serde(default = "default_switch_rate")]
    pub switch_rate: f64,
    /// Explicit per-channel transition probabilities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<Transition>>,
}

fn default_switch_rate() -> f64 {
    0.3
}

impl Default for PrConfig {
    fn default() -> Self {
        Self {
            total_load: None,
            occupancy: Some(0.3),
            switch_rate: default_switch_rate(),
            channels: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfConfig {
    /// Contention scale; defaults to `N * pi * r^2` (at least 2).
    #[serde(default, alias = "N_ref", skip_serializing_if = "Option::is_none")]
    pub n_ref: Option<u32>,
    #[serde(default = "default_weight_floor")]
    pub weight_floor: f64,
}

fn default_weight_floor() -> f64 {
    1e-9
}

impl Default for SurfConfig {
    fn default() -> Self {
        Self {
            n_ref: None,
            weight_floor: default_weight_floor(),
        }
    }
}

/// How a CA node listens when it has nothing to send.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaReceiver {
    /// On every channel of its assigned set at once (multi-radio).
    All,
    /// On one uniformly random member of its set, redrawn each slot.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaConfig {
    /// Size `k` of every node's assigned channel set; defaults to
    /// `min(4, channel_count)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_size: Option<usize>,
    #[serde(default = "default_ca_receiver")]
    pub receiver: CaReceiver,
}

pub const DEFAULT_CA_SET_SIZE: usize = 4;

fn default_ca_receiver() -> CaReceiver {
    CaReceiver::All
}

impl Default for CaConfig {
    fn default() -> Self {
        Self {
            set_size: None,
            receiver: default_ca_receiver(),
        }
    }
}

/// How an SB node listens when it has nothing to send.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SbReceiver {
    /// On a uniformly random PR-free channel, redrawn each slot.
    Random,
    /// On the lowest-id PR-free channel.
    Lowest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbConfig {
    #[serde(default = "default_sb_receiver")]
    pub receiver: SbReceiver,
}

fn default_sb_receiver() -> SbReceiver {
    SbReceiver::Random
}

impl Default for SbConfig {
    fn default() -> Self {
        Self {
            receiver: default_sb_receiver(),
        }
    }
}

/// Which messages are injected and when. Message `k` of origin `i` gets id
/// `k * origins.len() + i` and originates at `warmup_slots + k * interval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessagePlan {
    #[serde(default = "default_origins")]
    pub origins: Vec<usize>,
    /// Messages per origin.
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default = "default_interval")]
    pub interval: u64,
}

fn default_origins() -> Vec<usize> {
    vec![0]
}

fn one() -> usize {
    1
}

fn default_interval() -> u64 {
    10
}

impl Default for MessagePlan {
    fn default() -> Self {
        Self {
            origins: default_origins(),
            count: 1,
            interval: default_interval(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(alias = "N")]
    pub node_count: usize,
    #[serde(alias = "Ch")]
    pub channel_count: usize,
    #[serde(default)]
    pub pr: PrConfig,
    /// Communication range on the unit square.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Fixed node positions; random uniform placement when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
    pub strategy: StrategyKind,
    #[serde(default)]
    pub surf: SurfConfig,
    #[serde(default)]
    pub sb: SbConfig,
    #[serde(default)]
    pub ca: CaConfig,
    #[serde(default = "default_ttl")]
    pub ttl: u32,
    /// Observation window `W` in slots.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Rebroadcast jitter bound `d_max`.
    #[serde(default = "default_jitter")]
    pub jitter_max: u32,
    #[serde(default = "default_max_slots")]
    pub max_slots: u64,
    /// Slots of idle channel selection before the first message; defaults to `window`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup_slots: Option<u64>,
    #[serde(default)]
    pub messages: MessagePlan,
    #[serde(default)]
    pub estimation: EstimationMode,
    /// Saturated background transmitters pinned to the first origin's channel.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub competitors: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}
fn default_radius() -> f64 {
    0.25
}
fn default_ttl() -> u32 {
    8
}
fn default_window() -> usize {
    20
}
fn default_jitter() -> u32 {
    4
}
fn default_max_slots() -> u64 {
    500
}

impl ScenarioConfig {
    /// A config with every default applied.
    pub fn new(node_count: usize, channel_count: usize, strategy: StrategyKind) -> Result<Self> {
        let v = serde_json::json!({
            "node_count": node_count,
            "channel_count": channel_count,
            "strategy": strategy,
        });
        from_value(v)
    }

    pub fn surf_params(&self) -> SurfParams {
        SurfParams {
            n_ref: self.surf.n_ref.unwrap_or_else(|| default_n_ref(self.node_count, self.radius)),
            weight_floor: self.surf.weight_floor,
        }
    }

    pub fn ca_set_size(&self) -> usize {
        self.ca
            .set_size
            .unwrap_or_else(|| DEFAULT_CA_SET_SIZE.min(self.channel_count))
    }

    pub fn warmup(&self) -> u64 {
        self.warmup_slots.unwrap_or(self.window as u64)
    }

    pub fn pr_model(&self) -> Result<PrActivityModel> {
        let pr = &self.pr;
        if let Some(chs) = &pr.channels {
            if pr.total_load.is_some() || pr.occupancy.is_some() {
                return Err(SimError::config(
                    "pr",
                    "specify exactly one of total_load, occupancy, channels",
                ));
            }
            if chs.len() != self.channel_count {
                return Err(SimError::config(
                    "pr.channels",
                    format!("expected {} entries, got {}", self.channel_count, chs.len()),
                ));
            }
            return PrActivityModel::new(chs.clone());
        }
        let load = match (pr.total_load, pr.occupancy) {
            (Some(l), None) => l,
            (None, Some(o)) => {
                if !(0.0..=1.0).contains(&o) {
                    return Err(SimError::config("pr.occupancy", "must lie in [0, 1]"));
                }
                o * self.channel_count as f64
            }
            _ => {
                return Err(SimError::config(
                    "pr",
                    "specify exactly one of total_load, occupancy, channels",
                ))
            }
        };
        PrActivityModel::from_total_load(self.channel_count, load, pr.switch_rate)
    }

    /// Slot at which the last planned message originates.
    pub fn last_origination(&self) -> u64 {
        self.warmup() + (self.messages.count.saturating_sub(1) as u64) * self.messages.interval
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical (compact, fully defaulted) JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    fn validate(mut self) -> Result<Self> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SimError::config(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.node_count < 1 {
            return Err(SimError::config("node_count", "must be at least 1"));
        }
        if self.channel_count < 1 || self.channel_count > MAX_CHANNELS {
            return Err(SimError::config(
                "channel_count",
                format!("must lie in 1..={MAX_CHANNELS}"),
            ));
        }
        if let (Some(l), None, None) = (self.pr.total_load, self.pr.occupancy, &self.pr.channels) {
            if !(0.0..=self.channel_count as f64).contains(&l) {
                return Err(SimError::config(
                    "pr.total_load",
                    format!("must lie in [0, {}]", self.channel_count),
                ));
            }
        }
        self.pr_model()?;
        if !(self.radius > 0.0 && self.radius <= std::f64::consts::SQRT_2) {
            return Err(SimError::config("radius", "must lie in (0, sqrt(2)]"));
        }
        if let Some(p) = &self.positions {
            if p.len() != self.node_count {
                return Err(SimError::config(
                    "positions",
                    format!("expected {} positions, got {}", self.node_count, p.len()),
                ));
            }
            if p.iter().flatten().any(|v| !v.is_finite()) {
                return Err(SimError::config("positions", "coordinates must be finite"));
            }
        }
        if self.surf.n_ref == Some(0) {
            return Err(SimError::config("surf.n_ref", "must be at least 1"));
        }
        SurfParams::new(self.surf_params().n_ref, self.surf.weight_floor)?;
        self.surf.n_ref = Some(self.surf_params().n_ref);
        let k = self.ca_set_size();
        if k < 1 || k > self.channel_count {
            return Err(SimError::config(
                "ca.set_size",
                format!("must lie in 1..={}", self.channel_count),
            ));
        }
        self.ca.set_size = Some(k);
        if self.window < 1 {
            return Err(SimError::config("window", "must be at least 1"));
        }
        if self.jitter_max < 1 {
            return Err(SimError::config("jitter_max", "must be at least 1"));
        }
        if self.max_slots < 1 {
            return Err(SimError::config("max_slots", "must be at least 1"));
        }
        self.warmup_slots = Some(self.warmup());
        let plan = &self.messages;
        if plan.origins.is_empty() {
            return Err(SimError::config("messages.origins", "at least one origin is required"));
        }
        if let Some(o) = plan.origins.iter().find(|&&o| o >= self.node_count) {
            return Err(SimError::config(
                "messages.origins",
                format!("node {o} out of range 0..{}", self.node_count),
            ));
        }
        if plan.count < 1 {
            return Err(SimError::config("messages.count", "must be at least 1"));
        }
        if plan.count > 1 && plan.interval < 1 {
            return Err(SimError::config("messages.interval", "must be at least 1"));
        }
        if self.last_origination() >= self.max_slots {
            return Err(SimError::config(
                "max_slots",
                "must exceed the last message origination slot",
            ));
        }
        for &c in &self.competitors {
            if c >= self.node_count {
                return Err(SimError::config(
                    "competitors",
                    format!("node {c} out of range 0..{}", self.node_count),
                ));
            }
            if plan.origins.contains(&c) {
                return Err(SimError::config("competitors", format!("node {c} is also an origin")));
            }
        }
        let mut sorted = self.competitors.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.competitors.len() {
            return Err(SimError::config("competitors", "duplicate node id"));
        }
        self.competitors = sorted;
        Ok(self)
    }

    pub fn positions(&self) -> Option<Vec<Position>> {
        self.positions
            .as_ref()
            .map(|p| p.iter().map(|&[x, y]| Position::new(x, y)).collect())
    }
}

fn from_value(v: serde_json::Value) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let key = if path == "." { "<root>".to_string() } else { path };
        SimError::config(key, e.into_inner().to_string())
    })?;
    cfg.validate()
}

/// Parses a JSON document, fills defaults and checks every range.
pub fn parse_and_validate(text: &str) -> Result<ScenarioConfig> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| SimError::config("<root>", e.to_string()))?;
    from_value(v)
}

/// Like [`parse_and_validate`] but for an already-parsed JSON value.
pub fn validate_value(v: serde_json::Value) -> Result<ScenarioConfig> {
    from_value(v)
}
