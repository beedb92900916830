//! Primary-radio (PR) channel occupancy and the per-node channel observations
//! derived from it.
//!
//! PR activity on every channel is an independent two-state ON/OFF Markov
//! chain. Activity is global per channel: every CR node sees the same
//! [`ChannelState`] in a given slot, and sensing is perfect.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelMask, MAX_CHANNELS};
use crate::engine::trace::{Outcome, SlotRecord};
use crate::error::{Result, SimError};
use crate::topology::Topology;

/// Per-slot transition probabilities of one channel's ON/OFF chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Probability per slot of OFF -> ON.
    pub p_on: f64,
    /// Probability per slot of ON -> OFF.
    pub p_off: f64,
}

impl Transition {
    pub fn stationary(&self) -> Result<f64> {
        stationary_occupancy(self.p_on, self.p_off)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrActivityModel {
    channels: Vec<Transition>,
    total_load: f64,
}

impl PrActivityModel {
    pub fn new(channels: Vec<Transition>) -> Result<Self> {
        if channels.is_empty() || channels.len() > MAX_CHANNELS {
            return Err(SimError::config(
                "pr.channels",
                format!("channel count must be in 1..={MAX_CHANNELS}"),
            ));
        }
        let mut total_load = 0.0;
        for (i, t) in channels.iter().enumerate() {
            let ok = |p: f64| (0.0..=1.0).contains(&p);
            if !ok(t.p_on) || !ok(t.p_off) {
                return Err(SimError::config(
                    format!("pr.channels[{i}]"),
                    "transition probabilities must lie in [0, 1]",
                ));
            }
            total_load += t.stationary().map_err(|_| {
                SimError::config(format!("pr.channels[{i}]"), "p_on + p_off must be positive")
            })?;
        }
        Ok(Self {
            channels,
            total_load,
        })
    }

    /// Splits an aggregate load `L` evenly so that each of the `channel_count`
    /// chains has stationary occupancy `L / channel_count`. `switch_rate` is
    /// `p_on + p_off`, which sets how fast the chains mix.
    pub fn from_total_load(channel_count: usize, total_load: f64, switch_rate: f64) -> Result<Self> {
        if channel_count == 0 || channel_count > MAX_CHANNELS {
            return Err(SimError::config(
                "channel_count",
                format!("must be in 1..={MAX_CHANNELS}"),
            ));
        }
        if !(0.0..=channel_count as f64).contains(&total_load) {
            return Err(SimError::config(
                "pr.total_load",
                format!("must lie in [0, {channel_count}]"),
            ));
        }
        if !(switch_rate > 0.0 && switch_rate <= 1.0) {
            return Err(SimError::config("pr.switch_rate", "must lie in (0, 1]"));
        }
        let occupancy = total_load / channel_count as f64;
        let t = Transition {
            p_on: switch_rate * occupancy,
            p_off: switch_rate * (1.0 - occupancy),
        };
        Ok(Self {
            channels: vec![t; channel_count],
            total_load,
        })
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn total_load(&self) -> f64 {
        self.total_load
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.channels
    }

    /// Stationary occupancy of every channel.
    pub fn occupancies(&self) -> Vec<f64> {
        self.channels
            .iter()
            .map(|t| t.p_on / (t.p_on + t.p_off))
            .collect()
    }

    /// Draws an initial state from the stationary distribution.
    pub fn initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelState {
        let mut mask = ChannelMask::EMPTY;
        for (c, t) in self.channels.iter().enumerate() {
            let occ = t.p_on / (t.p_on + t.p_off);
            if rng.gen::<f64>() < occ {
                mask.insert(c);
            }
        }
        ChannelState::from_mask(self.channels.len(), mask)
    }
}

/// Which channels are held by PR activity in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelState {
    len: usize,
    on: ChannelMask,
}

impl ChannelState {
    pub fn all_off(channel_count: usize) -> Self {
        Self {
            len: channel_count,
            on: ChannelMask::EMPTY,
        }
    }

    pub fn all_on(channel_count: usize) -> Self {
        Self {
            len: channel_count,
            on: ChannelMask::all(channel_count),
        }
    }

    pub fn from_mask(channel_count: usize, on: ChannelMask) -> Self {
        Self {
            len: channel_count,
            on: on.intersection(ChannelMask::all(channel_count)),
        }
    }

    pub fn from_flags(flags: &[bool]) -> Self {
        let on = flags
            .iter()
            .enumerate()
            .filter_map(|(c, &f)| f.then_some(c))
            .collect();
        Self {
            len: flags.len(),
            on,
        }
    }

    pub fn channel_count(&self) -> usize {
        self.len
    }

    pub fn is_on(&self, channel: usize) -> bool {
        self.on.contains(channel)
    }

    pub fn on_mask(&self) -> ChannelMask {
        self.on
    }

    /// Channels free of PR activity.
    pub fn free_mask(&self) -> ChannelMask {
        ChannelMask::from_bits(ChannelMask::all(self.len).bits() & !self.on.bits())
    }
}

/// Advances every channel one slot. Channels draw in ascending order, one
/// uniform variate each.
pub fn step_pr_activity<R: Rng + ?Sized>(
    model: &PrActivityModel,
    prev: &ChannelState,
    rng: &mut R,
) -> Result<ChannelState> {
    if prev.len != model.channel_count() {
        return Err(SimError::config(
            "channel_count",
            format!(
                "model has {} channels but state has {}",
                model.channel_count(),
                prev.len
            ),
        ));
    }
    let mut next = *prev;
    for (c, t) in model.channels.iter().enumerate() {
        let u: f64 = rng.gen();
        if prev.is_on(c) {
            if u < t.p_off {
                next.on.remove(c);
            }
        } else if u < t.p_on {
            next.on.insert(c);
        }
    }
    Ok(next)
}

/// Long-run fraction of slots a two-state chain spends ON.
pub fn stationary_occupancy(p_on: f64, p_off: f64) -> Result<f64> {
    if p_on + p_off <= 0.0 {
        return Err(SimError::DegenerateChain);
    }
    Ok(p_on / (p_on + p_off))
}

/// Fraction of slots in `history` during which `channel` was ON.
pub fn observe_pr_occupancy(history: &[ChannelState], channel: usize) -> Result<f64> {
    if history.is_empty() {
        return Err(SimError::InsufficientHistory);
    }
    let on = history.iter().filter(|s| s.is_on(channel)).count();
    Ok(on as f64 / history.len() as f64)
}

/// One node's view of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelObservation {
    pub channel: usize,
    /// Estimated PR occupancy fraction.
    pub o_pr: f64,
    /// Estimated number of active CR neighbors on the channel.
    pub n_cr: usize,
    /// Attractiveness assigned by the selection strategy.
    pub weight: f64,
}

impl ChannelObservation {
    pub fn new(channel: usize, o_pr: f64, n_cr: usize) -> Self {
        Self {
            channel,
            o_pr: o_pr.clamp(0.0, 1.0),
            n_cr,
            weight: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimationMode {
    /// Ground truth: neighbors that transmitted or listened on the channel.
    #[default]
    Oracle,
    /// Neighbors whose transmissions on the channel were cleanly overheard.
    Sampled,
}

/// Counts distinct in-range CR nodes active on `channel` across `window`.
pub fn estimate_cr_count(
    topology: &Topology,
    window: &[SlotRecord],
    node: usize,
    channel: usize,
    channel_count: usize,
    mode: EstimationMode,
) -> Result<usize> {
    if window.is_empty() {
        return Err(SimError::InsufficientHistory);
    }
    if channel >= channel_count {
        return Err(SimError::config(
            "channel",
            format!("channel {channel} out of range 0..{channel_count}"),
        ));
    }
    let neighbors = topology.neighbors(node)?;
    let mut seen = vec![false; topology.node_count()];
    for slot in window {
        match mode {
            EstimationMode::Oracle => {
                for &v in neighbors {
                    if let Some(d) = slot.decisions.get(v) {
                        if d.tuned.contains(channel) {
                            seen[v] = true;
                        }
                    }
                }
            }
            EstimationMode::Sampled => {
                for tx in &slot.transmissions {
                    if tx.channel != channel || !topology.adjacent(node, tx.node) {
                        continue;
                    }
                    if let Outcome::Delivered(to) = &tx.outcome {
                        if to.contains(&node) {
                            seen[tx.node] = true;
                        }
                    }
                }
            }
        }
    }
    Ok(seen.iter().filter(|&&s| s).count())
}
