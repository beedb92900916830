//! Channel-selection policies: SURF, random (RD), selective broadcasting (SB)
//! and centralized assignment (CA).
//!
//! Every function here is a pure decision over its inputs plus the caller's
//! rng stream. The engine decides *when* each is invoked.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMask;
use crate::error::{Result, SimError};
use crate::spectrum::ChannelObservation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Surf,
    Rd,
    Sb,
    Ca,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Surf,
        StrategyKind::Rd,
        StrategyKind::Sb,
        StrategyKind::Ca,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Surf => "surf",
            StrategyKind::Rd => "rd",
            StrategyKind::Sb => "sb",
            StrategyKind::Ca => "ca",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "surf" => Ok(StrategyKind::Surf),
            "rd" => Ok(StrategyKind::Rd),
            "sb" => Ok(StrategyKind::Sb),
            "ca" => Ok(StrategyKind::Ca),
            other => Err(SimError::config("strategy", format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Transmit,
    Overhear,
}

/// What a node does in one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub role: Role,
    /// Single channel for SURF/RD, the ECS for SB, the Acs for CA.
    pub channels: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfParams {
    /// Contention scale: the utility vanishes at this many active CRs.
    pub n_ref: u32,
    /// Relative tolerance under which two weights count as tied.
    pub weight_floor: f64,
}

impl SurfParams {
    pub fn new(n_ref: u32, weight_floor: f64) -> Result<Self> {
        if n_ref < 1 {
            return Err(SimError::config("surf.n_ref", "must be at least 1"));
        }
        if !(weight_floor > 0.0 && weight_floor < 1.0) {
            return Err(SimError::config("surf.weight_floor", "must lie in (0, 1)"));
        }
        Ok(Self { n_ref, weight_floor })
    }
}

/// Expected number of CRs within range of a node: `N * pi * r^2`, at least 2.
pub fn default_n_ref(node_count: usize, radius: f64) -> u32 {
    let expected = node_count as f64 * std::f64::consts::PI * radius * radius;
    expected.round().max(2.0) as u32
}

/// A channel-weighting rule. SURF's is the default; alternatives plug in here.
pub trait ChannelWeight {
    fn weight(&self, obs: &ChannelObservation) -> f64;
}

impl ChannelWeight for SurfParams {
    fn weight(&self, obs: &ChannelObservation) -> f64 {
        surf_weight(obs, self)
    }
}

/// Contention utility `n * max(0, 1 - n / n_ref)`; unimodal with its peak at `n_ref / 2`.
pub fn contention_utility(n_cr: usize, n_ref: u32) -> f64 {
    let n = n_cr as f64;
    n * (1.0 - n / f64::from(n_ref)).max(0.0)
}

/// `(1 - o_pr) * u(n_cr)`: prefers channels with little PR activity and a
/// moderate number of active CRs.
pub fn surf_weight(obs: &ChannelObservation, params: &SurfParams) -> f64 {
    (1.0 - obs.o_pr).max(0.0) * contention_utility(obs.n_cr, params.n_ref)
}

fn pick_uniform<R: Rng + ?Sized>(candidates: &[usize], rng: &mut R) -> usize {
    if candidates.len() == 1 {
        candidates[0]
    } else {
        candidates[rng.gen_range(0..candidates.len())]
    }
}

/// Index of the largest weight, ties (within relative `tolerance`) broken
/// uniformly. When every weight is zero, falls back to the least PR-occupied
/// entry, again with random tie-breaking. The rng is only consumed when
/// there is more than one candidate.
pub fn select_by_weight<R: Rng + ?Sized>(
    weights: &[f64],
    occupancies: &[f64],
    tolerance: f64,
    rng: &mut R,
) -> Option<usize> {
    let best = weights.iter().copied().fold(0.0_f64, f64::max);
    let candidates: Vec<usize> = if best > 0.0 {
        let cut = best * (1.0 - tolerance);
        (0..weights.len()).filter(|&i| weights[i] >= cut).collect()
    } else {
        let least = occupancies.iter().copied().fold(f64::INFINITY, f64::min);
        (0..occupancies.len()).filter(|&i| occupancies[i] <= least).collect()
    };
    (!candidates.is_empty()).then(|| pick_uniform(&candidates, rng))
}

/// Picks a channel by maximizing `weigher` over the observations.
pub fn select_channel<W: ChannelWeight, R: Rng + ?Sized>(
    observations: &[ChannelObservation],
    weigher: &W,
    tolerance: f64,
    rng: &mut R,
) -> Result<usize> {
    if observations.is_empty() {
        return Err(SimError::config("observations", "at least one channel is required"));
    }
    let weights: Vec<f64> = observations.iter().map(|o| weigher.weight(o)).collect();
    let occupancies: Vec<f64> = observations.iter().map(|o| o.o_pr).collect();
    let i = select_by_weight(&weights, &occupancies, tolerance, rng)
        .expect("non-empty observations always yield a candidate");
    Ok(observations[i].channel)
}

pub fn select_channel_surf<R: Rng + ?Sized>(
    observations: &[ChannelObservation],
    params: &SurfParams,
    rng: &mut R,
) -> Result<usize> {
    select_channel(observations, params, params.weight_floor, rng)
}

pub fn select_channel_rd<R: Rng + ?Sized>(channel_count: usize, rng: &mut R) -> Result<usize> {
    if channel_count == 0 {
        return Err(SimError::config("channel_count", "must be at least 1"));
    }
    Ok(rng.gen_range(0..channel_count))
}

/// Essential channel set: a greedy cover of every neighbor's available
/// channels. Each round takes the channel covering the most still-uncovered
/// neighbors, lowest id on ties. Returned in selection order.
pub fn compute_ecs_sb(availability: &[(usize, ChannelMask)]) -> Result<Vec<usize>> {
    if let Some(&(neighbor, _)) = availability.iter().find(|(_, m)| m.is_empty()) {
        return Err(SimError::UncoverableNeighbor { neighbor });
    }
    let mut uncovered: Vec<ChannelMask> = availability.iter().map(|&(_, m)| m).collect();
    let mut ecs = Vec::new();
    while !uncovered.is_empty() {
        let union = uncovered
            .iter()
            .fold(ChannelMask::EMPTY, |acc, m| ChannelMask::from_bits(acc.bits() | m.bits()));
        let (best, _) = union
            .iter()
            .map(|c| (c, uncovered.iter().filter(|m| m.contains(c)).count()))
            .fold((usize::MAX, 0usize), |(bc, bn), (c, n)| if n > bn { (c, n) } else { (bc, bn) });
        ecs.push(best);
        uncovered.retain(|m| !m.contains(best));
    }
    Ok(ecs)
}

/// Centrally assigned channel sets, one per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaAssignment {
    sets: Vec<ChannelMask>,
    set_size: usize,
}

impl CaAssignment {
    pub fn set_size(&self) -> usize {
        self.set_size
    }

    pub fn channels(&self, node: usize) -> ChannelMask {
        self.sets[node]
    }

    pub fn node_count(&self) -> usize {
        self.sets.len()
    }
}

/// Gives every node an independent uniform `k`-subset of the channels.
pub fn assign_ca<R: Rng + ?Sized>(
    node_count: usize,
    channel_count: usize,
    k: usize,
    rng: &mut R,
) -> Result<CaAssignment> {
    if k < 1 || k > channel_count {
        return Err(SimError::config(
            "ca.set_size",
            format!("must lie in 1..={channel_count}"),
        ));
    }
    let sets = (0..node_count)
        .map(|_| index::sample(rng, channel_count, k).into_iter().collect())
        .collect();
    Ok(CaAssignment { sets, set_size: k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn obs(o_pr: f64, n_cr: usize) -> ChannelObservation {
        ChannelObservation::new(0, o_pr, n_cr)
    }

    #[test]
    fn surf_weight_examples() {
        let p = SurfParams::new(10, 1e-9).unwrap();
        assert_eq!(surf_weight(&obs(1.0, 5), &p), 0.0);
        assert_eq!(surf_weight(&obs(0.0, 0), &p), 0.0);
        assert!((surf_weight(&obs(0.2, 5), &p) - 2.0).abs() < 1e-12);
        assert_eq!(surf_weight(&obs(0.0, 10), &p), 0.0);
        assert_eq!(surf_weight(&obs(0.0, 14), &p), 0.0);
    }

    #[test]
    fn surf_params_reject_zero_scale() {
        assert!(matches!(SurfParams::new(0, 1e-9), Err(SimError::Config { key, .. }) if key == "surf.n_ref"));
    }

    #[test]
    fn unique_argmax_and_fallback() {
        let mut r = rng::stream(0, rng::DECISION, 0);
        assert_eq!(select_by_weight(&[0.1, 2.0, 0.5], &[0.0; 3], 1e-9, &mut r), Some(1));
        assert_eq!(select_by_weight(&[0.0; 3], &[0.9, 0.3, 0.7], 1e-9, &mut r), Some(1));
        assert_eq!(select_by_weight(&[], &[], 1e-9, &mut r), None);
    }

    #[test]
    fn surf_selection_uses_observations() {
        let p = SurfParams::new(10, 1e-9).unwrap();
        let o = [
            ChannelObservation::new(0, 0.5, 5),
            ChannelObservation::new(1, 0.1, 5),
            ChannelObservation::new(2, 0.1, 9),
        ];
        let mut r = rng::stream(1, rng::DECISION, 0);
        assert_eq!(select_channel_surf(&o, &p, &mut r).unwrap(), 1);
        assert!(select_channel_surf(&[], &p, &mut r).is_err());
    }

    #[test]
    fn exact_tie_is_fair() {
        let mut r = rng::stream(11, rng::DECISION, 0);
        let mut counts = [0usize; 3];
        for _ in 0..10_000 {
            counts[select_by_weight(&[2.0, 2.0, 0.1], &[0.0; 3], 1e-9, &mut r).unwrap()] += 1;
        }
        assert_eq!(counts[2], 0);
        for c in &counts[..2] {
            assert!((*c as f64 / 10_000.0 - 0.5).abs() <= 0.02, "{counts:?}");
        }
    }

    #[test]
    fn rd_examples() {
        let mut r = rng::stream(5, rng::DECISION, 0);
        for _ in 0..100 {
            assert_eq!(select_channel_rd(1, &mut r).unwrap(), 0);
        }
        assert!(select_channel_rd(0, &mut r).is_err());
        let mut counts = [0usize; 5];
        for _ in 0..100_000 {
            counts[select_channel_rd(5, &mut r).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 100_000.0 - 0.2).abs() <= 0.01, "{counts:?}");
        }
        let a: Vec<usize> = {
            let mut r = rng::stream(5, rng::DECISION, 1);
            (0..50).map(|_| select_channel_rd(7, &mut r).unwrap()).collect()
        };
        let b: Vec<usize> = {
            let mut r = rng::stream(5, rng::DECISION, 1);
            (0..50).map(|_| select_channel_rd(7, &mut r).unwrap()).collect()
        };
        assert_eq!(a, b);
    }

    fn mask(chs: &[usize]) -> ChannelMask {
        chs.iter().copied().collect()
    }

    #[test]
    fn ecs_examples() {
        let avail = [(0, mask(&[1, 2])), (1, mask(&[2, 3])), (2, mask(&[3]))];
        assert_eq!(compute_ecs_sb(&avail).unwrap(), vec![2, 3]);
        assert_eq!(compute_ecs_sb(&[(0, mask(&[4]))]).unwrap(), vec![4]);
        let shared = [(0, mask(&[0, 1])), (1, mask(&[0, 2])), (2, mask(&[0]))];
        assert_eq!(compute_ecs_sb(&shared).unwrap(), vec![0]);
        assert_eq!(compute_ecs_sb(&[]).unwrap(), Vec::<usize>::new());
        assert_eq!(
            compute_ecs_sb(&[(0, mask(&[1])), (7, ChannelMask::EMPTY)]),
            Err(SimError::UncoverableNeighbor { neighbor: 7 })
        );
    }

    #[test]
    fn ca_examples() {
        let mut r = rng::stream(2, rng::CA_ASSIGNMENT, 0);
        let full = assign_ca(10, 4, 4, &mut r).unwrap();
        for n in 0..10 {
            assert_eq!(full.channels(n), ChannelMask::all(4));
        }
        assert!(assign_ca(3, 4, 0, &mut r).is_err());
        assert!(assign_ca(3, 4, 5, &mut r).is_err());

        let single = assign_ca(100_000, 5, 1, &mut r).unwrap();
        let mut counts = [0usize; 5];
        for n in 0..single.node_count() {
            assert_eq!(single.channels(n).len(), 1);
            counts[single.channels(n).lowest().unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 100_000.0 - 0.2).abs() <= 0.01, "{counts:?}");
        }
    }

    #[test]
    fn utility_peaks_at_half_scale() {
        for n_ref in [2u32, 7, 10, 14] {
            let best = (0..=n_ref as usize + 2)
                .max_by(|&a, &b| contention_utility(a, n_ref).total_cmp(&contention_utility(b, n_ref)))
                .unwrap();
            assert!((best as f64 - f64::from(n_ref) / 2.0).abs() <= 0.5, "n_ref={n_ref} best={best}");
        }
    }

    #[test]
    fn default_scale_is_clamped() {
        assert_eq!(default_n_ref(70, 0.25), 14);
        assert_eq!(default_n_ref(2, 0.05), 2);
    }

    #[test]
    fn strategy_names_parse() {
        for k in StrategyKind::ALL {
            assert_eq!(k.as_str().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("greedy".parse::<StrategyKind>().is_err());
    }
}
