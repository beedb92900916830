//! Slotted-time dissemination engine.
//!
//! Each slot proceeds in a fixed order:
//!
//! 1. PR activity advances one step (slot 0 draws from the stationary law).
//! 2. Messages planned for this slot originate at their origin nodes.
//! 3. Every node decides its role and channel(s). A node with a due relay
//!    transmits; everyone else overhears. SB and CA relays span one slot per
//!    channel of their set.
//! 4. Competitors (if any) transmit background traffic on the first origin's
//!    channel.
//! 5. The slot is resolved (see [`resolve`]) and first receptions schedule
//!    their relays.
//!
//! The run ends once every planned message has originated and no node has
//! anything left to send, or after `max_slots` slots (trace flagged
//! truncated).

pub mod message;
pub mod resolve;
pub mod trace;

use std::collections::{HashMap, VecDeque};

use rand::Rng;

use crate::channel::ChannelMask;
use crate::config::{CaReceiver, SbReceiver, ScenarioConfig};
use crate::error::Result;
use crate::rng::{self, Stream};
use crate::spectrum::{
    observe_pr_occupancy, step_pr_activity, ChannelObservation, ChannelState, EstimationMode,
};
use crate::strategy::{
    assign_ca, compute_ecs_sb, select_channel_rd, select_channel_surf, CaAssignment, Role,
    StrategyKind, SurfParams,
};
use crate::topology::{generate_topology, Topology};

use message::{ActiveTx, Message, NodeState, Pending};
use resolve::{resolve_slot, TxIntent};
use trace::{NodeDecision, Origination, Payload, Reception, SimTrace, SlotRecord, TraceMeta};

/// Builds the topology a run with this config and seed would use.
pub fn build_topology(config: &ScenarioConfig, seed: u64) -> Result<Topology> {
    match config.positions() {
        Some(p) => Topology::from_positions(p, config.radius),
        None => generate_topology(
            config.node_count,
            config.radius,
            &mut rng::stream(seed, rng::TOPOLOGY, 0),
        ),
    }
}

/// Planned originations in id order.
pub fn message_plan(config: &ScenarioConfig) -> Vec<Origination> {
    let plan = &config.messages;
    let mut out = Vec::with_capacity(plan.count * plan.origins.len());
    for k in 0..plan.count {
        for (i, &node) in plan.origins.iter().enumerate() {
            out.push(Origination {
                msg: (k * plan.origins.len() + i) as u32,
                node,
                slot: config.warmup() + k as u64 * plan.interval,
            });
        }
    }
    out
}

/// Runs one seeded simulation. `config` must come from
/// [`parse_and_validate`](crate::config::parse_and_validate).
pub fn run_dissemination(config: &ScenarioConfig, seed: u64) -> Result<SimTrace> {
    let topology = build_topology(config, seed)?;
    run_on_topology(config, &topology, seed)
}

/// Like [`run_dissemination`] with a caller-supplied topology.
pub fn run_on_topology(config: &ScenarioConfig, topology: &Topology, seed: u64) -> Result<SimTrace> {
    Simulation::new(config, topology, seed)?.run()
}

struct Competitor {
    node: usize,
    next_tx: u64,
    rng: Stream,
}

/// Per-node record of recent channel activity used for CR-count estimates.
struct ActivityTracker {
    channels: usize,
    window: i64,
    mode: EstimationMode,
    /// `last_tuned[v * channels + c]`: last slot node `v` was on channel `c`.
    last_tuned: Vec<i64>,
    /// `last_heard[u][(v, c)]`: last slot `u` cleanly decoded `v` on `c`.
    last_heard: Vec<HashMap<(usize, usize), i64>>,
}

impl ActivityTracker {
    fn new(nodes: usize, channels: usize, window: usize, mode: EstimationMode) -> Self {
        Self {
            channels,
            window: window as i64,
            mode,
            last_tuned: vec![i64::MIN; nodes * channels],
            last_heard: vec![HashMap::new(); nodes],
        }
    }

    /// Distinct neighbors active on each channel over slots `[t - W, t - 1]`.
    fn counts(&self, topology: &Topology, node: usize, slot: u64) -> Vec<usize> {
        let since = slot as i64 - self.window;
        let mut counts = vec![0usize; self.channels];
        match self.mode {
            EstimationMode::Oracle => {
                let neighbors = topology.neighbors(node).unwrap_or(&[]);
                for &v in neighbors {
                    let row = &self.last_tuned[v * self.channels..(v + 1) * self.channels];
                    for (c, &last) in row.iter().enumerate() {
                        if last >= since {
                            counts[c] += 1;
                        }
                    }
                }
            }
            EstimationMode::Sampled => {
                for (&(_, c), &last) in &self.last_heard[node] {
                    if last >= since {
                        counts[c] += 1;
                    }
                }
            }
        }
        counts
    }

    fn record(&mut self, slot: u64, decisions: &[NodeDecision], deliveries: &[resolve::Delivery]) {
        for (v, d) in decisions.iter().enumerate() {
            for c in d.tuned.iter() {
                self.last_tuned[v * self.channels + c] = slot as i64;
            }
        }
        if self.mode == EstimationMode::Sampled {
            for d in deliveries {
                self.last_heard[d.listener].insert((d.transmitter, d.channel), slot as i64);
            }
        }
    }
}

struct Simulation<'a> {
    config: &'a ScenarioConfig,
    topology: &'a Topology,
    seed: u64,
    channels: usize,
    surf: SurfParams,
    ca: Option<CaAssignment>,
    pr_model: crate::spectrum::PrActivityModel,
    pr_rng: Stream,
    decision_rng: Vec<Stream>,
    jitter_rng: Vec<Stream>,
    nodes: Vec<NodeState>,
    is_competitor: Vec<bool>,
    competitors: Vec<Competitor>,
    tracker: ActivityTracker,
    plan: Vec<Origination>,
}

impl<'a> Simulation<'a> {
    fn new(config: &'a ScenarioConfig, topology: &'a Topology, seed: u64) -> Result<Self> {
        let n = topology.node_count();
        let channels = config.channel_count;
        let ca = match config.strategy {
            StrategyKind::Ca => Some(assign_ca(
                n,
                channels,
                config.ca_set_size(),
                &mut rng::stream(seed, rng::CA_ASSIGNMENT, 0),
            )?),
            _ => None,
        };
        let mut is_competitor = vec![false; n];
        let competitors = config
            .competitors
            .iter()
            .map(|&node| {
                is_competitor[node] = true;
                let mut r = rng::stream(seed, rng::COMPETITOR, node as u64);
                let first = r.gen_range(0..config.jitter_max.max(1)) as u64;
                Competitor {
                    node,
                    next_tx: first,
                    rng: r,
                }
            })
            .collect();
        Ok(Self {
            config,
            topology,
            seed,
            channels,
            surf: config.surf_params(),
            ca,
            pr_model: config.pr_model()?,
            pr_rng: rng::stream(seed, rng::PR_ACTIVITY, 0),
            decision_rng: (0..n).map(|u| rng::stream(seed, rng::DECISION, u as u64)).collect(),
            jitter_rng: (0..n).map(|u| rng::stream(seed, rng::JITTER, u as u64)).collect(),
            nodes: vec![NodeState::default(); n],
            is_competitor,
            competitors,
            tracker: ActivityTracker::new(n, channels, config.window, config.estimation),
            plan: message_plan(config),
        })
    }

    fn observations(&self, node: usize, slot: u64, occupancy: &[f64]) -> Vec<ChannelObservation> {
        let counts = self.tracker.counts(self.topology, node, slot);
        (0..self.channels)
            .map(|c| ChannelObservation::new(c, occupancy[c], counts[c]))
            .collect()
    }

    /// Channel(s) for a node that starts a transmission this slot.
    fn transmit_channels(&mut self, node: usize, slot: u64, pr: &ChannelState, occupancy: &[f64]) -> Vec<usize> {
        match self.config.strategy {
            StrategyKind::Surf => {
                let obs = self.observations(node, slot, occupancy);
                vec![select_channel_surf(&obs, &self.surf, &mut self.decision_rng[node])
                    .expect("one observation per channel")]
            }
            StrategyKind::Rd => vec![select_channel_rd(self.channels, &mut self.decision_rng[node])
                .expect("channel count validated")],
            StrategyKind::Sb => {
                let availability: Vec<(usize, ChannelMask)> = self
                    .topology
                    .neighbors(node)
                    .unwrap_or(&[])
                    .iter()
                    .map(|&v| (v, sb_availability(pr)))
                    .filter(|(_, m)| !m.is_empty())
                    .collect();
                let ecs = compute_ecs_sb(&availability).expect("empty availabilities filtered");
                if ecs.is_empty() {
                    vec![sb_availability(pr).lowest().unwrap_or(0)]
                } else {
                    ecs
                }
            }
            StrategyKind::Ca => self
                .ca
                .as_ref()
                .expect("CA assignment exists")
                .channels(node)
                .iter()
                .collect(),
        }
    }

    fn listen_channels(&mut self, node: usize, slot: u64, pr: &ChannelState, occupancy: &[f64]) -> ChannelMask {
        match self.config.strategy {
            StrategyKind::Surf => {
                let obs = self.observations(node, slot, occupancy);
                ChannelMask::single(
                    select_channel_surf(&obs, &self.surf, &mut self.decision_rng[node])
                        .expect("one observation per channel"),
                )
            }
            StrategyKind::Rd => ChannelMask::single(
                select_channel_rd(self.channels, &mut self.decision_rng[node]).expect("channel count validated"),
            ),
            StrategyKind::Sb => {
                let free = sb_availability(pr);
                let channel = match self.config.sb.receiver {
                    SbReceiver::Lowest => free.lowest().unwrap_or(0),
                    SbReceiver::Random if free.is_empty() => 0,
                    SbReceiver::Random => {
                        let members: Vec<usize> = free.iter().collect();
                        members[self.decision_rng[node].gen_range(0..members.len())]
                    }
                };
                ChannelMask::single(channel)
            }
            StrategyKind::Ca => {
                let acs = self.ca.as_ref().expect("CA assignment exists").channels(node);
                match self.config.ca.receiver {
                    CaReceiver::All => acs,
                    CaReceiver::Random => {
                        let members: Vec<usize> = acs.iter().collect();
                        let pick = self.decision_rng[node].gen_range(0..members.len());
                        ChannelMask::single(members[pick])
                    }
                }
            }
        }
    }

    fn run(mut self) -> Result<SimTrace> {
        let n = self.topology.node_count();
        let ttl = self.config.ttl;
        let window = self.config.window;
        let last_origination = self.config.last_origination();
        let mut history: VecDeque<ChannelState> = VecDeque::with_capacity(window + 1);
        let mut slots = Vec::new();
        let mut state = self.pr_model.initial_state(&mut self.pr_rng);
        let mut next_origin = 0usize;
        let mut truncated = true;

        for t in 0..self.config.max_slots {
            if t > 0 {
                state = step_pr_activity(&self.pr_model, &state, &mut self.pr_rng)?;
            }
            if history.len() == window {
                history.pop_front();
            }
            history.push_back(state);
            let hist = history.make_contiguous();
            let occupancy: Vec<f64> = (0..self.channels)
                .map(|c| observe_pr_occupancy(hist, c))
                .collect::<Result<_>>()?;

            while next_origin < self.plan.len() && self.plan[next_origin].slot == t {
                let o = self.plan[next_origin];
                let node = &mut self.nodes[o.node];
                node.received.insert(o.msg);
                if ttl > 0 {
                    node.push(Pending {
                        due: t,
                        msg: o.msg,
                        ttl: ttl - 1,
                    });
                }
                next_origin += 1;
            }

            let mut decisions = Vec::with_capacity(n);
            let mut intents = Vec::new();
            for u in 0..n {
                if self.is_competitor[u] {
                    decisions.push(NodeDecision {
                        role: Role::Overhear,
                        tuned: ChannelMask::EMPTY,
                    });
                    continue;
                }
                if self.nodes[u].active.is_none() {
                    if let Some(p) = self.nodes[u].take_due(t) {
                        let channels = self.transmit_channels(u, t, &state, &occupancy);
                        self.nodes[u].active = Some(ActiveTx {
                            msg: p.msg,
                            ttl: p.ttl,
                            channels,
                            next_part: 0,
                        });
                    }
                }
                if let Some(active) = self.nodes[u].active.as_mut() {
                    let part = active.next_part;
                    let channel = active.channels[part];
                    intents.push(TxIntent {
                        node: u,
                        channel,
                        payload: Payload::Data {
                            msg: active.msg,
                            ttl: active.ttl,
                            part: part as u32,
                        },
                    });
                    active.next_part += 1;
                    if active.next_part == active.channels.len() {
                        self.nodes[u].active = None;
                    }
                    decisions.push(NodeDecision {
                        role: Role::Transmit,
                        tuned: ChannelMask::single(channel),
                    });
                } else {
                    let tuned = self.listen_channels(u, t, &state, &occupancy);
                    decisions.push(NodeDecision {
                        role: Role::Overhear,
                        tuned,
                    });
                }
            }

            if !self.competitors.is_empty() {
                let source = self.config.messages.origins[0];
                let pinned = decisions[source].tuned.lowest().unwrap_or(0);
                for comp in &mut self.competitors {
                    if comp.next_tx == t {
                        intents.push(TxIntent {
                            node: comp.node,
                            channel: pinned,
                            payload: Payload::Background,
                        });
                        decisions[comp.node] = NodeDecision {
                            role: Role::Transmit,
                            tuned: ChannelMask::single(pinned),
                        };
                        comp.next_tx = t + comp.rng.gen_range(1..=self.config.jitter_max.max(1)) as u64;
                    } else {
                        decisions[comp.node].tuned = ChannelMask::single(pinned);
                    }
                }
            }

            let (transmissions, mut deliveries) = resolve_slot(&decisions, &intents, &state, self.topology);
            self.tracker.record(t, &decisions, &deliveries);

            // best copy first when a listener decodes the same message twice
            deliveries.sort_by_key(|d| {
                let ttl = match d.payload {
                    Payload::Data { ttl, .. } => ttl,
                    Payload::Background => 0,
                };
                (d.listener, std::cmp::Reverse(ttl), d.channel)
            });
            let mut receptions = Vec::new();
            for d in &deliveries {
                let Payload::Data { msg, ttl: carried, .. } = d.payload else { continue };
                if self.is_competitor[d.listener] {
                    continue;
                }
                let copy = Message {
                    msg_id: msg,
                    origin: self.plan[msg as usize].node,
                    ttl: carried,
                    hop_of_receipt: ttl - carried,
                };
                let jitter = &mut self.jitter_rng[d.listener];
                if self.nodes[d.listener].accept(&copy, t, self.config.jitter_max, jitter) {
                    receptions.push(Reception {
                        node: d.listener,
                        msg,
                        from: d.transmitter,
                        hop: copy.hop_of_receipt,
                    });
                }
            }

            slots.push(SlotRecord {
                slot: t,
                pr: state,
                decisions,
                transmissions,
                receptions,
            });

            let idle = self
                .nodes
                .iter()
                .enumerate()
                .all(|(u, s)| self.is_competitor[u] || s.is_idle());
            if t >= last_origination && idle {
                truncated = false;
                break;
            }
        }

        Ok(SimTrace {
            meta: TraceMeta {
                strategy: self.config.strategy.to_string(),
                nodes: n,
                channels: self.channels,
                ttl,
                seed: self.seed,
                truncated,
                competitors: self.config.competitors.clone(),
                origins: self.plan,
            },
            slots,
        })
    }
}

/// Channels a node can use this slot: those free of PR activity. PR activity
/// is global and sensing perfect, so this is the same for every node.
fn sb_availability(pr: &ChannelState) -> ChannelMask {
    pr.free_mask()
}
