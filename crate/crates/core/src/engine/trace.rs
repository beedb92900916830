//! Per-slot record of a run and its line-oriented text form.
//!
//! # Event log format
//!
//! One record per line, whitespace-separated fields:
//!
//! ```text
//! surfsim-trace 1
//! meta <strategy> <nodes> <channels> <ttl> <seed> <slots> <truncated:0|1>
//! competitors <ids|->
//! origin <msg> <node> <slot>
//! slot <t> <pr bits, one 0/1 per channel, channel 0 first>
//! dec <role:channels> ...                  one entry per node, `t` or `o` role
//! tx <node> <channel> <msg|bg> <ttl> <part> <outcome> [<receivers>]
//! rx <node> <msg> <from> <hop>
//! end
//! ```
//!
//! `outcome` is one of `delivered`, `collided`, `interrupted`, `no-listener`;
//! only `delivered` carries a receiver list. Background (`bg`) transmissions
//! print `-` for ttl and part. Channel lists are comma-separated, `-` when
//! empty. Every `slot` line is followed by exactly one `dec` line and then
//! that slot's `tx` and `rx` lines.

use std::fmt::Write as _;

use crate::channel::ChannelMask;
use crate::error::{Result, SimError};
use crate::spectrum::ChannelState;
use crate::strategy::Role;

pub type MsgId = u32;

const HEADER: &str = "surfsim-trace 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payload {
    /// A disseminated message; `ttl` is the value carried by this copy and
    /// `part` the index within a multi-channel transmission (SB/CA).
    Data { msg: MsgId, ttl: u32, part: u32 },
    /// Saturated competitor traffic; never relayed, never counted in metrics.
    Background,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Cleanly decoded by these listeners (ascending ids).
    Delivered(Vec<usize>),
    /// Heard only by listeners that also heard another transmitter.
    Collided,
    /// The channel was held by PR activity.
    PrInterrupted,
    NoListener,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    pub node: usize,
    pub channel: usize,
    pub payload: Payload,
    pub outcome: Outcome,
}

/// First reception of a data message by a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reception {
    pub node: usize,
    pub msg: MsgId,
    pub from: usize,
    pub hop: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeDecision {
    pub role: Role,
    /// Channels the node's radio is on this slot.
    pub tuned: ChannelMask,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotRecord {
    pub slot: u64,
    pub pr: ChannelState,
    pub decisions: Vec<NodeDecision>,
    pub transmissions: Vec<Transmission>,
    pub receptions: Vec<Reception>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Origination {
    pub msg: MsgId,
    pub node: usize,
    pub slot: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceMeta {
    pub strategy: String,
    pub nodes: usize,
    pub channels: usize,
    pub ttl: u32,
    pub seed: u64,
    pub truncated: bool,
    pub competitors: Vec<usize>,
    pub origins: Vec<Origination>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTrace {
    pub meta: TraceMeta,
    pub slots: Vec<SlotRecord>,
}

impl SimTrace {
    pub fn receptions(&self) -> impl Iterator<Item = (u64, &Reception)> {
        self.slots
            .iter()
            .flat_map(|s| s.receptions.iter().map(move |r| (s.slot, r)))
    }

    pub fn transmissions(&self) -> impl Iterator<Item = (u64, &Transmission)> {
        self.slots
            .iter()
            .flat_map(|s| s.transmissions.iter().map(move |t| (s.slot, t)))
    }

    pub fn is_origin(&self, node: usize) -> bool {
        self.meta.origins.iter().any(|o| o.node == node)
    }

    pub fn is_competitor(&self, node: usize) -> bool {
        self.meta.competitors.contains(&node)
    }

    /// Data deliveries that landed on a slot/channel held by PR. Always zero
    /// for engine-produced traces.
    pub fn deliveries_during_pr(&self) -> usize {
        self.slots
            .iter()
            .flat_map(|s| {
                s.transmissions
                    .iter()
                    .filter(move |t| s.pr.is_on(t.channel) && matches!(t.outcome, Outcome::Delivered(_)))
            })
            .count()
    }

    /// Number of times a node started relaying a message it had already
    /// relayed (or originated) before. Always zero for engine traces.
    pub fn duplicate_rebroadcasts(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        self.transmissions()
            .filter_map(|(_, t)| match t.payload {
                Payload::Data { msg, part: 0, .. } => Some((t.node, msg)),
                _ => None,
            })
            .filter(|key| !seen.insert(*key))
            .count()
    }

    pub fn to_log(&self) -> String {
        let mut out = String::new();
        let m = &self.meta;
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(
            out,
            "meta {} {} {} {} {} {} {}",
            m.strategy,
            m.nodes,
            m.channels,
            m.ttl,
            m.seed,
            self.slots.len(),
            u8::from(m.truncated)
        );
        let _ = writeln!(out, "competitors {}", join_ids(&m.competitors));
        for o in &m.origins {
            let _ = writeln!(out, "origin {} {} {}", o.msg, o.node, o.slot);
        }
        for s in &self.slots {
            let bits: String = (0..s.pr.channel_count())
                .map(|c| if s.pr.is_on(c) { '1' } else { '0' })
                .collect();
            let _ = writeln!(out, "slot {} {}", s.slot, bits);
            out.push_str("dec");
            for d in &s.decisions {
                let r = match d.role {
                    Role::Transmit => 't',
                    Role::Overhear => 'o',
                };
                let _ = write!(out, " {r}:{}", d.tuned);
            }
            out.push('\n');
            for t in &s.transmissions {
                let _ = write!(out, "tx {} {} ", t.node, t.channel);
                match t.payload {
                    Payload::Data { msg, ttl, part } => {
                        let _ = write!(out, "{msg} {ttl} {part}");
                    }
                    Payload::Background => out.push_str("bg - -"),
                }
                match &t.outcome {
                    Outcome::Delivered(to) => {
                        let _ = write!(out, " delivered {}", join_ids(to));
                    }
                    Outcome::Collided => out.push_str(" collided"),
                    Outcome::PrInterrupted => out.push_str(" interrupted"),
                    Outcome::NoListener => out.push_str(" no-listener"),
                }
                out.push('\n');
            }
            for r in &s.receptions {
                let _ = writeln!(out, "rx {} {} {} {}", r.node, r.msg, r.from, r.hop);
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_log(text: &str) -> Result<SimTrace> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        let (n, first) = lines.next().ok_or_else(|| SimError::parse(1, "empty trace"))?;
        if first != HEADER {
            return Err(SimError::parse(n, format!("expected `{HEADER}`")));
        }
        let (n, meta_line) = lines.next().ok_or_else(|| SimError::parse(2, "missing meta"))?;
        let f: Vec<&str> = meta_line.split_whitespace().collect();
        if f.len() != 8 || f[0] != "meta" {
            return Err(SimError::parse(n, "malformed meta line"));
        }
        let mut meta = TraceMeta {
            strategy: f[1].to_string(),
            nodes: num(f[2], n)?,
            channels: num(f[3], n)?,
            ttl: num(f[4], n)?,
            seed: num(f[5], n)?,
            truncated: f[7] == "1",
            competitors: Vec::new(),
            origins: Vec::new(),
        };
        let declared_slots: usize = num(f[6], n)?;
        let mut slots: Vec<SlotRecord> = Vec::with_capacity(declared_slots);
        let mut ended = false;
        for (n, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let Some(&kind) = f.first() else { continue };
            match kind {
                "competitors" if f.len() == 2 => meta.competitors = parse_ids(f[1], n)?,
                "origin" if f.len() == 4 => meta.origins.push(Origination {
                    msg: num(f[1], n)?,
                    node: num(f[2], n)?,
                    slot: num(f[3], n)?,
                }),
                "slot" if f.len() == 3 => {
                    if f[2].len() != meta.channels {
                        return Err(SimError::parse(n, "pr bit count differs from channel count"));
                    }
                    let flags: Vec<bool> = f[2].chars().map(|c| c == '1').collect();
                    slots.push(SlotRecord {
                        slot: num(f[1], n)?,
                        pr: ChannelState::from_flags(&flags),
                        decisions: Vec::new(),
                        transmissions: Vec::new(),
                        receptions: Vec::new(),
                    });
                }
                "dec" => {
                    let s = slots.last_mut().ok_or_else(|| SimError::parse(n, "dec before slot"))?;
                    for entry in &f[1..] {
                        let (role, chans) = entry
                            .split_once(':')
                            .ok_or_else(|| SimError::parse(n, "malformed decision"))?;
                        let role = match role {
                            "t" => Role::Transmit,
                            "o" => Role::Overhear,
                            _ => return Err(SimError::parse(n, "unknown role")),
                        };
                        let tuned = parse_ids(chans, n)?.into_iter().collect();
                        s.decisions.push(NodeDecision { role, tuned });
                    }
                }
                "tx" if f.len() >= 7 => {
                    let s = slots.last_mut().ok_or_else(|| SimError::parse(n, "tx before slot"))?;
                    let payload = if f[3] == "bg" {
                        Payload::Background
                    } else {
                        Payload::Data {
                            msg: num(f[3], n)?,
                            ttl: num(f[4], n)?,
                            part: num(f[5], n)?,
                        }
                    };
                    let outcome = match (f[6], f.len()) {
                        ("delivered", 8) => Outcome::Delivered(parse_ids(f[7], n)?),
                        ("collided", 7) => Outcome::Collided,
                        ("interrupted", 7) => Outcome::PrInterrupted,
                        ("no-listener", 7) => Outcome::NoListener,
                        _ => return Err(SimError::parse(n, "malformed outcome")),
                    };
                    s.transmissions.push(Transmission {
                        node: num(f[1], n)?,
                        channel: num(f[2], n)?,
                        payload,
                        outcome,
                    });
                }
                "rx" if f.len() == 5 => {
                    let s = slots.last_mut().ok_or_else(|| SimError::parse(n, "rx before slot"))?;
                    s.receptions.push(Reception {
                        node: num(f[1], n)?,
                        msg: num(f[2], n)?,
                        from: num(f[3], n)?,
                        hop: num(f[4], n)?,
                    });
                }
                "end" => {
                    ended = true;
                    break;
                }
                _ => return Err(SimError::parse(n, format!("unrecognized record `{kind}`"))),
            }
        }
        if !ended {
            return Err(SimError::parse(0, "missing `end` record"));
        }
        if slots.len() != declared_slots {
            return Err(SimError::parse(0, "slot count differs from meta"));
        }
        Ok(SimTrace { meta, slots })
    }
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| SimError::parse(line, format!("bad number `{s}`")))
}

fn join_ids(ids: &[usize]) -> String {
    if ids.is_empty() {
        return "-".to_string();
    }
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn parse_ids(s: &str, line: usize) -> Result<Vec<usize>> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| num(p, line)).collect()
}
