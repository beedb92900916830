use std::collections::HashSet;

use rand::Rng;

use super::trace::MsgId;

/// A copy of a disseminated message held by a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    pub msg_id: MsgId,
    pub origin: usize,
    /// TTL carried by this copy; a copy with `ttl == 0` is not relayed.
    pub ttl: u32,
    /// `initial_ttl - ttl` for received copies, 0 at the origin.
    pub hop_of_receipt: u32,
}

/// A transmission waiting for its slot. `ttl` is the value the outgoing
/// copy will carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pending {
    pub due: u64,
    pub msg: MsgId,
    pub ttl: u32,
}

/// A multi-slot transmission (SB's ECS, CA's Acs) that has started.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ActiveTx {
    pub msg: MsgId,
    pub ttl: u32,
    pub channels: Vec<usize>,
    pub next_part: usize,
}

#[derive(Debug, Clone, Default)]
pub struct NodeState {
    pub received: HashSet<MsgId>,
    /// Sorted by `(due, msg)`.
    pub pending: Vec<Pending>,
    pub(crate) active: Option<ActiveTx>,
}

impl NodeState {
    /// Records a copy. Returns `false` for a message already held, which is
    /// then dropped without scheduling anything.
    pub fn accept<R: Rng + ?Sized>(
        &mut self,
        msg: &Message,
        current_slot: u64,
        jitter_max: u32,
        rng: &mut R,
    ) -> bool {
        if !self.received.insert(msg.msg_id) {
            return false;
        }
        if let Some(p) = schedule_rebroadcast(msg, current_slot, jitter_max, rng) {
            self.push(p);
        }
        true
    }

    pub(crate) fn push(&mut self, p: Pending) {
        let at = self
            .pending
            .partition_point(|q| (q.due, q.msg) <= (p.due, p.msg));
        self.pending.insert(at, p);
    }

    pub fn is_idle(&self) -> bool {
        self.pending.is_empty() && self.active.is_none()
    }

    /// Removes and returns the earliest pending transmission due by `slot`.
    pub(crate) fn take_due(&mut self, slot: u64) -> Option<Pending> {
        match self.pending.first() {
            Some(p) if p.due <= slot => Some(self.pending.remove(0)),
            _ => None,
        }
    }
}

/// Schedules the relay of a received copy `d` slots later, `d` uniform in
/// `[1, jitter_max]`, carrying one less TTL. A copy that arrived with TTL 0
/// is never relayed. The jitter is drawn only when a relay is scheduled.
pub fn schedule_rebroadcast<R: Rng + ?Sized>(
    msg: &Message,
    current_slot: u64,
    jitter_max: u32,
    rng: &mut R,
) -> Option<Pending> {
    if msg.ttl == 0 {
        return None;
    }
    let d = rng.gen_range(1..=jitter_max.max(1));
    Some(Pending {
        due: current_slot + u64::from(d),
        msg: msg.msg_id,
        ttl: msg.ttl - 1,
    })
}
