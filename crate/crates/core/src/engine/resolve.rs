//! Listener-centric slot resolution.
//!
//! A transmission on a PR-held channel is lost outright. Otherwise a listener
//! tuned to channel `c` decodes a transmission iff exactly one of its
//! in-range neighbors transmitted on `c`; two or more means a collision at
//! that listener. Transmitters never receive (half duplex).

use crate::spectrum::ChannelState;
use crate::strategy::Role;
use crate::topology::Topology;

use super::trace::{NodeDecision, Outcome, Payload, Transmission};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxIntent {
    pub node: usize,
    pub channel: usize,
    pub payload: Payload,
}

/// A clean decode at one listener.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub listener: usize,
    pub transmitter: usize,
    pub channel: usize,
    pub payload: Payload,
}

/// Resolves one slot. Returns the transmissions (same order as `intents`)
/// with outcomes, and every clean decode ordered by `(listener, channel)`.
pub fn resolve_slot(
    decisions: &[NodeDecision],
    intents: &[TxIntent],
    pr: &ChannelState,
    topology: &Topology,
) -> (Vec<Transmission>, Vec<Delivery>) {
    let n = topology.node_count();
    // transmitting[v] = index into intents
    let mut transmitting: Vec<Option<usize>> = vec![None; n];
    for (i, tx) in intents.iter().enumerate() {
        transmitting[tx.node] = Some(i);
    }
    let mut delivered_to: Vec<Vec<usize>> = vec![Vec::new(); intents.len()];
    let mut collided = vec![false; intents.len()];
    let mut deliveries = Vec::new();

    for (listener, d) in decisions.iter().enumerate() {
        if d.role != Role::Overhear || transmitting[listener].is_some() {
            continue;
        }
        let Ok(neighbors) = topology.neighbors(listener) else { continue };
        for channel in d.tuned.iter() {
            if pr.is_on(channel) {
                continue;
            }
            let mut heard = neighbors
                .iter()
                .filter_map(|&v| transmitting[v])
                .filter(|&i| intents[i].channel == channel);
            match (heard.next(), heard.next()) {
                (Some(i), None) => {
                    delivered_to[i].push(listener);
                    deliveries.push(Delivery {
                        listener,
                        transmitter: intents[i].node,
                        channel,
                        payload: intents[i].payload,
                    });
                }
                (Some(a), Some(b)) => {
                    collided[a] = true;
                    collided[b] = true;
                    for i in heard {
                        collided[i] = true;
                    }
                }
                _ => {}
            }
        }
    }

    let transmissions = intents
        .iter()
        .zip(delivered_to)
        .zip(collided)
        .map(|((tx, to), col)| {
            let outcome = if pr.is_on(tx.channel) {
                Outcome::PrInterrupted
            } else if !to.is_empty() {
                Outcome::Delivered(to)
            } else if col {
                Outcome::Collided
            } else {
                Outcome::NoListener
            };
            Transmission {
                node: tx.node,
                channel: tx.channel,
                payload: tx.payload,
                outcome,
            }
        })
        .collect();
    (transmissions, deliveries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelMask;
    use crate::topology::Position;

    fn listen(ch: usize) -> NodeDecision {
        NodeDecision {
            role: Role::Overhear,
            tuned: ChannelMask::single(ch),
        }
    }

    fn send(ch: usize) -> NodeDecision {
        NodeDecision {
            role: Role::Transmit,
            tuned: ChannelMask::single(ch),
        }
    }

    fn data(node: usize, channel: usize) -> TxIntent {
        TxIntent {
            node,
            channel,
            payload: Payload::Data { msg: 0, ttl: 3, part: 0 },
        }
    }

    fn clique(n: usize) -> Topology {
        Topology::from_positions(vec![Position::new(0.5, 0.5); n], 0.1).unwrap()
    }

    #[test]
    fn single_transmitter_delivers() {
        let (tx, del) = resolve_slot(&[send(0), listen(0)], &[data(0, 0)], &ChannelState::all_off(1), &clique(2));
        assert_eq!(tx[0].outcome, Outcome::Delivered(vec![1]));
        assert_eq!(del.len(), 1);
        assert_eq!(del[0].listener, 1);
    }

    #[test]
    fn two_transmitters_collide_at_shared_listener() {
        let (tx, del) = resolve_slot(
            &[send(0), send(0), listen(0)],
            &[data(0, 0), data(1, 0)],
            &ChannelState::all_off(1),
            &clique(3),
        );
        assert!(del.is_empty());
        assert_eq!(tx[0].outcome, Outcome::Collided);
        assert_eq!(tx[1].outcome, Outcome::Collided);
    }

    #[test]
    fn channel_mismatch_has_no_listener() {
        let (tx, del) = resolve_slot(&[send(2), listen(3)], &[data(0, 2)], &ChannelState::all_off(4), &clique(2));
        assert!(del.is_empty());
        assert_eq!(tx[0].outcome, Outcome::NoListener);
    }

    #[test]
    fn pr_activity_interrupts() {
        let (tx, del) = resolve_slot(&[send(0), listen(0)], &[data(0, 0)], &ChannelState::all_on(1), &clique(2));
        assert!(del.is_empty());
        assert_eq!(tx[0].outcome, Outcome::PrInterrupted);
    }

    #[test]
    fn hidden_terminal_collides_only_in_the_middle() {
        // 0 -- 1 -- 2 on a line; 0 and 2 are out of range of each other.
        let line = Topology::from_positions(
            vec![Position::new(0.0, 0.0), Position::new(0.1, 0.0), Position::new(0.2, 0.0), Position::new(0.3, 0.0)],
            0.11,
        )
        .unwrap();
        let (tx, del) = resolve_slot(
            &[send(0), listen(0), send(0), listen(0)],
            &[data(0, 0), data(2, 0)],
            &ChannelState::all_off(1),
            &line,
        );
        assert_eq!(tx[0].outcome, Outcome::Collided);
        assert_eq!(tx[1].outcome, Outcome::Delivered(vec![3]));
        assert_eq!(del.len(), 1);
    }

    #[test]
    fn multi_channel_listener_decodes_each_channel() {
        let all = NodeDecision {
            role: Role::Overhear,
            tuned: [0, 1].into_iter().collect(),
        };
        let (_, del) = resolve_slot(
            &[send(0), send(1), all],
            &[data(0, 0), data(1, 1)],
            &ChannelState::all_off(2),
            &clique(3),
        );
        assert_eq!(del.len(), 2);
        assert_eq!((del[0].channel, del[1].channel), (0, 1));
    }
}
