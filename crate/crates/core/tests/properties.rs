use proptest::prelude::*;

use surfsim::channel::ChannelMask;
use surfsim::config::validate_value;
use surfsim::engine::trace::SimTrace;
use surfsim::engine::{build_topology, run_dissemination};
use surfsim::metrics::MetricsReport;
use surfsim::rng;
use surfsim::spectrum::{estimate_cr_count, ChannelObservation, EstimationMode};
use surfsim::strategy::{compute_ecs_sb, select_by_weight, surf_weight, SurfParams};
use surfsim::topology::generate_topology;

fn small_config() -> impl Strategy<Value = (serde_json::Value, u64)> {
    (
        2usize..14,
        1usize..5,
        0usize..4,
        0.15f64..0.8,
        0.0f64..0.7,
        0u32..5,
        any::<u64>(),
        prop::bool::ANY,
    )
        .prop_map(|(n, ch, s, radius, occ, ttl, seed, sampled)| {
            let strategy = ["surf", "rd", "sb", "ca"][s];
            let v = serde_json::json!({
                "N": n, "Ch": ch, "strategy": strategy, "radius": radius,
                "pr": {"occupancy": occ}, "ttl": ttl, "window": 5,
                "estimation": if sampled { "sampled" } else { "oracle" },
                "messages": {"origins": [0], "count": 2, "interval": 4}
            });
            (v, seed)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn surf_choice_is_scale_invariant(
        weights in prop::collection::vec(0.0f64..10.0, 1..8),
        scale in 1e-3f64..1e3,
        seed in any::<u64>(),
    ) {
        let occ = vec![0.5; weights.len()];
        let scaled: Vec<f64> = weights.iter().map(|w| w * scale).collect();
        let a = select_by_weight(&weights, &occ, 1e-9, &mut rng::stream(seed, rng::DECISION, 0));
        let b = select_by_weight(&scaled, &occ, 1e-9, &mut rng::stream(seed, rng::DECISION, 0));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn surf_weight_non_increasing_in_occupancy(
        lo in 0.0f64..1.0, hi in 0.0f64..1.0, n in 0usize..40, n_ref in 1u32..40,
    ) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let p = SurfParams::new(n_ref, 1e-9).unwrap();
        let w_lo = surf_weight(&ChannelObservation::new(0, lo, n), &p);
        let w_hi = surf_weight(&ChannelObservation::new(0, hi, n), &p);
        prop_assert!(w_hi <= w_lo);
        prop_assert!(w_hi >= 0.0);
    }

    #[test]
    fn ecs_covers_every_neighbor(
        channels in 1usize..7,
        raw in prop::collection::vec(1u64..64, 1..5),
    ) {
        let full = (1u64 << channels) - 1;
        let avail: Vec<(usize, ChannelMask)> = raw
            .iter()
            .enumerate()
            .map(|(v, &b)| (v, ChannelMask::from_bits((b & full).max(1))))
            .collect();
        let ecs = compute_ecs_sb(&avail).unwrap();
        let chosen: ChannelMask = ecs.iter().copied().collect();
        prop_assert!(avail.iter().all(|(_, m)| !m.intersection(chosen).is_empty()));
        prop_assert!(ecs.len() <= avail.len().min(channels));
        let opt = (1u64..=full)
            .filter(|&pick| avail.iter().all(|(_, m)| m.bits() & pick != 0))
            .map(|pick| pick.count_ones() as usize)
            .min()
            .unwrap();
        let h4 = 1.0 + 0.5 + 1.0 / 3.0 + 0.25;
        prop_assert!(ecs.len() as f64 <= h4 * opt as f64);
    }

    #[test]
    fn topology_is_symmetric_irreflexive_and_distance_consistent(
        n in 1usize..40, radius in 0.05f64..1.0, seed in any::<u64>(),
    ) {
        let t = generate_topology(n, radius, &mut rng::stream(seed, rng::TOPOLOGY, 0)).unwrap();
        let again = generate_topology(n, radius, &mut rng::stream(seed, rng::TOPOLOGY, 0)).unwrap();
        prop_assert_eq!(t.positions(), again.positions());
        let p = t.positions();
        for u in 0..n {
            prop_assert!(!t.adjacent(u, u));
            for v in 0..n {
                prop_assert_eq!(t.adjacent(u, v), t.adjacent(v, u));
                prop_assert_eq!(t.adjacent(u, v), u != v && p[u].distance(&p[v]) <= radius);
            }
        }
    }

    #[test]
    fn engine_invariants_hold((v, seed) in small_config()) {
        let c = validate_value(v).unwrap();
        let t = run_dissemination(&c, seed).unwrap();
        prop_assert_eq!(t.deliveries_during_pr(), 0);
        prop_assert_eq!(t.duplicate_rebroadcasts(), 0);

        let r = MetricsReport::from_trace(&t).unwrap();
        let acc = &r.accumulative_receivers;
        prop_assert!(acc.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(*acc.last().unwrap() <= (c.node_count - 1) as f64);
        prop_assert!(r.per_node_delivery.values().all(|x| (0.0..=1.0).contains(x)));

        // Nobody receives a message twice or reaches an unreachable node.
        let mut seen = std::collections::HashSet::new();
        for (_, rx) in t.receptions() {
            prop_assert!(seen.insert((rx.node, rx.msg)));
        }
        let topo = build_topology(&c, seed).unwrap();
        let bound = topo.connected_fraction(0).unwrap() * (c.node_count - 1) as f64;
        prop_assert!(r.final_receivers() <= bound + 1e-9);

        // Same inputs, same trace; the log reproduces it exactly.
        let again = run_dissemination(&c, seed).unwrap();
        prop_assert_eq!(&again, &t);
        prop_assert_eq!(SimTrace::from_log(&t.to_log()).unwrap(), t.clone());

        // Sampled estimates never exceed the oracle.
        let w = c.window.min(t.slots.len());
        let window = &t.slots[t.slots.len() - w..];
        for node in 0..c.node_count {
            for ch in 0..c.channel_count {
                let o = estimate_cr_count(&topo, window, node, ch, c.channel_count, EstimationMode::Oracle).unwrap();
                let s = estimate_cr_count(&topo, window, node, ch, c.channel_count, EstimationMode::Sampled).unwrap();
                prop_assert!(s <= o);
            }
        }
    }
}
