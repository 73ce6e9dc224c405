use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use ucran_core::controller::{choose_node, utilization_factor, ResourceLedger};
use ucran_core::engine::event::{EventKind, EventQueue};
use ucran_core::latency::{processing_site_decision, total_delay, Site, SiteEstimate};
use ucran_core::power::{node_power, PowerProfile};
use ucran_core::topology::extended_star_parents;
use ucran_core::{NodeId, UeId};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn delay_total_is_exact_sum(comm in 0.0..5.0f64, proc_ in 0.0..5.0f64) {
        let d = total_delay(comm, proc_, Site::BBUPool).unwrap();
        prop_assert_eq!(d.total_s.to_bits(), (comm + proc_).to_bits());
    }

    #[test]
    fn utilization_is_one_division(load in 0u32..5_000_000, cap in 1u32..5_000_000) {
        let uf = utilization_factor(load, cap).unwrap();
        prop_assert_eq!(uf.to_bits(), (f64::from(load) * 100.0 / f64::from(cap)).to_bits());
    }
}

proptest! {
    #[test]
    fn ledger_conserves(ops in prop::collection::vec((0u32..40, 0u32..3, 1u32..6, any::<bool>()), 1..200)) {
        let mut ledger = ResourceLedger::new();
        let caps = [20u32, 35, 50];
        for (i, &c) in caps.iter().enumerate() {
            ledger.add_node(NodeId(i as u32), c);
        }
        let mut held: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
        for (ue, node, prbs, release) in ops {
            if release {
                let r = ledger.release(UeId(ue));
                prop_assert_eq!(r.is_ok(), held.remove(&ue).is_some());
            } else {
                let fits = ledger.free(NodeId(node)) >= prbs && !held.contains_key(&ue);
                let r = ledger.allocate(UeId(ue), NodeId(node), prbs);
                prop_assert_eq!(r.is_ok(), fits);
                if fits {
                    held.insert(ue, (node, prbs));
                }
            }
            prop_assert!(ledger.conserved());
            for (i, &c) in caps.iter().enumerate() {
                let used: u32 = held.values().filter(|h| h.0 == i as u32).map(|h| h.1).sum();
                prop_assert_eq!(ledger.allocated(NodeId(i as u32)), used);
                prop_assert_eq!(ledger.free(NodeId(i as u32)) + used, c);
            }
        }
    }

    #[test]
    fn choose_node_is_stable_argmax(free in prop::collection::vec(0u32..50, 1..8), demand in 1u32..30, rot in 0usize..8) {
        let cands: Vec<(NodeId, u32)> = free.iter().enumerate().map(|(i, &f)| (NodeId(i as u32), f)).collect();
        let max = *free.iter().max().unwrap();
        let want = (max >= demand).then(|| NodeId(free.iter().position(|&f| f == max).unwrap() as u32));
        prop_assert_eq!(choose_node(&cands, demand), want);
        let mut shuffled = cands.clone();
        shuffled.rotate_left(rot % cands.len());
        prop_assert_eq!(choose_node(&shuffled, demand), want);
    }

    #[test]
    fn extended_star_is_a_shallow_tree(members in 0usize..13, fan_out in 1usize..4) {
        match extended_star_parents(members, fan_out) {
            Err(_) => prop_assert!(members > fan_out + fan_out * fan_out),
            Ok(p) => {
                prop_assert_eq!(p.len(), members);
                let mut children: BTreeMap<Option<usize>, usize> = BTreeMap::new();
                for (i, &(depth, parent)) in p.iter().enumerate() {
                    *children.entry(parent).or_default() += 1;
                    match parent {
                        None => prop_assert_eq!(depth, 1),
                        Some(q) => {
                            // parents precede children and sit directly under the head
                            prop_assert!(q < i);
                            prop_assert_eq!(p[q], (1, None));
                            prop_assert_eq!(depth, 2);
                        }
                    }
                }
                prop_assert!(children.values().all(|&c| c <= fan_out));
            }
        }
    }

    #[test]
    fn site_decision_takes_the_smaller_total(
        e in prop::option::of((0.0..1.0f64, 0.0..1.0f64)),
        b in prop::option::of((0.0..1.0f64, 0.0..1.0f64)),
    ) {
        let edge = e.map(|(c, p)| SiteEstimate { comm_s: c, proc_s: p });
        let bbu = b.map(|(c, p)| SiteEstimate { comm_s: c, proc_s: p });
        match processing_site_decision(edge, bbu) {
            Err(_) => prop_assert!(edge.is_none() && bbu.is_none()),
            Ok(d) => {
                prop_assert!(d.is_optimal());
                let want = match (edge, bbu) {
                    (Some(x), Some(y)) if x.total() <= y.total() => Site::EdgeFRRH,
                    (Some(_), None) => Site::EdgeFRRH,
                    _ => Site::BBUPool,
                };
                prop_assert_eq!(d.site, want);
            }
        }
    }

    #[test]
    fn node_power_is_monotone_in_load(a in 0.0..=1.0f64, b in 0.0..=1.0f64, static_w in 0.0..500.0f64, slope in 0.0..20.0f64) {
        let p = PowerProfile { static_w, slope, tx_w: 20.0, hover_w: 150.0 };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(node_power(&p, lo, false).unwrap() <= node_power(&p, hi, false).unwrap());
        let hover = node_power(&p, a, true).unwrap() - node_power(&p, a, false).unwrap();
        prop_assert!((hover - 150.0).abs() < 1e-9);
        prop_assert_eq!(node_power(&p, 0.0, false).unwrap(), static_w);
    }

    #[test]
    fn events_pop_in_time_rank_seq_order(times in prop::collection::vec((0u8..20, 0u8..4), 1..100)) {
        let mut q = EventQueue::new();
        for &(t, k) in &times {
            let kind = match k {
                0 => EventKind::UeDeparture(UeId(0)),
                1 => EventKind::UeArrival(UeId(0)),
                2 => EventKind::MetricsSample,
                _ => EventKind::ControlTick,
            };
            q.schedule(f64::from(t), kind);
        }
        let popped: Vec<_> = std::iter::from_fn(|| q.pop()).collect();
        prop_assert_eq!(popped.len(), times.len());
        let seqs: BTreeSet<u64> = popped.iter().map(|e| e.seq).collect();
        prop_assert_eq!(seqs.len(), popped.len());
        for w in popped.windows(2) {
            let ka = (w[0].time, w[0].kind.rank(), w[0].seq);
            let kb = (w[1].time, w[1].kind.rank(), w[1].seq);
            prop_assert!(ka < kb);
        }
    }
}
