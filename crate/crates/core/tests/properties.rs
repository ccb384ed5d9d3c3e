use proptest::prelude::*;

use upr_core::expand::{build_arcs, full_expand, ArcKind, StorageRule, TimeSets};
use upr_core::gen::{gen_tiny, greedy_schedule, TinyParams};
use upr_core::models::{build_full, build_partial, export_model, import_model, MpsFormat};
use upr_core::schedule::SolutionFile;
use upr_core::verify::check_schedule;
use upr_core::{Instance, NodeId, Schedule, Time};

fn tiny() -> impl Strategy<Value = Instance> {
    (any::<u64>(), 2usize..=5, 1usize..=5, 1u64..=3, 0u64..=2).prop_filter_map("generator gave up", |(seed, n, k, thr, sto)| {
        let p = TinyParams { n, k, max_throughput: thr, max_storage: sto, max_horizon: 10, ..TinyParams::default() };
        gen_tiny(seed, &p).ok()
    })
}

/// Instance plus a random time set keeping `0` and `T` at every node.
fn tiny_with_times() -> impl Strategy<Value = (Instance, TimeSets)> {
    tiny().prop_flat_map(|inst| {
        let n = inst.num_nodes();
        let h = inst.horizon as usize;
        let masks = proptest::collection::vec(proptest::collection::vec(any::<bool>(), h.saturating_sub(1)), n);
        (Just(inst), masks).prop_map(|(inst, masks)| {
            let h = inst.horizon;
            let lists = masks
                .into_iter()
                .map(|m| {
                    let mut l = vec![0, h];
                    l.extend(m.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as Time + 1));
                    l
                })
                .collect();
            let times = TimeSets::from_lists(lists, h).unwrap();
            (inst, times)
        })
    })
}

fn greedy(inst: &Instance) -> Schedule {
    let mut s = greedy_schedule(inst).expect("generated instances are feasible");
    s.horizon = inst.horizon;
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn movement_arcs_land_on_latest_copy((inst, times) in tiny_with_times()) {
        let net = build_arcs(times.clone(), &inst, StorageRule::Tight).unwrap();
        for e in &net.movement {
            let a = &inst.arcs[e.base_arc.unwrap()];
            let t = e.from.time;
            prop_assert!(t + a.transit <= inst.horizon);
            prop_assert_eq!(e.to.node, a.head);
            prop_assert!(times.contains(a.head, e.to.time));
            prop_assert!(e.to.time <= t + a.transit);
            prop_assert!((e.to.time + 1..=t + a.transit).all(|s| !times.contains(a.head, s)));
            let gap = times.next_time(e.from.node, t).map(|n| n - t).unwrap_or(1).max(1);
            prop_assert_eq!(e.capacity, a.throughput * gap as u64);
        }
        for v in 0..inst.num_nodes() {
            let vid = NodeId(v);
            for &t in times.times(vid) {
                for (ai, a) in inst.arcs.iter().enumerate() {
                    if a.tail == vid && t + a.transit <= inst.horizon {
                        prop_assert!(net.movement_from(vid, t, ai).is_some());
                    }
                }
            }
        }
        let holds: Vec<_> = net.holdover.iter().filter(|e| e.kind == ArcKind::Holdover).collect();
        prop_assert_eq!(holds.len(), times.len() - inst.num_nodes());
        for e in holds {
            prop_assert_eq!(e.to.time, times.next_time(e.from.node, e.from.time).unwrap());
        }
    }

    #[test]
    fn tight_storage_bound_never_exceeds_relaxed((inst, times) in tiny_with_times()) {
        let net = build_arcs(times.clone(), &inst, StorageRule::Tight).unwrap();
        for v in 0..inst.num_nodes() {
            let vid = NodeId(v);
            for &t in times.times(vid).iter().filter(|&&t| t < inst.horizon) {
                let tight = net.storage_bound_tight(&inst, vid, t).unwrap();
                let relaxed = net.storage_bound_relaxed(&inst, vid, t).unwrap();
                prop_assert!(tight <= relaxed, "({v},{t}): {tight} > {relaxed}");
                prop_assert!(tight >= inst.storage(vid));
            }
        }
    }

    #[test]
    fn projection_is_feasible_and_no_later((inst, times) in tiny_with_times()) {
        let sched = greedy(&inst);
        prop_assert!(check_schedule(&inst, &sched).unwrap().is_ok());
        let net = build_arcs(times, &inst, StorageRule::Tight).unwrap();
        let mapped = net.project_mu(&inst, &sched);
        let problems = net.check_flow(&inst, &mapped);
        prop_assert!(problems.is_empty(), "{problems:?}");
        prop_assert!(mapped.makespan() <= sched.true_makespan(&inst));
    }

    #[test]
    fn projection_onto_full_network_is_identity(inst in tiny()) {
        let sched = greedy(&inst);
        let net = full_expand(&inst);
        let mapped = net.project_mu(&inst, &sched);
        prop_assert_eq!(&mapped.trajectories, &sched.trajectories);
        prop_assert!(net.check_flow(&inst, &mapped).is_empty());
    }

    #[test]
    fn refining_time_sets_keeps_subset_order((inst, times) in tiny_with_times(), pick in any::<prop::sample::Index>()) {
        let full = TimeSets::full(inst.num_nodes(), inst.horizon);
        prop_assert!(times.is_subset_of(&full));
        let v = NodeId(pick.index(inst.num_nodes()));
        let t = pick.index(inst.horizon as usize + 1) as Time;
        let mut grown = times.clone();
        let added = grown.insert(v, t).unwrap();
        prop_assert_eq!(added, !times.contains(v, t));
        prop_assert!(times.is_subset_of(&grown));
        prop_assert!(grown.is_subset_of(&full));
        prop_assert!(build_arcs(grown, &inst, StorageRule::Tight).is_ok());
    }

    #[test]
    fn instance_and_solution_files_round_trip(inst in tiny()) {
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(&back, &inst);
        let sched = greedy(&inst);
        let file = sched.to_file(&inst);
        let text = serde_json::to_string(&file).unwrap();
        let read: SolutionFile = serde_json::from_str(&text).unwrap();
        let again = Schedule::from_file(&inst, &read).unwrap();
        prop_assert_eq!(again.trajectories, sched.trajectories);
    }

    #[test]
    fn saturated_partial_model_equals_full_model(inst in tiny()) {
        let full = build_full(&inst);
        let partial = build_partial(&full_expand(&inst), &inst).unwrap();
        prop_assert_eq!(full.canonical(), partial.canonical());
    }

    #[test]
    fn mps_round_trip((inst, times) in tiny_with_times(), fixed in any::<bool>()) {
        let net = build_arcs(times, &inst, StorageRule::Tight).unwrap();
        let model = build_partial(&net, &inst).unwrap();
        let format = if fixed { MpsFormat::Fixed } else { MpsFormat::Free };
        let (text, map) = export_model(&model, format);
        let back = import_model(&text, Some(&map)).unwrap();
        prop_assert_eq!(back.canonical(), model.canonical());
    }
}
