//! Row generation for the full, partial and fixed-path formulations.
//!
//! Per packet, a timed arc only gets a variable if its tail is reachable from
//! `(origin, 0)` and `(dest, T)` is reachable from its head; every other
//! variable is zero in any feasible solution. The same filter is applied by
//! all three builders.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::expand::{ArcKind, PartialNetwork, TimeSets, TimedNode};
use crate::instance::{Instance, NodeId, Time};

use super::{ArcVar, MipModel, Sense, VarKind, Variable};

struct GraphArc {
    from: TimedNode,
    to: TimedNode,
    kind: ArcKind,
    base_arc: Option<usize>,
    capacity: u64,
    /// Coefficient in the timing rows.
    timing: f64,
}

struct TimedGraph {
    horizon: Time,
    times: TimeSets,
    arcs: Vec<GraphArc>,
}

/// UPR over the fully expanded network with horizon `inst.horizon`.
pub fn build_full(inst: &Instance) -> MipModel {
    let g = full_graph(inst, inst.horizon);
    emit(inst, &g, None, "full").expect("full model has no path restrictions")
}

/// The relaxed model over a partial network. Timing rows charge the true
/// arrival `t + tau`, not the (possibly earlier) head time.
pub fn build_partial(net: &PartialNetwork, inst: &Instance) -> Result<MipModel> {
    check_properties(net, inst)?;
    let mut arcs = Vec::with_capacity(net.num_arcs());
    for e in &net.movement {
        let a = e.base_arc.unwrap();
        arcs.push(GraphArc {
            from: e.from,
            to: e.to,
            kind: ArcKind::Movement,
            base_arc: Some(a),
            capacity: e.capacity,
            timing: (e.from.time + inst.arcs[a].transit) as f64,
        });
    }
    for e in &net.holdover {
        arcs.push(GraphArc {
            from: e.from,
            to: e.to,
            kind: ArcKind::Holdover,
            base_arc: None,
            capacity: e.capacity,
            timing: 0.0,
        });
    }
    let g = TimedGraph { horizon: net.horizon, times: net.times.clone(), arcs };
    emit(inst, &g, None, "partial")
}

/// Fixed-path model: packet `k` may only use the base arcs in `paths[k]` (and
/// wait at their endpoints), over the full network with horizon `horizon`.
pub fn build_fixed_paths(inst: &Instance, paths: &[BTreeSet<usize>], horizon: Time) -> Result<MipModel> {
    if paths.len() != inst.commodities.len() {
        return Err(Error::InvalidInstance(format!(
            "{} path sets for {} commodities",
            paths.len(),
            inst.commodities.len()
        )));
    }
    for (k, set) in paths.iter().enumerate() {
        let c = &inst.commodities[k];
        if !base_path_exists(inst, set, c.origin, c.dest) {
            return Err(Error::NoUsablePath(c.id));
        }
    }
    let g = full_graph(inst, horizon);
    emit(inst, &g, Some(paths), "fixed_paths")
}

fn full_graph(inst: &Instance, horizon: Time) -> TimedGraph {
    let mut arcs = Vec::new();
    for v in 0..inst.num_nodes() {
        for t in 0..=horizon {
            for (ai, a) in inst.arcs.iter().enumerate() {
                if a.tail.0 != v || t + a.transit > horizon {
                    continue;
                }
                arcs.push(GraphArc {
                    from: TimedNode::new(v, t),
                    to: TimedNode { node: a.head, time: t + a.transit },
                    kind: ArcKind::Movement,
                    base_arc: Some(ai),
                    capacity: a.throughput,
                    timing: (t + a.transit) as f64,
                });
            }
        }
    }
    for v in 0..inst.num_nodes() {
        for t in 0..horizon {
            arcs.push(GraphArc {
                from: TimedNode::new(v, t),
                to: TimedNode::new(v, t + 1),
                kind: ArcKind::Holdover,
                base_arc: None,
                capacity: inst.nodes[v].storage,
                timing: 0.0,
            });
        }
    }
    TimedGraph { horizon, times: TimeSets::full(inst.num_nodes(), horizon), arcs }
}

fn base_path_exists(inst: &Instance, allowed: &BTreeSet<usize>, s: NodeId, t: NodeId) -> bool {
    let mut seen = vec![false; inst.num_nodes()];
    let mut queue = VecDeque::from([s]);
    seen[s.0] = true;
    while let Some(v) = queue.pop_front() {
        if v == t {
            return true;
        }
        for &ai in allowed {
            let Some(a) = inst.arcs.get(ai) else { continue };
            if a.tail == v && !seen[a.head.0] {
                seen[a.head.0] = true;
                queue.push_back(a.head);
            }
        }
    }
    false
}

/// P2 and P4 for every movement arc, P1 via the time sets.
fn check_properties(net: &PartialNetwork, inst: &Instance) -> Result<()> {
    for e in &net.movement {
        let a = &inst.arcs[e.base_arc.unwrap()];
        let latest = e.from.time + a.transit;
        if e.to.time > latest {
            return Err(Error::Property(format!("arc from ({},{}) is longer than its transit", e.from.node, e.from.time)));
        }
        if net.times.latest_at_most(a.head, latest) != e.to.time {
            return Err(Error::Property(format!(
                "arc from ({},{}) does not land on the latest copy",
                e.from.node, e.from.time
            )));
        }
    }
    Ok(())
}

fn emit(inst: &Instance, g: &TimedGraph, allowed: Option<&[BTreeSet<usize>]>, name: &str) -> Result<MipModel> {
    let horizon = g.horizon;
    let index = g.times.index_map();
    let idx = |n: TimedNode| index.get(&g.times, n.node, n.time).expect("timed arc endpoint is included");
    let num_tn = index.len();
    let mut out_of: Vec<Vec<usize>> = vec![Vec::new(); num_tn];
    let mut into: Vec<Vec<usize>> = vec![Vec::new(); num_tn];
    for (i, e) in g.arcs.iter().enumerate() {
        out_of[idx(e.from)].push(i);
        into[idx(e.to)].push(i);
    }

    let node_list: Vec<TimedNode> = (0..g.times.num_nodes())
        .flat_map(|v| g.times.times(NodeId(v)).iter().map(move |&t| TimedNode::new(v, t)))
        .collect();

    let mut m = MipModel::new(name);
    m.objective_integral = true;
    m.makespan = m.add_var(
        Variable {
            name: "makespan".into(),
            kind: VarKind::Continuous,
            lower: 0.0,
            upper: horizon as f64,
            objective: 1.0,
        },
        None,
    );
    let mut arc_users: Vec<Vec<usize>> = vec![Vec::new(); g.arcs.len()];

    for (k, c) in inst.commodities.iter().enumerate() {
        let allowed_arc = |e: &GraphArc| match (allowed, e.kind) {
            (None, _) => true,
            (Some(p), ArcKind::Movement) => p[k].contains(&e.base_arc.unwrap()),
            (Some(p), ArcKind::Holdover) => {
                let v = e.from.node;
                v == c.origin || v == c.dest || p[k].iter().any(|&a| inst.arcs[a].tail == v || inst.arcs[a].head == v)
            }
        };
        let usable: Vec<bool> = g.arcs.iter().map(allowed_arc).collect();
        let source = idx(TimedNode { node: c.origin, time: 0 });
        let sink = idx(TimedNode { node: c.dest, time: horizon });
        let fwd = reach(source, num_tn, |n| {
            out_of[n].iter().filter(|&&i| usable[i]).map(|&i| idx(g.arcs[i].to)).collect()
        });
        let bwd = reach(sink, num_tn, |n| {
            into[n].iter().filter(|&&i| usable[i]).map(|&i| idx(g.arcs[i].from)).collect()
        });

        let mut var_of: HashMap<usize, usize> = HashMap::new();
        for (i, e) in g.arcs.iter().enumerate() {
            if !usable[i] || !fwd[idx(e.from)] || !bwd[idx(e.to)] {
                continue;
            }
            let vname = match e.kind {
                ArcKind::Movement => format!(
                    "x{k}_{}_{}_{}_{}_{}",
                    e.from.node, e.from.time, e.to.node, e.to.time, e.base_arc.unwrap()
                ),
                ArcKind::Holdover => format!("h{k}_{}_{}", e.from.node, e.from.time),
            };
            let j = m.add_var(
                Variable { name: vname, kind: VarKind::Binary, lower: 0.0, upper: 1.0, objective: 0.0 },
                Some(ArcVar { commodity: k, kind: e.kind, from: e.from, to: e.to, base_arc: e.base_arc }),
            );
            var_of.insert(i, j);
            arc_users[i].push(j);
        }

        // timing rows and the final-arrival row
        let mut final_terms = Vec::new();
        let mut arcs_sorted: Vec<(&usize, &usize)> = var_of.iter().collect();
        arcs_sorted.sort();
        for (&i, &j) in arcs_sorted {
            let e = &g.arcs[i];
            if e.kind != ArcKind::Movement {
                continue;
            }
            m.add_row(
                format!("time_{}", m.vars[j].name),
                vec![(j, e.timing), (m.makespan, -1.0)],
                Sense::Le,
                0.0,
            );
            if e.to.node == c.dest {
                final_terms.push((j, e.timing));
            }
        }
        if !final_terms.is_empty() {
            final_terms.push((m.makespan, -1.0));
            m.add_row(format!("final{k}"), final_terms, Sense::Le, 0.0);
        }

        // flow conservation on every timed node touched by a kept arc
        let mut touched: BTreeSet<usize> = BTreeSet::from([source, sink]);
        for &i in var_of.keys() {
            touched.insert(idx(g.arcs[i].from));
            touched.insert(idx(g.arcs[i].to));
        }
        for n in touched {
            let mut coeffs = Vec::new();
            for i in &out_of[n] {
                if let Some(&j) = var_of.get(i) {
                    coeffs.push((j, 1.0));
                }
            }
            for i in &into[n] {
                if let Some(&j) = var_of.get(i) {
                    coeffs.push((j, -1.0));
                }
            }
            let rhs = if n == source {
                1.0
            } else if n == sink {
                -1.0
            } else {
                0.0
            };
            let tn = node_list[n];
            m.add_row(format!("flow{k}_{}_{}", tn.node, tn.time), coeffs, Sense::Eq, rhs);
        }
    }

    // throughput and storage rows, emitted only when they can bind
    for (i, e) in g.arcs.iter().enumerate() {
        let users: Vec<usize> = match e.kind {
            ArcKind::Movement => arc_users[i].clone(),
            ArcKind::Holdover => arc_users[i]
                .iter()
                .copied()
                .filter(|&j| inst.is_active(m.arc_vars[j].unwrap().commodity, e.from.node))
                .collect(),
        };
        if users.len() as u64 <= e.capacity {
            continue;
        }
        let rname = match e.kind {
            ArcKind::Movement => format!(
                "cap_{}_{}_{}_{}_{}",
                e.from.node, e.from.time, e.to.node, e.to.time, e.base_arc.unwrap()
            ),
            ArcKind::Holdover => format!("sto_{}_{}", e.from.node, e.from.time),
        };
        m.add_row(rname, users.into_iter().map(|j| (j, 1.0)).collect(), Sense::Le, e.capacity as f64);
    }
    Ok(m)
}

fn reach(start: usize, n: usize, next: impl Fn(usize) -> Vec<usize>) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for y in next(x) {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::{full_expand, initial_partial};
    use crate::instance::InstanceBuilder;

    #[test]
    fn saturated_partial_equals_full() {
        let inst = InstanceBuilder::new(4)
            .nodes(&[1, 0, 2, 0])
            .arc(0, 1, 1, 1)
            .arc(1, 3, 1, 1)
            .arc(0, 2, 1, 2)
            .arc(2, 3, 2, 1)
            .packets(0, 3, 3)
            .build();
        let full = build_full(&inst);
        let part = build_partial(&full_expand(&inst), &inst).unwrap();
        assert_eq!(full.canonical(), part.canonical());
    }

    #[test]
    fn pruning_drops_unreachable_arcs() {
        // arc 2->0 can never be used by a packet 0->1
        let inst = InstanceBuilder::new(3).nodes(&[0, 0, 0]).arc(0, 1, 1, 1).arc(2, 0, 1, 1).packet(0, 1).build();
        let m = build_full(&inst);
        assert!(m.arc_vars.iter().flatten().all(|a| a.base_arc != Some(1)));
        assert!(m.arc_vars.iter().flatten().all(|a| a.from.node.0 != 2 && a.to.node.0 != 2));
    }

    #[test]
    fn fixed_paths_reject_missing_path() {
        let inst = InstanceBuilder::new(3).nodes(&[0, 0, 0]).arc(0, 1, 1, 1).arc(1, 2, 1, 1).packet(0, 2).build();
        let err = build_fixed_paths(&inst, &[BTreeSet::from([0])], 3).unwrap_err();
        assert!(matches!(err, Error::NoUsablePath(0)));
        let m = build_fixed_paths(&inst, &[BTreeSet::from([0, 1])], 3).unwrap();
        assert!(m.num_binaries() > 0);
    }

    #[test]
    fn empty_commodity_set() {
        let inst = InstanceBuilder::new(3).nodes(&[0, 0]).arc(0, 1, 1, 1).build();
        let m = build_full(&inst);
        assert_eq!(m.vars.len(), 1);
        assert!(m.rows.is_empty());
        let m = build_partial(&initial_partial(&inst), &inst).unwrap();
        assert_eq!(m.vars.len(), 1);
    }
}
