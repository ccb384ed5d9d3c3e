//! Independent feasibility checks and an exhaustive optimal-makespan search.
//!
//! Nothing here uses the MIP models, so both can serve as oracles for them.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Instance, NodeId, Time};
use crate::schedule::{Move, Schedule, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Flow,
    Throughput,
    Storage,
    Timing,
    Endpoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub commodity: Option<usize>,
    pub node: Option<NodeId>,
    pub arc: Option<usize>,
    pub time: Option<Time>,
    pub measured: u64,
    pub allowed: u64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(k) = self.commodity {
            write!(f, " packet {k}")?;
        }
        if let Some(v) = self.node {
            write!(f, " node {v}")?;
        }
        if let Some(a) = self.arc {
            write!(f, " arc {a}")?;
        }
        if let Some(t) = self.time {
            write!(f, " t={t}")?;
        }
        write!(f, ": measured {} allowed {}", self.measured, self.allowed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    /// Latest arrival at a destination.
    pub makespan: Time,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn kinds(&self) -> Vec<ViolationKind> {
        let mut k: Vec<_> = self.violations.iter().map(|v| v.kind).collect();
        k.sort();
        k.dedup();
        k
    }
}

fn violation(kind: ViolationKind) -> Violation {
    Violation { kind, commodity: None, node: None, arc: None, time: None, measured: 0, allowed: 0 }
}

/// Checks a full-network schedule against the original capacities.
///
/// Errors only on references to unknown arcs or packets; every constraint
/// breach is reported as a [`Violation`].
pub fn check_schedule(inst: &Instance, sched: &Schedule) -> Result<Report> {
    use ViolationKind::*;
    let horizon = inst.horizon;
    let mut out = Vec::new();
    let mut seen = vec![0usize; inst.commodities.len()];
    for tr in &sched.trajectories {
        if tr.commodity >= inst.commodities.len() {
            return Err(Error::MalformedSchedule(format!("unknown packet index {}", tr.commodity)));
        }
        if let Some(m) = tr.moves.iter().find(|m| m.arc >= inst.arcs.len()) {
            return Err(Error::MalformedSchedule(format!("unknown arc {}", m.arc)));
        }
        seen[tr.commodity] += 1;
    }
    for (k, &n) in seen.iter().enumerate() {
        if n != 1 {
            out.push(Violation { commodity: Some(k), measured: n as u64, allowed: 1, ..violation(Endpoint) });
        }
    }

    let mut departures: HashMap<(usize, Time), u64> = HashMap::new();
    let mut held: HashMap<(NodeId, Time), u64> = HashMap::new();
    let mut makespan = 0;
    for tr in &sched.trajectories {
        let k = tr.commodity;
        let c = &inst.commodities[k];
        let mut at = c.origin;
        let mut since: Time = 0;
        let mut aligned = true;
        for m in &tr.moves {
            let a = &inst.arcs[m.arc];
            if a.tail != at || m.depart < since {
                out.push(Violation {
                    commodity: Some(k),
                    node: Some(a.tail),
                    arc: Some(m.arc),
                    time: Some(m.depart),
                    measured: m.depart as u64,
                    allowed: since as u64,
                    ..violation(Flow)
                });
                aligned = false;
            }
            if aligned && inst.is_active(k, at) {
                for t in since..m.depart {
                    *held.entry((at, t)).or_default() += 1;
                }
            }
            if m.arrive != m.depart + a.transit || m.arrive > horizon {
                out.push(Violation {
                    commodity: Some(k),
                    arc: Some(m.arc),
                    time: Some(m.depart),
                    measured: m.arrive as u64,
                    allowed: (m.depart + a.transit).min(horizon) as u64,
                    ..violation(Timing)
                });
            }
            *departures.entry((m.arc, m.depart)).or_default() += 1;
            at = a.head;
            since = m.arrive;
            aligned = true;
        }
        if at != c.dest {
            out.push(Violation { commodity: Some(k), node: Some(at), ..violation(Endpoint) });
        } else {
            makespan = makespan.max(since);
        }
    }
    let mut dep: Vec<_> = departures.into_iter().collect();
    dep.sort();
    for ((a, t), n) in dep {
        let u = inst.arcs[a].throughput;
        if n > u {
            out.push(Violation { arc: Some(a), time: Some(t), measured: n, allowed: u, ..violation(Throughput) });
        }
    }
    let mut held: Vec<_> = held.into_iter().collect();
    held.sort();
    for ((v, t), n) in held {
        let b = inst.storage(v);
        if n > b {
            out.push(Violation { node: Some(v), time: Some(t), measured: n, allowed: b, ..violation(Storage) });
        }
    }
    Ok(Report { makespan, violations: out })
}

/// Size limits for [`brute_force_optimum`].
#[derive(Debug, Clone, Copy)]
pub struct BruteLimits {
    pub max_nodes: usize,
    pub max_packets: usize,
    pub max_horizon: Time,
    /// Search-tree expansions before giving up.
    pub max_expansions: u64,
}

impl Default for BruteLimits {
    fn default() -> Self {
        Self { max_nodes: 6, max_packets: 8, max_horizon: 10, max_expansions: 200_000_000 }
    }
}

/// Exact minimum makespan by exhaustive search over per-packet trajectories.
///
/// Candidate makespans are tried upward from the shortest-transit bound. For
/// each one, every packet's trajectories (walks that end on first reaching the
/// destination, waiting allowed where storage exists) are enumerated and a
/// depth-first search assigns one per packet while tracking arc and storage
/// usage. Packets with the same origin and destination pick trajectories in
/// non-decreasing order. Requires every transit time to be at least 1.
pub fn brute_force_optimum(inst: &Instance, limits: &BruteLimits) -> Result<(Time, Schedule)> {
    if inst.num_nodes() > limits.max_nodes
        || inst.commodities.len() > limits.max_packets
        || inst.horizon > limits.max_horizon
    {
        return Err(Error::LimitsExceeded(format!(
            "instance has {} nodes, {} packets, horizon {}",
            inst.num_nodes(),
            inst.commodities.len(),
            inst.horizon
        )));
    }
    if inst.arcs.iter().any(|a| a.transit == 0) {
        return Err(Error::Unsupported("exhaustive search needs positive transit times".into()));
    }
    inst.ensure_valid()?;
    let mut budget = limits.max_expansions;
    for m in inst.makespan_lower_bound()..=inst.horizon {
        if let Some(s) = feasible_within(inst, m, &mut budget)? {
            return Ok((m, s));
        }
    }
    Err(Error::Infeasible(inst.horizon))
}

fn spend(budget: &mut u64) -> Result<()> {
    if *budget == 0 {
        return Err(Error::LimitsExceeded("expansion cap reached".into()));
    }
    *budget -= 1;
    Ok(())
}

/// All trajectories of one packet finishing by `m`.
fn trajectories(inst: &Instance, k: usize, m: Time, dist: &[Option<Time>], budget: &mut u64) -> Result<Vec<Vec<Move>>> {
    let c = &inst.commodities[k];
    let out = inst.out_arcs();
    let mut found = Vec::new();
    let mut stack: Vec<Move> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn walk(
        inst: &Instance,
        out: &[Vec<usize>],
        k: usize,
        v: NodeId,
        t: Time,
        m: Time,
        dist: &[Option<Time>],
        stack: &mut Vec<Move>,
        found: &mut Vec<Vec<Move>>,
        budget: &mut u64,
    ) -> Result<()> {
        spend(budget)?;
        let c = &inst.commodities[k];
        if v == c.dest {
            found.push(stack.clone());
            return Ok(());
        }
        for &ai in &out[v.0] {
            let a = &inst.arcs[ai];
            let arrive = t + a.transit;
            match dist[a.head.0] {
                Some(d) if arrive + d <= m => {}
                _ => continue,
            }
            stack.push(Move { arc: ai, depart: t, arrive });
            walk(inst, out, k, a.head, arrive, m, dist, stack, found, budget)?;
            stack.pop();
        }
        let can_wait = !inst.is_active(k, v) || inst.storage(v) > 0;
        if can_wait && dist[v.0].is_some_and(|d| t + 1 + d <= m) {
            walk(inst, out, k, v, t + 1, m, dist, stack, found, budget)?;
        }
        Ok(())
    }
    walk(inst, &out, k, c.origin, 0, m, dist, &mut stack, &mut found, budget)?;
    Ok(found)
}

struct Usage {
    arc: HashMap<(usize, Time), u64>,
    held: HashMap<(NodeId, Time), u64>,
}

impl Usage {
    /// Adds a trajectory if it fits; returns whether it was added.
    fn try_add(&mut self, inst: &Instance, k: usize, moves: &[Move]) -> bool {
        self.apply(inst, k, moves, 1);
        let fits = moves.iter().all(|mv| self.arc[&(mv.arc, mv.depart)] <= inst.arcs[mv.arc].throughput)
            && holds(inst, k, moves).all(|(v, t)| self.held[&(v, t)] <= inst.storage(v));
        if !fits {
            self.apply(inst, k, moves, -1);
        }
        fits
    }

    fn apply(&mut self, inst: &Instance, k: usize, moves: &[Move], delta: i64) {
        for mv in moves {
            let e = self.arc.entry((mv.arc, mv.depart)).or_default();
            *e = (*e as i64 + delta) as u64;
        }
        for (v, t) in holds(inst, k, moves) {
            let e = self.held.entry((v, t)).or_default();
            *e = (*e as i64 + delta) as u64;
        }
    }
}

/// Unit storage intervals an active packet occupies along its trajectory.
fn holds<'a>(inst: &'a Instance, k: usize, moves: &'a [Move]) -> impl Iterator<Item = (NodeId, Time)> + 'a {
    moves.windows(2).flat_map(move |w| {
        let v = inst.arcs[w[0].arc].head;
        let active = inst.is_active(k, v);
        (w[0].arrive..w[1].depart).filter(move |_| active).map(move |t| (v, t))
    })
}

fn feasible_within(inst: &Instance, m: Time, budget: &mut u64) -> Result<Option<Schedule>> {
    let mut dist_cache: HashMap<NodeId, Vec<Option<Time>>> = HashMap::new();
    let mut options: Vec<Vec<Vec<Move>>> = Vec::with_capacity(inst.commodities.len());
    for (k, c) in inst.commodities.iter().enumerate() {
        let dist = dist_cache.entry(c.dest).or_insert_with(|| inst.shortest_to(c.dest));
        let mut t = trajectories(inst, k, m, dist, budget)?;
        if t.is_empty() {
            return Ok(None);
        }
        t.sort();
        options.push(t);
    }
    // identical packets adjacent, scarce ones first
    let mut order: Vec<usize> = (0..inst.commodities.len()).collect();
    let key = |k: usize| {
        let c = &inst.commodities[k];
        (c.origin, c.dest)
    };
    let group_size = |k: usize| options[k].len();
    order.sort_by_key(|&k| (group_size(k), key(k), k));
    let mut usage = Usage { arc: HashMap::new(), held: HashMap::new() };
    let mut chosen = vec![0usize; inst.commodities.len()];
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        inst: &Instance,
        order: &[usize],
        pos: usize,
        options: &[Vec<Vec<Move>>],
        usage: &mut Usage,
        chosen: &mut [usize],
        budget: &mut u64,
    ) -> Result<bool> {
        if pos == order.len() {
            return Ok(true);
        }
        let k = order[pos];
        let same_as_prev = pos > 0 && {
            let (p, c) = (&inst.commodities[order[pos - 1]], &inst.commodities[k]);
            p.origin == c.origin && p.dest == c.dest
        };
        let first = if same_as_prev { chosen[order[pos - 1]] } else { 0 };
        for (i, moves) in options[k].iter().enumerate().skip(first) {
            spend(budget)?;
            if !usage.try_add(inst, k, moves) {
                continue;
            }
            chosen[k] = i;
            if dfs(inst, order, pos + 1, options, usage, chosen, budget)? {
                return Ok(true);
            }
            usage.apply(inst, k, moves, -1);
        }
        Ok(false)
    }
    if !dfs(inst, &order, 0, &options, &mut usage, &mut chosen, budget)? {
        return Ok(None);
    }
    let trajectories = (0..inst.commodities.len())
        .map(|k| Trajectory { commodity: k, moves: options[k][chosen[k]].clone() })
        .collect();
    let s = Schedule { horizon: inst.horizon, trajectories };
    let report = check_schedule(inst, &s)?;
    if !report.is_ok() {
        return Err(Error::Solver(format!("search produced an infeasible schedule: {}", report.violations[0])));
    }
    Ok(Some(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::InstanceBuilder;

    fn mv(arc: usize, depart: Time, arrive: Time) -> Move {
        Move { arc, depart, arrive }
    }

    fn sched(h: Time, trs: Vec<Vec<Move>>) -> Schedule {
        Schedule {
            horizon: h,
            trajectories: trs.into_iter().enumerate().map(|(k, moves)| Trajectory { commodity: k, moves }).collect(),
        }
    }

    #[test]
    fn simultaneous_departures() {
        let inst = InstanceBuilder::new(3).nodes(&[0, 0]).arc(0, 1, 1, 1).packets(0, 1, 2).build();
        let r = check_schedule(&inst, &sched(3, vec![vec![mv(0, 0, 1)], vec![mv(0, 0, 1)]])).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, ViolationKind::Throughput);
        let r = check_schedule(&inst, &sched(3, vec![vec![mv(0, 0, 1)], vec![mv(0, 1, 2)]])).unwrap();
        assert!(r.is_ok());
        assert_eq!(r.makespan, 2);
    }

    #[test]
    fn parked_at_bufferless_node() {
        let inst = InstanceBuilder::new(4).nodes(&[0, 0, 0]).arc(0, 1, 1, 1).arc(1, 2, 1, 1).packet(0, 2).build();
        let r = check_schedule(&inst, &sched(4, vec![vec![mv(0, 0, 1), mv(1, 2, 3)]])).unwrap();
        assert_eq!(r.kinds(), vec![ViolationKind::Storage]);
        assert_eq!(r.violations.len(), 1);
        // waiting at the origin is free
        let r = check_schedule(&inst, &sched(4, vec![vec![mv(0, 2, 3), mv(1, 3, 4)]])).unwrap();
        assert!(r.is_ok());
    }

    #[test]
    fn flow_timing_endpoint() {
        let inst = InstanceBuilder::new(4).nodes(&[0, 1, 0]).arc(0, 1, 1, 1).arc(1, 2, 1, 1).packet(0, 2).build();
        let r = check_schedule(&inst, &sched(4, vec![vec![mv(1, 0, 1)]])).unwrap();
        assert_eq!(r.kinds(), vec![ViolationKind::Flow]);
        let r = check_schedule(&inst, &sched(4, vec![vec![mv(0, 0, 1), mv(1, 1, 3)]])).unwrap();
        assert_eq!(r.kinds(), vec![ViolationKind::Timing]);
        let r = check_schedule(&inst, &sched(4, vec![vec![mv(0, 0, 1)]])).unwrap();
        assert_eq!(r.kinds(), vec![ViolationKind::Endpoint]);
        assert!(check_schedule(&inst, &sched(4, vec![vec![mv(7, 0, 1)]])).is_err());
    }

    #[test]
    fn brute_force_small_cases() {
        // one packet, shortest transit 4
        let inst = InstanceBuilder::new(8).nodes(&[0, 0, 0]).arc(0, 1, 2, 1).arc(1, 2, 2, 1).packet(0, 2).build();
        assert_eq!(brute_force_optimum(&inst, &BruteLimits::default()).unwrap().0, 4);
        // two packets share a unit arc; one waits at the origin
        let inst = InstanceBuilder::new(2).nodes(&[1, 0]).arc(0, 1, 1, 1).packets(0, 1, 2).build();
        let (t, s) = brute_force_optimum(&inst, &BruteLimits::default()).unwrap();
        assert_eq!(t, 2);
        assert!(check_schedule(&inst, &s).unwrap().is_ok());
    }

    #[test]
    fn brute_force_bufferless_middle() {
        // s -> m -> d with unit arcs, m bufferless, plus a slower bypass s -> d
        let inst = InstanceBuilder::new(3)
            .nodes(&[0, 0, 0])
            .arc(0, 1, 1, 1)
            .arc(1, 2, 1, 1)
            .arc(0, 2, 3, 1)
            .packets(0, 2, 2)
            .build();
        let (t, _) = brute_force_optimum(&inst, &BruteLimits::default()).unwrap();
        assert_eq!(t, 3);
        let tight = inst.with_horizon(2);
        assert!(matches!(brute_force_optimum(&tight, &BruteLimits::default()), Err(Error::Infeasible(2))));
    }
}
