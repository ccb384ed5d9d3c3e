//! Fully and partially time-expanded networks.
//!
//! A partial network keeps, for every base node, a sorted subset of the time
//! points `0..=T` that always contains `0` and `T`. Movement arcs leave every
//! included copy along every base arc that can still finish by `T`, and land on
//! the latest included copy of the head no later than the true arrival time.
//! Their throughput and the storage on holdover arcs are inflated so that any
//! schedule of the full network maps onto a feasible schedule of the partial
//! one with no larger makespan.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, NodeId, Time};
use crate::schedule::{Move, Schedule, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TimedNode {
    pub node: NodeId,
    pub time: Time,
}

impl TimedNode {
    pub fn new(node: usize, time: Time) -> Self {
        Self { node: NodeId(node), time }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ArcKind {
    Movement,
    Holdover,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimedArc {
    pub from: TimedNode,
    pub to: TimedNode,
    pub kind: ArcKind,
    /// Base arc index for movement arcs.
    pub base_arc: Option<usize>,
    /// Relaxed throughput `u'` (movement) or relaxed storage `b'` (holdover).
    pub capacity: u64,
}

/// Which holdover capacity formula [`build_arcs`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageRule {
    /// `b + U`, or `2b + U` when the next unit copy is missing.
    #[default]
    Tight,
    /// `gap * b + U`; weaker, kept for comparison experiments.
    Relaxed,
}

/// Capacity value that may be unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bound {
    Finite(u64),
    Unbounded,
}

/// Included time points per base node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeSets {
    horizon: Time,
    times: Vec<Vec<Time>>,
}

impl TimeSets {
    /// Every time point `0..=T` at every node.
    pub fn full(num_nodes: usize, horizon: Time) -> Self {
        Self { horizon, times: vec![(0..=horizon).collect(); num_nodes] }
    }

    /// Only `0` and `T` at every node.
    pub fn initial(num_nodes: usize, horizon: Time) -> Self {
        let base = if horizon == 0 { vec![0] } else { vec![0, horizon] };
        Self { horizon, times: vec![base; num_nodes] }
    }

    /// Arbitrary lists; each is sorted and must contain `0` and `T`.
    pub fn from_lists(lists: Vec<Vec<Time>>, horizon: Time) -> Result<Self> {
        let mut times = Vec::with_capacity(lists.len());
        for (v, mut l) in lists.into_iter().enumerate() {
            l.sort_unstable();
            l.dedup();
            if l.first() != Some(&0) || l.last() != Some(&horizon) {
                return Err(Error::BadTimeSet(format!("node {v} lacks copy at 0 or {horizon}")));
            }
            times.push(l);
        }
        Ok(Self { horizon, times })
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn num_nodes(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self, v: NodeId) -> &[Time] {
        &self.times[v.0]
    }

    pub fn lists(&self) -> &[Vec<Time>] {
        &self.times
    }

    /// Total number of timed nodes.
    pub fn len(&self) -> usize {
        self.times.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, v: NodeId, t: Time) -> bool {
        self.times[v.0].binary_search(&t).is_ok()
    }

    /// Adds `(v,t)`; returns whether it was new.
    pub fn insert(&mut self, v: NodeId, t: Time) -> Result<bool> {
        if t > self.horizon {
            return Err(Error::TimeOutOfRange { node: v.0, time: t, horizon: self.horizon });
        }
        let l = &mut self.times[v.0];
        match l.binary_search(&t) {
            Ok(_) => Ok(false),
            Err(pos) => {
                l.insert(pos, t);
                Ok(true)
            }
        }
    }

    /// Whether every time set here is contained in `other`.
    pub fn is_subset_of(&self, other: &TimeSets) -> bool {
        self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .enumerate()
                .all(|(v, l)| l.iter().all(|&t| other.contains(NodeId(v), t)))
    }

    /// Smallest included time strictly after `t`. Defined for absent `t` too.
    pub fn next_time(&self, v: NodeId, t: Time) -> Result<Time> {
        if t >= self.horizon {
            return Err(Error::TimeOutOfRange { node: v.0, time: t, horizon: self.horizon });
        }
        let l = &self.times[v.0];
        let pos = l.partition_point(|&x| x <= t);
        Ok(l[pos])
    }

    /// `next_time(v,t) - t`.
    pub fn gap(&self, v: NodeId, t: Time) -> Result<Time> {
        Ok(self.next_time(v, t)? - t)
    }

    /// Gap, with times at or beyond the horizon counting as 1.
    pub(crate) fn gap_or_one(&self, v: NodeId, t: Time) -> Time {
        self.gap(v, t).unwrap_or(1)
    }

    /// Latest included time not exceeding `t` (0 is always included).
    pub fn latest_at_most(&self, v: NodeId, t: Time) -> Time {
        let l = &self.times[v.0];
        let pos = l.partition_point(|&x| x <= t);
        l[pos - 1]
    }

    /// Dense index of an included timed node, ordered by node then time.
    pub fn index_map(&self) -> TimedNodeIndex {
        let mut offsets = Vec::with_capacity(self.times.len() + 1);
        let mut acc = 0;
        for l in &self.times {
            offsets.push(acc);
            acc += l.len();
        }
        offsets.push(acc);
        TimedNodeIndex { offsets }
    }
}

/// Dense numbering of the timed nodes of a [`TimeSets`].
#[derive(Debug, Clone)]
pub struct TimedNodeIndex {
    offsets: Vec<usize>,
}

impl TimedNodeIndex {
    pub fn get(&self, sets: &TimeSets, v: NodeId, t: Time) -> Option<usize> {
        sets.times[v.0].binary_search(&t).ok().map(|p| self.offsets[v.0] + p)
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A time-expanded network (full or partial) with relaxed capacities.
#[derive(Debug, Clone)]
pub struct PartialNetwork {
    pub horizon: Time,
    pub times: TimeSets,
    pub movement: Vec<TimedArc>,
    pub holdover: Vec<TimedArc>,
    pub rule: StorageRule,
    movement_into: HashMap<TimedNode, Vec<usize>>,
    movement_out: HashMap<(TimedNode, usize), usize>,
    holdover_out: HashMap<TimedNode, usize>,
}

/// The full time-expanded network: every copy, exact arcs, original capacities.
pub fn full_expand(inst: &Instance) -> PartialNetwork {
    build_arcs(TimeSets::full(inst.num_nodes(), inst.horizon), inst, StorageRule::Tight)
        .expect("full time sets satisfy the required copies")
}

/// Copies at `0` and `T` only.
pub fn initial_partial(inst: &Instance) -> PartialNetwork {
    build_arcs(TimeSets::initial(inst.num_nodes(), inst.horizon), inst, StorageRule::Tight)
        .expect("initial time sets satisfy the required copies")
}

/// Generates movement and holdover arcs with relaxed capacities for `times`.
pub fn build_arcs(times: TimeSets, inst: &Instance, rule: StorageRule) -> Result<PartialNetwork> {
    let horizon = inst.horizon;
    if times.horizon != horizon {
        return Err(Error::BadTimeSet(format!(
            "time sets built for horizon {} but instance has {}",
            times.horizon, horizon
        )));
    }
    if times.num_nodes() != inst.num_nodes() {
        return Err(Error::BadTimeSet("node count mismatch".into()));
    }
    for (v, l) in times.times.iter().enumerate() {
        if l.first() != Some(&0) || l.last() != Some(&horizon) {
            return Err(Error::BadTimeSet(format!("node {v} lacks copy at 0 or {horizon}")));
        }
    }
    let out_arcs = inst.out_arcs();
    let mut movement = Vec::new();
    for v in 0..inst.num_nodes() {
        let vid = NodeId(v);
        for &t in times.times(vid) {
            let m = times.gap_or_one(vid, t) as u64;
            for &ai in &out_arcs[v] {
                let a = &inst.arcs[ai];
                if t + a.transit > horizon {
                    continue;
                }
                let landing = times.latest_at_most(a.head, t + a.transit);
                movement.push(TimedArc {
                    from: TimedNode { node: vid, time: t },
                    to: TimedNode { node: a.head, time: landing },
                    kind: ArcKind::Movement,
                    base_arc: Some(ai),
                    capacity: a.throughput * m,
                });
            }
        }
    }
    let mut net = PartialNetwork {
        horizon,
        times,
        movement,
        holdover: Vec::new(),
        rule,
        movement_into: HashMap::new(),
        movement_out: HashMap::new(),
        holdover_out: HashMap::new(),
    };
    for (i, e) in net.movement.iter().enumerate() {
        net.movement_into.entry(e.to).or_default().push(i);
        net.movement_out.insert((e.from, e.base_arc.unwrap()), i);
    }
    let mut holdover = Vec::new();
    for v in 0..inst.num_nodes() {
        let vid = NodeId(v);
        for &t in net.times.times(vid) {
            if t >= horizon {
                continue;
            }
            let next = net.times.next_time(vid, t)?;
            let capacity = match rule {
                StorageRule::Tight => net.storage_bound_tight(inst, vid, t)?,
                StorageRule::Relaxed => net.storage_bound_relaxed(inst, vid, t)?,
            };
            holdover.push(TimedArc {
                from: TimedNode { node: vid, time: t },
                to: TimedNode { node: vid, time: next },
                kind: ArcKind::Holdover,
                base_arc: None,
                capacity,
            });
        }
    }
    for (i, e) in holdover.iter().enumerate() {
        net.holdover_out.insert(e.from, i);
    }
    net.holdover = holdover;
    Ok(net)
}

impl PartialNetwork {
    pub fn num_timed_nodes(&self) -> usize {
        self.times.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.movement.len() + self.holdover.len()
    }

    pub fn contains(&self, v: NodeId, t: Time) -> bool {
        self.times.contains(v, t)
    }

    pub fn next_time(&self, v: NodeId, t: Time) -> Result<Time> {
        self.times.next_time(v, t)
    }

    pub fn gap(&self, v: NodeId, t: Time) -> Result<Time> {
        self.times.gap(v, t)
    }

    /// Movement arcs entering `(v,t)`.
    pub fn movement_into(&self, v: NodeId, t: Time) -> &[usize] {
        self.movement_into
            .get(&TimedNode { node: v, time: t })
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// The timed copy of base arc `arc` leaving `(v,t)`.
    pub fn movement_from(&self, v: NodeId, t: Time, arc: usize) -> Option<usize> {
        self.movement_out.get(&(TimedNode { node: v, time: t }, arc)).copied()
    }

    /// Holdover arc leaving `(v,t)`.
    pub fn holdover_from(&self, v: NodeId, t: Time) -> Option<usize> {
        self.holdover_out.get(&TimedNode { node: v, time: t }).copied()
    }

    fn require_holdover_tail(&self, v: NodeId, t: Time) -> Result<()> {
        if t >= self.horizon {
            return Err(Error::TimeOutOfRange { node: v.0, time: t, horizon: self.horizon });
        }
        if !self.times.contains(v, t) {
            return Err(Error::MissingTimedNode { node: v.0, time: t });
        }
        Ok(())
    }

    /// Timed predecessors of `(v,t)` whose gap feeds the storage slack: the
    /// exact departures `(w, t - tau)` for every base arc into `v`, together
    /// with the tails of movement arcs that currently land on `(v,t)`.
    /// Entries are keyed by (base arc, departure time) and de-duplicated.
    pub fn storage_predecessors(&self, inst: &Instance, v: NodeId, t: Time) -> BTreeSet<(usize, Time)> {
        let mut preds = BTreeSet::new();
        for (ai, a) in inst.arcs.iter().enumerate() {
            if a.head == v && a.transit <= t {
                preds.insert((ai, t - a.transit));
            }
        }
        for &ei in self.movement_into(v, t) {
            let e = &self.movement[ei];
            preds.insert((e.base_arc.unwrap(), e.from.time));
        }
        preds
    }

    /// `U_e`: sum of `u_wv * (gap(w,t') - 1)` over [`Self::storage_predecessors`].
    pub fn storage_slack(&self, inst: &Instance, v: NodeId, t: Time) -> Result<u64> {
        self.require_holdover_tail(v, t)?;
        Ok(self
            .storage_predecessors(inst, v, t)
            .into_iter()
            .map(|(ai, tp)| {
                let a = &inst.arcs[ai];
                a.throughput * (self.times.gap_or_one(a.tail, tp) as u64 - 1)
            })
            .sum())
    }

    /// `b + U` if `(v,t+1)` is included, otherwise `2b + U`.
    pub fn storage_bound_tight(&self, inst: &Instance, v: NodeId, t: Time) -> Result<u64> {
        let slack = self.storage_slack(inst, v, t)?;
        let b = inst.storage(v);
        Ok(if self.times.contains(v, t + 1) { b + slack } else { 2 * b + slack })
    }

    /// `gap(v,t) * b + U`.
    pub fn storage_bound_relaxed(&self, inst: &Instance, v: NodeId, t: Time) -> Result<u64> {
        let slack = self.storage_slack(inst, v, t)?;
        let m = self.times.gap(v, t)? as u64;
        Ok(m * inst.storage(v) + slack)
    }

    /// Star-graph yard bound for a client `v` of unit storage with step `eps`:
    /// 1 when both `(v,t+eps)` and `(w,t-tau_wv+eps)` are included, `2 + U`
    /// when `(v,t+eps)` is missing, and `1 + U` otherwise.
    pub fn storage_bound_cir_ob(&self, inst: &Instance, v: NodeId, t: Time, eps: Time) -> Result<Bound> {
        let hub = star_hub(inst)?;
        if v == hub {
            return Err(Error::Unsupported("the hub of a star is not a client node".into()));
        }
        if inst.storage(v) != 1 {
            return Err(Error::Unsupported(format!("client {v} does not have unit storage")));
        }
        if eps == 0 {
            return Err(Error::Unsupported("discretization step must be positive".into()));
        }
        let slack = self.storage_slack(inst, v, t)?;
        let self_next = t + eps <= self.horizon && self.times.contains(v, t + eps);
        let hub_next = inst.arcs.iter().filter(|a| a.head == v).all(|a| {
            (t + eps)
                .checked_sub(a.transit)
                .is_none_or(|s| s <= self.horizon && self.times.contains(a.tail, s))
        });
        Ok(Bound::Finite(match (self_next, hub_next) {
            (true, true) => 1,
            (false, _) => 2 + slack,
            (true, false) => 1 + slack,
        }))
    }

    /// Yard rule that drops the storage constraint at `(v,t)` whenever either
    /// successor copy is missing.
    pub fn storage_bound_dropped(&self, inst: &Instance, v: NodeId, t: Time, eps: Time) -> Result<Bound> {
        star_hub(inst)?;
        self.require_holdover_tail(v, t)?;
        let self_next = t + eps <= self.horizon && self.times.contains(v, t + eps);
        let hub_next = inst.arcs.iter().filter(|a| a.head == v).all(|a| {
            (t + eps)
                .checked_sub(a.transit)
                .is_none_or(|s| s <= self.horizon && self.times.contains(a.tail, s))
        });
        Ok(if self_next && hub_next { Bound::Finite(inst.storage(v)) } else { Bound::Unbounded })
    }

    /// Maps a full-network schedule into this network.
    ///
    /// Each move departing `v` at `d` is sent to the copy of its base arc
    /// leaving the latest included `(v, h)` with `h <= d`; it lands on the
    /// latest included copy of the head at or before `h + tau`. Closed loops
    /// in the resulting walk are erased, so every packet uses each timed arc
    /// at most once.
    pub fn project_mu(&self, inst: &Instance, sched: &Schedule) -> Schedule {
        let trajectories = sched
            .trajectories
            .iter()
            .map(|tr| {
                let mapped: Vec<Move> = tr
                    .moves
                    .iter()
                    .map(|m| {
                        let a = &inst.arcs[m.arc];
                        let depart = self.times.latest_at_most(a.tail, m.depart.min(self.horizon));
                        let arrive = self.times.latest_at_most(a.head, depart + a.transit);
                        Move { arc: m.arc, depart, arrive }
                    })
                    .collect();
                let origin = inst.commodities[tr.commodity].origin;
                Trajectory { commodity: tr.commodity, moves: self.erase_loops(inst, origin, &mapped) }
            })
            .collect();
        Schedule { horizon: self.horizon, trajectories }
    }

    /// Timed nodes visited by a walk, with the move (if any) used to enter each.
    fn walk_states(&self, inst: &Instance, origin: NodeId, moves: &[Move]) -> Vec<(TimedNode, Option<Move>)> {
        let mut states = vec![(TimedNode { node: origin, time: 0 }, None)];
        let mut at = TimedNode { node: origin, time: 0 };
        let push_holdovers = |states: &mut Vec<(TimedNode, Option<Move>)>, at: &mut TimedNode, until: Time| {
            while at.time < until {
                let next = match self.times.next_time(at.node, at.time) {
                    Ok(n) => n,
                    Err(_) => break,
                };
                *at = TimedNode { node: at.node, time: next };
                states.push((*at, None));
            }
        };
        for m in moves {
            push_holdovers(&mut states, &mut at, m.depart);
            at = TimedNode { node: inst.arcs[m.arc].head, time: m.arrive };
            states.push((at, Some(*m)));
        }
        push_holdovers(&mut states, &mut at, self.horizon);
        states
    }

    fn erase_loops(&self, inst: &Instance, origin: NodeId, moves: &[Move]) -> Vec<Move> {
        let mut kept: Vec<(TimedNode, Option<Move>)> = Vec::new();
        let mut seen: HashMap<TimedNode, usize> = HashMap::new();
        for (node, via) in self.walk_states(inst, origin, moves) {
            if let Some(&j) = seen.get(&node) {
                for (n, _) in kept.drain(j + 1..) {
                    seen.remove(&n);
                }
                continue;
            }
            seen.insert(node, kept.len());
            kept.push((node, via));
        }
        kept.into_iter().filter_map(|(_, m)| m).collect()
    }

    /// Checks a schedule against this network's arcs and relaxed capacities.
    /// Returns human-readable problems; empty means the induced flow is
    /// feasible for the lower-bound model.
    pub fn check_flow(&self, inst: &Instance, sched: &Schedule) -> Vec<String> {
        let mut problems = Vec::new();
        let mut arc_use: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        let mut hold_use: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        for tr in &sched.trajectories {
            let k = tr.commodity;
            let c = &inst.commodities[k];
            let mut at = TimedNode { node: c.origin, time: 0 };
            for m in &tr.moves {
                let a = &inst.arcs[m.arc];
                if a.tail != at.node || m.depart < at.time {
                    problems.push(format!("packet {k}: move on arc {} does not continue its walk", m.arc));
                }
                match self.movement_from(a.tail, m.depart, m.arc) {
                    Some(ei) if self.movement[ei].to.time == m.arrive => {
                        arc_use.entry(ei).or_default().insert(k);
                    }
                    _ => problems.push(format!(
                        "packet {k}: no timed arc ({},{})->({},{}) on base arc {}",
                        a.tail, m.depart, a.head, m.arrive, m.arc
                    )),
                }
                if inst.is_active(k, a.tail) {
                    self.mark_holdovers(a.tail, at.time, m.depart, k, &mut hold_use);
                }
                at = TimedNode { node: a.head, time: m.arrive };
            }
            if at.node != c.dest {
                problems.push(format!("packet {k}: walk ends at {} instead of {}", at.node, c.dest));
            }
        }
        for (ei, ks) in &arc_use {
            let e = &self.movement[*ei];
            if ks.len() as u64 > e.capacity {
                problems.push(format!(
                    "throughput: {} packets on ({},{})->({},{}) with capacity {}",
                    ks.len(),
                    e.from.node,
                    e.from.time,
                    e.to.node,
                    e.to.time,
                    e.capacity
                ));
            }
        }
        for (hi, ks) in &hold_use {
            let e = &self.holdover[*hi];
            if ks.len() as u64 > e.capacity {
                problems.push(format!(
                    "storage: {} packets held at ({},{}) with capacity {}",
                    ks.len(),
                    e.from.node,
                    e.from.time,
                    e.capacity
                ));
            }
        }
        problems
    }

    fn mark_holdovers(
        &self,
        v: NodeId,
        from: Time,
        until: Time,
        k: usize,
        hold_use: &mut HashMap<usize, BTreeSet<usize>>,
    ) {
        let mut t = from;
        while t < until {
            match self.holdover_from(v, t) {
                Some(hi) => {
                    hold_use.entry(hi).or_default().insert(k);
                    t = self.holdover[hi].to.time;
                }
                None => break,
            }
        }
    }

    /// Structured text dump for golden-file comparisons.
    pub fn dump(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            horizon: Time,
            rule: StorageRule,
            times: &'a [Vec<Time>],
            movement: Vec<(usize, Time, usize, Time, usize, u64)>,
            holdover: Vec<(usize, Time, Time, u64)>,
        }
        let d = Dump {
            horizon: self.horizon,
            rule: self.rule,
            times: self.times.lists(),
            movement: self
                .movement
                .iter()
                .map(|e| (e.from.node.0, e.from.time, e.to.node.0, e.to.time, e.base_arc.unwrap(), e.capacity))
                .collect(),
            holdover: self
                .holdover
                .iter()
                .map(|e| (e.from.node.0, e.from.time, e.to.time, e.capacity))
                .collect(),
        };
        let mut s = String::from("{\n");
        s += &format!("  \"horizon\": {},\n  \"rule\": {},\n", d.horizon, serde_json::to_string(&d.rule).unwrap());
        s += "  \"times\": [\n";
        for (i, l) in d.times.iter().enumerate() {
            let sep = if i + 1 < d.times.len() { "," } else { "" };
            s += &format!("    {}{}\n", serde_json::to_string(l).unwrap(), sep);
        }
        s += "  ],\n  \"movement\": [\n";
        for (i, m) in d.movement.iter().enumerate() {
            let sep = if i + 1 < d.movement.len() { "," } else { "" };
            s += &format!("    {}{}\n", serde_json::to_string(m).unwrap(), sep);
        }
        s += "  ],\n  \"holdover\": [\n";
        for (i, h) in d.holdover.iter().enumerate() {
            let sep = if i + 1 < d.holdover.len() { "," } else { "" };
            s += &format!("    {}{}\n", serde_json::to_string(h).unwrap(), sep);
        }
        s += "  ]\n}\n";
        s
    }
}

/// Hub of an out-and-back star: every arc joins the hub and a client, and each
/// client has exactly one arc in each direction.
fn star_hub(inst: &Instance) -> Result<NodeId> {
    let not_star = || Error::Unsupported("base graph is not an out-and-back star".into());
    let first = inst.arcs.first().ok_or_else(not_star)?;
    let hub = [first.tail, first.head]
        .into_iter()
        .find(|&h| inst.arcs.iter().all(|a| a.tail == h || a.head == h))
        .ok_or_else(not_star)?;
    for v in 0..inst.num_nodes() {
        let v = NodeId(v);
        if v == hub {
            continue;
        }
        let ins = inst.arcs.iter().filter(|a| a.head == v).count();
        let outs = inst.arcs.iter().filter(|a| a.tail == v).count();
        if ins != 1 || outs != 1 {
            return Err(not_star());
        }
    }
    Ok(hub)
}
