//! Dynamic discretization discovery.
//!
//! Each iteration solves the relaxed model over the current partial network,
//! tries to turn its solution into a full-network schedule along the same base
//! paths, and otherwise adds the timed nodes that the solution's short,
//! over-throughput and over-storage arcs point at.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expand::{build_arcs, ArcKind, PartialNetwork, StorageRule, TimeSets, TimedNode};
use crate::instance::{Instance, NodeId, Time};
use crate::models::{build_fixed_paths, build_partial, ArcVar, MipModel, SolveResult, SolveStatus, SolverBackend, SolverParams};
use crate::schedule::{Move, Schedule, Trajectory};
use crate::verify::check_schedule;

/// Values at or below this are outside the support.
pub const SUPPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DddOptions {
    /// Stop once `(UB - LB) / UB <= alpha`.
    pub alpha: f64,
    /// Parameters for every model solve; the time limit is replaced by what
    /// is left of `time_limit_s`.
    pub solver: SolverParams,
    /// Overall wall-clock budget.
    pub time_limit_s: Option<f64>,
    /// Solve the upper-bound model every this many iterations (and whenever
    /// the relaxed solution needs no refinement).
    pub ub_every: usize,
    pub max_iterations: Option<usize>,
    pub storage_rule: StorageRule,
}

impl Default for DddOptions {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            solver: SolverParams::default(),
            time_limit_s: None,
            ub_every: 1,
            max_iterations: None,
            storage_rule: StorageRule::Tight,
        }
    }
}

impl DddOptions {
    /// `alpha = 0` with exact solves.
    pub fn exact() -> Self {
        Self { alpha: 0.0, solver: SolverParams::exact(), ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Single,
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DddStatus {
    /// Gap closed to within `alpha`.
    Converged,
    TimeLimit,
    IterationLimit,
}

/// Support arcs by violation and timed nodes requested by each rule.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationCounts {
    /// Support movement arcs landing before their true arrival.
    pub short: usize,
    /// Support movement arcs above the original throughput.
    pub throughput: usize,
    /// Support holdover arcs above the original storage.
    pub storage: usize,
    /// Requests per rule before de-duplication.
    pub requested_short: usize,
    pub requested_throughput: usize,
    pub requested_storage: usize,
    /// New timed nodes per rule after de-duplication; a node requested by
    /// several rules counts for the first of short, throughput, storage.
    pub nodes_short: usize,
    pub nodes_throughput: usize,
    pub nodes_storage: usize,
    /// Storage corrections that found nothing new among exact predecessors
    /// and fell back to the tails of arcs landing on the node.
    pub storage_fallback: usize,
}

impl ViolationCounts {
    pub fn is_clean(&self) -> bool {
        self.short == 0 && self.throughput == 0 && self.storage == 0
    }

    pub fn nodes_added(&self) -> usize {
        self.nodes_short + self.nodes_throughput + self.nodes_storage
    }
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub iteration: usize,
    pub phase: Phase,
    pub lb: Time,
    pub ub: Time,
    pub gap: f64,
    /// Objective of the relaxed model (fractional in phase one).
    pub relaxation: f64,
    pub relaxation_status: SolveStatus,
    pub timed_nodes: usize,
    pub timed_arcs: usize,
    /// `|N| * (T + 1)`.
    pub full_nodes: usize,
    #[serde(flatten)]
    pub violations: ViolationCounts,
    /// Timed nodes added at the end of this iteration.
    pub added: Vec<(usize, Time)>,
    pub ub_horizon: Option<Time>,
    pub ub_value: Option<Time>,
    pub lb_wall_s: f64,
    pub ub_wall_s: f64,
    pub wall_s: f64,
}

#[derive(Debug, Clone)]
pub struct DddResult {
    pub status: DddStatus,
    pub schedule: Option<Schedule>,
    pub lb: Time,
    pub ub: Time,
    pub records: Vec<RunRecord>,
    pub final_times: TimeSets,
}

impl DddResult {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// `|N_S| / |N_T|` for the last network solved.
    pub fn ns_ratio(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.timed_nodes as f64 / r.full_nodes as f64)
    }
}

/// A solution of a model built over timed arcs.
#[derive(Debug, Clone, Copy)]
pub struct Solution<'a> {
    pub model: &'a MipModel,
    pub values: &'a [f64],
}

impl<'a> Solution<'a> {
    pub fn new(model: &'a MipModel, values: &'a [f64]) -> Self {
        Self { model, values }
    }

    fn support(&self) -> impl Iterator<Item = (ArcVar, f64)> + '_ {
        self.model
            .arc_vars
            .iter()
            .zip(self.values)
            .filter_map(|(a, &x)| a.filter(|_| x > SUPPORT_TOL).map(|a| (a, x)))
    }

    /// Latest true arrival `t + tau` over support movement arcs.
    pub fn final_arrival(&self, inst: &Instance) -> Time {
        self.support()
            .filter(|(a, _)| a.kind == ArcKind::Movement)
            .map(|(a, _)| a.from.time + inst.arcs[a.base_arc.unwrap()].transit)
            .max()
            .unwrap_or(0)
    }

    /// Per packet, the timed arcs of an integral solution as a walk from the
    /// origin at time 0, cut at the first arrival at the destination.
    pub fn walks(&self, inst: &Instance) -> Result<Vec<Vec<ArcVar>>> {
        let mut out_of: Vec<HashMap<TimedNode, Vec<ArcVar>>> = vec![HashMap::new(); inst.commodities.len()];
        for (a, x) in self.support() {
            if x > 0.5 {
                out_of[a.commodity].entry(a.from).or_default().push(a);
            }
        }
        let mut walks = Vec::with_capacity(inst.commodities.len());
        for (k, c) in inst.commodities.iter().enumerate() {
            let mut at = TimedNode { node: c.origin, time: 0 };
            let mut walk = Vec::new();
            while !(at.node == c.dest && walk.iter().any(|a: &ArcVar| a.kind == ArcKind::Movement)) {
                let next = out_of[k].get_mut(&at).and_then(Vec::pop).ok_or_else(|| {
                    Error::MalformedSchedule(format!("packet {k} support stops at ({}, {})", at.node, at.time))
                })?;
                walk.push(next);
                at = next.to;
            }
            walks.push(walk);
        }
        Ok(walks)
    }

    /// Base arcs used by each packet, pooled over the whole (possibly
    /// fractional) support.
    pub fn pooled_paths(&self, inst: &Instance) -> Vec<BTreeSet<usize>> {
        let mut paths = vec![BTreeSet::new(); inst.commodities.len()];
        for (a, _) in self.support() {
            if let Some(b) = a.base_arc {
                paths[a.commodity].insert(b);
            }
        }
        paths
    }

    /// Reads an integral solution over exact timed arcs as a schedule.
    /// Fails if a used movement arc lands anywhere but `t + tau`.
    pub fn schedule(&self, inst: &Instance) -> Result<Schedule> {
        let walks = self.walks(inst)?;
        let mut trajectories = Vec::with_capacity(walks.len());
        for (k, walk) in walks.into_iter().enumerate() {
            let mut moves = Vec::new();
            for a in walk.into_iter().filter(|a| a.kind == ArcKind::Movement) {
                let arc = a.base_arc.unwrap();
                let arrive = a.from.time + inst.arcs[arc].transit;
                if arrive != a.to.time {
                    return Err(Error::MalformedSchedule(format!(
                        "packet {k} uses arc {arc} from time {} landing at {} instead of {arrive}",
                        a.from.time, a.to.time
                    )));
                }
                moves.push(Move { arc, depart: a.from.time, arrive });
            }
            trajectories.push(Trajectory { commodity: k, moves });
        }
        Ok(Schedule { horizon: inst.horizon, trajectories })
    }
}

#[derive(Default)]
struct Flow {
    total: f64,
    active: f64,
}

/// Timed nodes that refine `net` given a relaxed solution over it.
#[derive(Debug, Clone, Default)]
pub struct Refinement {
    pub nodes: BTreeSet<TimedNode>,
    pub counts: ViolationCounts,
}

fn refine(net: &PartialNetwork, inst: &Instance, sol: Solution<'_>) -> Refinement {
    let mut flows: BTreeMap<(ArcKind, TimedNode, TimedNode, Option<usize>), Flow> = BTreeMap::new();
    for (a, x) in sol.support() {
        let f = flows.entry((a.kind, a.from, a.to, a.base_arc)).or_default();
        f.total += x;
        if inst.is_active(a.commodity, a.from.node) {
            f.active += x;
        }
    }
    let horizon = net.horizon;
    let fresh = |n: TimedNode| n.time <= horizon && !net.contains(n.node, n.time);
    let mut counts = ViolationCounts::default();
    let mut short = Vec::new();
    let mut thr = Vec::new();
    let mut sto = Vec::new();
    let in_arcs = inst.in_arcs();
    for (&(kind, from, to, base), f) in &flows {
        match kind {
            ArcKind::Movement => {
                let a = &inst.arcs[base.unwrap()];
                if to.time < from.time + a.transit {
                    counts.short += 1;
                    short.push(TimedNode { node: to.node, time: from.time + a.transit });
                }
                if f.total > a.throughput as f64 + SUPPORT_TOL {
                    counts.throughput += 1;
                    thr.push(TimedNode { node: from.node, time: from.time + 1 });
                }
            }
            ArcKind::Holdover => {
                let v = from.node;
                if f.active <= inst.storage(v) as f64 + SUPPORT_TOL {
                    continue;
                }
                counts.storage += 1;
                let t = from.time;
                let mut wanted = Vec::new();
                for &ai in &in_arcs[v.0] {
                    let a = &inst.arcs[ai];
                    if a.transit <= t {
                        let z = TimedNode { node: a.tail, time: t - a.transit + 1 };
                        if !net.contains(z.node, z.time) {
                            wanted.push(z);
                        }
                    }
                }
                wanted.push(TimedNode { node: v, time: t + 1 });
                if !wanted.iter().any(|&n| fresh(n)) {
                    counts.storage_fallback += 1;
                    for &ei in net.movement_into(v, t) {
                        let e = &net.movement[ei];
                        wanted.push(TimedNode { node: e.from.node, time: e.from.time + 1 });
                    }
                }
                sto.extend(wanted);
            }
        }
    }
    counts.requested_short = short.len();
    counts.requested_throughput = thr.len();
    counts.requested_storage = sto.len();
    let mut nodes = BTreeSet::new();
    let mut take = |list: Vec<TimedNode>| list.into_iter().filter(|&n| fresh(n) && nodes.insert(n)).count();
    counts.nodes_short = take(short);
    counts.nodes_throughput = take(thr);
    counts.nodes_storage = take(sto);
    Refinement { nodes, counts }
}

/// Counts violating support arcs and the timed nodes each rule would add.
pub fn classify_violations(net: &PartialNetwork, inst: &Instance, sol: Solution<'_>) -> ViolationCounts {
    refine(net, inst, sol).counts
}

/// The time sets of `net` extended by every node the solution calls for.
/// Errors with [`Error::NothingToAdd`] if no new timed node results.
pub fn augment(net: &PartialNetwork, inst: &Instance, sol: Solution<'_>) -> Result<(TimeSets, Refinement)> {
    let r = refine(net, inst, sol);
    if r.nodes.is_empty() {
        return Err(Error::NothingToAdd);
    }
    let mut times = net.times.clone();
    for n in &r.nodes {
        times.insert(n.node, n.time)?;
    }
    Ok((times, r))
}

/// Result of one upper-bound attempt.
#[derive(Debug, Clone)]
pub struct UpperBound {
    pub ub: Time,
    /// Set when this attempt matched or improved on the incoming bound.
    pub schedule: Option<Schedule>,
    pub horizon: Time,
    pub value: Option<Time>,
}

/// Fixes each packet to the base arcs in `paths` and solves for a schedule
/// with horizon `min(T, ceil((1 + alpha) * t_hat))`.
pub fn compute_ub(
    inst: &Instance,
    paths: &[BTreeSet<usize>],
    t_hat: f64,
    alpha: f64,
    current_ub: Time,
    backend: &mut dyn SolverBackend,
    params: &SolverParams,
) -> Result<UpperBound> {
    let horizon = (((1.0 + alpha) * t_hat - 1e-9).ceil().max(0.0) as Time).min(inst.horizon);
    let mut out = UpperBound { ub: current_ub, schedule: None, horizon, value: None };
    let restricted = inst.with_horizon(horizon);
    let model = match build_fixed_paths(&restricted, paths, horizon) {
        Ok(m) => m,
        Err(Error::NoUsablePath(_)) => return Ok(out),
        Err(e) => return Err(e),
    };
    let mut params = params.clone();
    params.relax_integrality = false;
    let res = backend.solve(&model, &params)?;
    if !res.has_solution() {
        return Ok(out);
    }
    let mut sched = Solution::new(&model, &res.values).schedule(&restricted)?;
    sched.horizon = inst.horizon;
    let report = check_schedule(inst, &sched)?;
    if !report.is_ok() {
        return Err(Error::Solver(format!(
            "fixed-path solution fails verification: {}",
            report.violations[0]
        )));
    }
    out.value = Some(report.makespan);
    if report.makespan <= current_ub {
        out.ub = report.makespan;
        out.schedule = Some(sched);
    }
    Ok(out)
}

struct State {
    times: TimeSets,
    lb: Time,
    ub: Time,
    incumbent: Option<Schedule>,
    records: Vec<RunRecord>,
    start: Instant,
}

enum Stop {
    Converged,
    TimeLimit,
    IterationLimit,
    /// Phase one has nothing left to refine.
    Stalled,
}

fn gap(lb: Time, ub: Time) -> f64 {
    if ub == 0 {
        0.0
    } else {
        (ub.saturating_sub(lb)) as f64 / ub as f64
    }
}

fn remaining(opts: &DddOptions, start: Instant) -> Option<f64> {
    opts.time_limit_s.map(|l| l - start.elapsed().as_secs_f64())
}

fn run_loop(
    inst: &Instance,
    backend: &mut dyn SolverBackend,
    opts: &DddOptions,
    st: &mut State,
    phase: Phase,
) -> Result<Stop> {
    let relaxed = phase == Phase::One;
    let full_nodes = inst.num_nodes() * (inst.horizon as usize + 1);
    let mut exact_lb = false;
    let mut since_ub = 0usize;
    loop {
        if opts.max_iterations.is_some_and(|m| st.records.len() >= m) {
            return Ok(Stop::IterationLimit);
        }
        let left = remaining(opts, st.start);
        if left.is_some_and(|l| l <= 0.0) {
            return Ok(Stop::TimeLimit);
        }
        let iter_start = Instant::now();
        let net = build_arcs(st.times.clone(), inst, opts.storage_rule)?;
        let model = build_partial(&net, inst)?;
        let mut params = opts.solver.clone().with_time_limit(left);
        params.relax_integrality = relaxed;
        if exact_lb {
            params.rel_gap = 0.0;
        }
        let res: SolveResult = backend.solve(&model, &params)?;
        let lb_wall_s = iter_start.elapsed().as_secs_f64();
        match res.status {
            SolveStatus::Infeasible => return Err(Error::Infeasible(inst.horizon)),
            SolveStatus::TimeLimit => return Ok(Stop::TimeLimit),
            _ => {}
        }
        let relaxation = res.objective.expect("solution has an objective");
        let proven = match (res.status, res.bound) {
            (SolveStatus::Optimal, _) => relaxation,
            (_, Some(b)) => b,
            _ => 0.0,
        };
        st.lb = st.lb.max(((proven - 1e-6).ceil().max(0.0) as Time).min(inst.horizon));
        let sol = Solution::new(&model, &res.values);
        let refinement = refine(&net, inst, sol);

        let ub_start = Instant::now();
        let mut ub_horizon = None;
        let mut ub_value = None;
        since_ub += 1;
        if since_ub >= opts.ub_every.max(1) || refinement.nodes.is_empty() || refinement.counts.is_clean() {
            since_ub = 0;
            if !relaxed && refinement.counts.is_clean() {
                // The relaxed schedule is already feasible with original data.
                if let Ok(s) = sol.schedule(inst) {
                    let report = check_schedule(inst, &s)?;
                    if report.is_ok() && (report.makespan < st.ub || st.incumbent.is_none()) {
                        st.ub = report.makespan;
                        st.incumbent = Some(s);
                    }
                }
            }
            let (paths, t_hat) = if relaxed {
                (sol.pooled_paths(inst), sol.final_arrival(inst) as f64)
            } else {
                let walks = sol.walks(inst)?;
                let paths = walks.iter().map(|w| w.iter().filter_map(|a| a.base_arc).collect()).collect::<Vec<_>>();
                (paths, (relaxation - 1e-6).ceil())
            };
            let need = gap(st.lb, st.ub) > opts.alpha + 1e-12 || st.incumbent.is_none();
            if need {
                let mut ub_params = opts.solver.clone().with_time_limit(remaining(opts, st.start));
                ub_params.relax_integrality = false;
                let r = compute_ub(inst, &paths, t_hat, opts.alpha, st.ub, backend, &ub_params)?;
                ub_horizon = Some(r.horizon);
                ub_value = r.value;
                if let Some(s) = r.schedule {
                    if r.ub < st.ub || st.incumbent.is_none() {
                        st.ub = r.ub;
                        st.incumbent = Some(s);
                    }
                }
            }
        }
        let ub_wall_s = ub_start.elapsed().as_secs_f64();
        let g = gap(st.lb, st.ub);
        let done = g <= opts.alpha + 1e-12 && st.incumbent.is_some();
        let added: Vec<(usize, Time)> =
            if done { Vec::new() } else { refinement.nodes.iter().map(|n| (n.node.0, n.time)).collect() };
        st.records.push(RunRecord {
            iteration: st.records.len() + 1,
            phase,
            lb: st.lb,
            ub: st.ub,
            gap: g,
            relaxation,
            relaxation_status: res.status,
            timed_nodes: net.num_timed_nodes(),
            timed_arcs: net.num_arcs(),
            full_nodes,
            violations: refinement.counts.clone(),
            added: added.clone(),
            ub_horizon,
            ub_value,
            lb_wall_s,
            ub_wall_s,
            wall_s: iter_start.elapsed().as_secs_f64(),
        });
        log::debug!(
            "{phase:?} iter {} lb {} ub {} relax {relaxation:.3} nodes {} added {}",
            st.records.len(),
            st.lb,
            st.ub,
            net.num_timed_nodes(),
            added.len()
        );
        if done {
            return Ok(Stop::Converged);
        }
        if added.is_empty() {
            if relaxed {
                return Ok(Stop::Stalled);
            }
            if params.rel_gap > 0.0 || res.status != SolveStatus::Optimal {
                // An inexact relaxed solve can leave a convertible solution
                // with the gap still open; prove the bound before refining.
                exact_lb = true;
                continue;
            }
            return Err(Error::NothingToAdd);
        }
        exact_lb = false;
        for (v, t) in added {
            st.times.insert(NodeId(v), t)?;
        }
    }
}

fn finish(st: State, stop: Stop) -> DddResult {
    let status = match stop {
        Stop::Converged => DddStatus::Converged,
        Stop::TimeLimit => DddStatus::TimeLimit,
        Stop::IterationLimit | Stop::Stalled => DddStatus::IterationLimit,
    };
    DddResult { status, schedule: st.incumbent, lb: st.lb, ub: st.ub, records: st.records, final_times: st.times }
}

fn initial_state(inst: &Instance) -> Result<State> {
    inst.ensure_valid()?;
    Ok(State {
        times: TimeSets::initial(inst.num_nodes(), inst.horizon),
        lb: 0,
        ub: inst.horizon,
        incumbent: None,
        records: Vec::new(),
        start: Instant::now(),
    })
}

/// Integer DDD from the copies at `0` and `T`.
pub fn solve_ddd(inst: &Instance, backend: &mut dyn SolverBackend, opts: &DddOptions) -> Result<DddResult> {
    let mut st = initial_state(inst)?;
    let stop = run_loop(inst, backend, opts, &mut st, Phase::Single)?;
    Ok(finish(st, stop))
}

/// LP-relaxed DDD until it stops refining or converges, then integer DDD
/// from the network it reached.
pub fn solve_two_phase(inst: &Instance, backend: &mut dyn SolverBackend, opts: &DddOptions) -> Result<DddResult> {
    let mut st = initial_state(inst)?;
    let stop = run_loop(inst, backend, opts, &mut st, Phase::One)?;
    let stop = match stop {
        Stop::Stalled => run_loop(inst, backend, opts, &mut st, Phase::Two)?,
        other => other,
    };
    Ok(finish(st, stop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::initial_partial;
    use crate::instance::InstanceBuilder;
    use crate::models::BundledBackend;

    fn exact() -> DddOptions {
        DddOptions::exact()
    }

    #[test]
    fn uncongested_converges_first_iteration() {
        let inst = InstanceBuilder::new(6).nodes(&[0, 0]).arc(0, 1, 6, 2).packets(0, 1, 2).build();
        let r = solve_ddd(&inst, &mut BundledBackend, &exact()).unwrap();
        assert_eq!(r.status, DddStatus::Converged);
        assert_eq!(r.ub, 6);
        assert_eq!(r.records.len(), 1);
        assert!(check_schedule(&inst, r.schedule.as_ref().unwrap()).unwrap().is_ok());
    }

    #[test]
    fn congested_matches_known_optimum() {
        // Three packets, unit throughputs, no storage anywhere.
        let inst = InstanceBuilder::new(8)
            .nodes(&[0, 0, 0, 0])
            .arc(0, 1, 1, 1)
            .arc(1, 3, 2, 1)
            .arc(0, 2, 2, 1)
            .arc(2, 3, 2, 1)
            .packets(0, 3, 3)
            .build();
        let r = solve_ddd(&inst, &mut BundledBackend, &exact()).unwrap();
        assert_eq!(r.status, DddStatus::Converged);
        // Two packets leave at 0 on different routes, the third leaves at 1 on the fast one.
        assert_eq!(r.ub, 4);
        assert!(check_schedule(&inst, r.schedule.as_ref().unwrap()).unwrap().is_ok());
        let two = solve_two_phase(&inst, &mut BundledBackend, &exact()).unwrap();
        assert_eq!(two.ub, 4);
    }

    #[test]
    fn short_arc_rule() {
        let inst = InstanceBuilder::new(6).nodes(&[0, 0]).arc(0, 1, 3, 1).packet(0, 1).build();
        let net = initial_partial(&inst);
        let model = build_partial(&net, &inst).unwrap();
        let mut values = vec![0.0; model.vars.len()];
        for (i, a) in model.arc_vars.iter().enumerate() {
            match a {
                Some(a) if a.kind == ArcKind::Movement && a.from.time == 0 => values[i] = 1.0,
                Some(a) if a.kind == ArcKind::Holdover && a.from.node == NodeId(1) => values[i] = 1.0,
                _ => {}
            }
        }
        values[model.makespan] = 3.0;
        let (times, r) = augment(&net, &inst, Solution::new(&model, &values)).unwrap();
        assert_eq!(r.counts.short, 1);
        assert!(times.contains(NodeId(1), 3));
        assert_eq!(r.nodes.len(), 1);
    }

    #[test]
    fn throughput_rule() {
        let inst = InstanceBuilder::new(8).nodes(&[0, 0]).arc(0, 1, 1, 2).packets(0, 1, 3).build();
        let times = TimeSets::from_lists(vec![vec![0, 4, 8], vec![0, 5, 8]], 8).unwrap();
        let net = build_arcs(times, &inst, StorageRule::Tight).unwrap();
        let model = build_partial(&net, &inst).unwrap();
        let mut values = vec![0.0; model.vars.len()];
        for (i, a) in model.arc_vars.iter().enumerate() {
            if let Some(a) = a {
                let src_hold = a.kind == ArcKind::Holdover && a.from == TimedNode::new(0, 0);
                let mv = a.kind == ArcKind::Movement && a.from == TimedNode::new(0, 4);
                let dst_hold = a.kind == ArcKind::Holdover && a.from == TimedNode::new(1, 5);
                if src_hold || mv || dst_hold {
                    values[i] = 1.0;
                }
            }
        }
        values[model.makespan] = 5.0;
        let c = classify_violations(&net, &inst, Solution::new(&model, &values));
        assert_eq!(c.throughput, 1);
        let (times, _) = augment(&net, &inst, Solution::new(&model, &values)).unwrap();
        assert!(times.contains(NodeId(0), 5));
    }

    #[test]
    fn storage_rule_hits_gapped_predecessor() {
        // Node 2 is fed from node 0 (gap 1 at the predecessor) and node 1 (gap 4).
        let inst = InstanceBuilder::new(8)
            .nodes(&[0, 0, 1, 0])
            .arc(0, 2, 1, 1)
            .arc(1, 2, 1, 1)
            .arc(2, 3, 1, 2)
            .packet(0, 3)
            .packet(1, 3)
            .build();
        let times =
            TimeSets::from_lists(vec![(0..=8).collect(), vec![0, 4, 8], vec![0, 5, 6, 8], vec![0, 8]], 8).unwrap();
        let net = build_arcs(times, &inst, StorageRule::Tight).unwrap();
        let model = build_partial(&net, &inst).unwrap();
        let mut values = vec![0.0; model.vars.len()];
        for (i, a) in model.arc_vars.iter().enumerate() {
            let Some(a) = a else { continue };
            let hold_at = |v: usize, t: Time| a.kind == ArcKind::Holdover && a.from == TimedNode::new(v, t);
            let on = match a.commodity {
                0 => hold_at(0, 0) || hold_at(0, 1) || hold_at(0, 2) || hold_at(0, 3)
                    || (a.kind == ArcKind::Movement && a.from == TimedNode::new(0, 4))
                    || hold_at(2, 5)
                    || (a.kind == ArcKind::Movement && a.from == TimedNode::new(2, 6))
                    || hold_at(3, 0),
                _ => hold_at(1, 0)
                    || (a.kind == ArcKind::Movement && a.from == TimedNode::new(1, 4))
                    || hold_at(2, 5)
                    || (a.kind == ArcKind::Movement && a.from == TimedNode::new(2, 6))
                    || hold_at(3, 0),
            };
            if on {
                values[i] = 1.0;
            }
        }
        let c = classify_violations(&net, &inst, Solution::new(&model, &values));
        assert_eq!(c.storage, 1);
        let (_, r) = augment(&net, &inst, Solution::new(&model, &values)).unwrap();
        // Exact predecessors of (2,5) are (0,4) with gap 1 and (1,4) with gap 4.
        assert!(r.nodes.contains(&TimedNode::new(1, 5)));
        assert!(!r.nodes.contains(&TimedNode::new(0, 5)));
        assert_eq!(r.counts.nodes_storage, 1);
        assert_eq!(r.counts.storage_fallback, 0);
    }

    #[test]
    fn ub_horizon_rounding() {
        let inst = InstanceBuilder::new(10).nodes(&[0, 0]).arc(0, 1, 7, 1).packet(0, 1).build();
        let paths = vec![BTreeSet::from([0])];
        let r = compute_ub(&inst, &paths, 7.0, 0.0, 10, &mut BundledBackend, &SolverParams::exact()).unwrap();
        assert_eq!((r.horizon, r.ub), (7, 7));
        let r = compute_ub(&inst, &paths, 7.0, 0.01, 10, &mut BundledBackend, &SolverParams::exact()).unwrap();
        assert_eq!(r.horizon, 8);
    }

    #[test]
    fn ub_unchanged_when_paths_conflict() {
        let inst = InstanceBuilder::new(6).nodes(&[0, 0]).arc(0, 1, 1, 1).packets(0, 1, 2).build();
        let paths = vec![BTreeSet::from([0]); 2];
        let r = compute_ub(&inst, &paths, 1.0, 0.0, 6, &mut BundledBackend, &SolverParams::exact()).unwrap();
        assert_eq!(r.ub, 6);
        assert!(r.schedule.is_none());
    }
}
