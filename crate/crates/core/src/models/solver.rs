//! Backend contract and the bundled LP-based branch-and-bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOptions, SolveOutcome};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{MipModel, Sense, VarKind};

/// Environment variable naming the default backend (`bundled` or `highs`).
pub const BACKEND_ENV: &str = "SOLVER_BACKEND";

const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub time_limit_s: Option<f64>,
    /// Relative gap at which a solve may stop.
    pub rel_gap: f64,
    pub threads: usize,
    /// Solve the LP relaxation only.
    pub relax_integrality: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { time_limit_s: None, rel_gap: 0.01, threads: 1, relax_integrality: false }
    }
}

impl SolverParams {
    pub fn exact() -> Self {
        Self { rel_gap: 0.0, ..Self::default() }
    }

    pub fn with_time_limit(mut self, secs: Option<f64>) -> Self {
        self.time_limit_s = secs;
        self
    }

    pub fn relaxed(mut self) -> Self {
        self.relax_integrality = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// An incumbent exists but the limit stopped the proof.
    Feasible,
    Infeasible,
    /// Stopped without any incumbent.
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    /// Incumbent values indexed like `MipModel::vars`; empty without one.
    pub values: Vec<f64>,
    pub bound: Option<f64>,
    pub wall_s: f64,
    pub nodes: u64,
}

impl SolveResult {
    pub fn has_solution(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Feasible)
    }

    fn empty(status: SolveStatus, start: Instant) -> Self {
        Self { status, objective: None, values: Vec::new(), bound: None, wall_s: start.elapsed().as_secs_f64(), nodes: 0 }
    }
}

pub trait SolverBackend: Send {
    fn name(&self) -> &'static str;
    fn solve(&mut self, model: &MipModel, params: &SolverParams) -> Result<SolveResult>;
}

/// Backend selected by [`BACKEND_ENV`]; otherwise HiGHS when compiled in,
/// else the bundled one.
pub fn default_backend() -> Result<Box<dyn SolverBackend>> {
    match std::env::var(BACKEND_ENV) {
        Ok(name) if !name.trim().is_empty() => backend_by_name(name.trim()),
        _ => backend_by_name(DEFAULT_BACKEND),
    }
}

#[cfg(feature = "highs")]
pub const DEFAULT_BACKEND: &str = "highs";
#[cfg(not(feature = "highs"))]
pub const DEFAULT_BACKEND: &str = "bundled";

pub fn backend_by_name(name: &str) -> Result<Box<dyn SolverBackend>> {
    match name.to_ascii_lowercase().as_str() {
        "bundled" | "microlp" => Ok(Box::new(BundledBackend)),
        #[cfg(feature = "highs")]
        "highs" => Ok(Box::new(super::HighsBackend)),
        #[cfg(not(feature = "highs"))]
        "highs" => Err(Error::Solver("built without the `highs` feature".into())),
        other => Err(Error::Solver(format!("unknown backend {other}"))),
    }
}

/// Branch-and-bound on top of the `microlp` simplex: binaries are relaxed to
/// `[0,1]`, the open node with the lowest bound is expanded next (deeper nodes
/// and the up-branch first on ties), and the most fractional binary is
/// branched on.
#[derive(Debug, Default, Clone, Copy)]
pub struct BundledBackend;

struct Node {
    /// Parent LP bound, rounded up when the objective is integral.
    bound: f64,
    depth: u32,
    var: usize,
    value: f64,
    parent: Rc<microlp::Solution>,
}

impl Node {
    fn key(&self) -> (f64, u32, bool) {
        (self.bound, self.depth, self.value > 0.5)
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: the "greatest" node is the one to expand next
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    }
}

enum Lp {
    Solved(microlp::Solution),
    Infeasible,
    OutOfTime,
}

fn lp_result(r: std::result::Result<SolveOutcome, microlp::Error>) -> Result<Lp> {
    match r {
        Ok(SolveOutcome::Solution(s)) => Ok(Lp::Solved(s)),
        Ok(SolveOutcome::Interrupted(_)) => Ok(Lp::OutOfTime),
        Err(microlp::Error::Infeasible) => Ok(Lp::Infeasible),
        Err(e) => Err(Error::Solver(e.to_string())),
    }
}

impl SolverBackend for BundledBackend {
    fn name(&self) -> &'static str {
        "bundled"
    }

    fn solve(&mut self, model: &MipModel, params: &SolverParams) -> Result<SolveResult> {
        let start = Instant::now();
        let deadline = params.time_limit_s.map(|s| start + Duration::from_secs_f64(s.max(0.0)));
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<microlp::Variable> =
            model.vars.iter().map(|v| problem.add_var(v.objective, (v.lower, v.upper))).collect();
        for r in &model.rows {
            let op = match r.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Ge => ComparisonOp::Ge,
                Sense::Eq => ComparisonOp::Eq,
            };
            let mut terms: Vec<(microlp::Variable, f64)> = r.coeffs.iter().map(|&(j, c)| (vars[j], c)).collect();
            if terms.is_empty() {
                let ok = match r.sense {
                    Sense::Le => 0.0 <= r.rhs,
                    Sense::Ge => 0.0 >= r.rhs,
                    Sense::Eq => r.rhs == 0.0,
                };
                if ok {
                    continue;
                }
                return Ok(SolveResult::empty(SolveStatus::Infeasible, start));
            }
            terms.sort_by_key(|t| t.0.idx());
            problem.add_constraint(terms, op, r.rhs);
        }
        let mut options = SolveOptions::default();
        options.time_limit = deadline.map(|d| d.saturating_duration_since(Instant::now()));
        let root = match lp_result(problem.solve_with(options))? {
            Lp::Solved(s) => s,
            Lp::Infeasible => return Ok(SolveResult::empty(SolveStatus::Infeasible, start)),
            Lp::OutOfTime => return Ok(SolveResult::empty(SolveStatus::TimeLimit, start)),
        };
        let values = |s: &microlp::Solution| -> Vec<f64> { vars.iter().map(|&v| s.var_value_raw(v)).collect() };
        if params.relax_integrality {
            return Ok(SolveResult {
                status: SolveStatus::Optimal,
                objective: Some(root.objective()),
                values: values(&root),
                bound: Some(root.objective()),
                wall_s: start.elapsed().as_secs_f64(),
                nodes: 1,
            });
        }

        let binaries: Vec<usize> =
            model.vars.iter().enumerate().filter(|(_, v)| v.kind == VarKind::Binary).map(|(j, _)| j).collect();
        let round_bound = |x: f64| if model.objective_integral { (x - INT_TOL).ceil() } else { x };
        let mut incumbent: Option<(f64, Vec<f64>)> = None;
        let prunable = |bound: f64, inc: &Option<(f64, Vec<f64>)>| match inc {
            None => false,
            Some((obj, _)) => {
                let slack = params.rel_gap * obj.abs().max(1.0);
                bound >= obj - 1e-9 || obj - bound <= slack + 1e-9
            }
        };
        let mut heap = BinaryHeap::new();
        let mut nodes = 1u64;
        let mut timed_out = false;
        let mut interrupted_bound = None;

        let visit = |sol: microlp::Solution,
                         depth: u32,
                         heap: &mut BinaryHeap<Node>,
                         incumbent: &mut Option<(f64, Vec<f64>)>| {
            let bound = round_bound(sol.objective());
            if prunable(bound, incumbent) {
                return;
            }
            let x = values(&sol);
            let branch = binaries
                .iter()
                .map(|&j| (j, (x[j] - x[j].round()).abs()))
                .filter(|&(_, f)| f > INT_TOL)
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            match branch {
                None => {
                    let mut x = x;
                    for &j in &binaries {
                        x[j] = x[j].round();
                    }
                    *incumbent = Some((sol.objective(), x));
                }
                Some((j, _)) => {
                    let parent = Rc::new(sol);
                    for value in [0.0, 1.0] {
                        heap.push(Node { bound, depth: depth + 1, var: j, value, parent: Rc::clone(&parent) });
                    }
                }
            }
        };
        visit(root, 0, &mut heap, &mut incumbent);

        while let Some(node) = heap.pop() {
            if prunable(node.bound, &incumbent) {
                continue;
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                heap.push(node);
                timed_out = true;
                break;
            }
            let Node { depth, var, value, parent, bound } = node;
            let state = Rc::try_unwrap(parent).unwrap_or_else(|rc| (*rc).clone());
            nodes += 1;
            match lp_result(state.fix_var(vars[var], value))? {
                Lp::Solved(s) => visit(s, depth, &mut heap, &mut incumbent),
                Lp::Infeasible => {}
                Lp::OutOfTime => {
                    interrupted_bound = Some(bound);
                    timed_out = true;
                    break;
                }
            }
        }

        let open_bound = heap.iter().map(|n| n.bound).chain(interrupted_bound).min_by(|a, b| a.total_cmp(b));
        let wall_s = start.elapsed().as_secs_f64();
        Ok(match incumbent {
            Some((obj, x)) => {
                let bound = if timed_out { open_bound.map_or(obj, |b| b.min(obj)) } else { obj };
                SolveResult {
                    status: if timed_out { SolveStatus::Feasible } else { SolveStatus::Optimal },
                    objective: Some(obj),
                    values: x,
                    bound: Some(bound),
                    wall_s,
                    nodes,
                }
            }
            None if timed_out => SolveResult {
                status: SolveStatus::TimeLimit,
                objective: None,
                values: Vec::new(),
                bound: open_bound,
                wall_s,
                nodes,
            },
            None => SolveResult {
                status: SolveStatus::Infeasible,
                objective: None,
                values: Vec::new(),
                bound: None,
                wall_s,
                nodes,
            },
        })
    }
}
