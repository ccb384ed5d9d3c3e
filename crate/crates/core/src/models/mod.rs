//! Solver-agnostic MIP models over timed networks.

mod build;
#[cfg(feature = "highs")]
mod highs;
mod mps;
mod solver;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::expand::{ArcKind, TimedNode};

pub use build::{build_fixed_paths, build_full, build_partial};
#[cfg(feature = "highs")]
pub use highs::HighsBackend;
pub use mps::{export_model, import_model, MpsFormat, NameMap};
pub use solver::{
    backend_by_name, default_backend, BundledBackend, DEFAULT_BACKEND, SolveResult, SolveStatus, SolverBackend, SolverParams,
    BACKEND_ENV,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// The timed arc and packet behind a binary variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArcVar {
    /// Commodity position in `Instance::commodities`.
    pub commodity: usize,
    pub kind: ArcKind,
    pub from: TimedNode,
    pub to: TimedNode,
    pub base_arc: Option<usize>,
}

/// Minimize a single makespan variable subject to linear rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    pub name: String,
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Index of the makespan variable.
    pub makespan: usize,
    /// `arc_vars[i]` describes variable `i`; `None` for the makespan.
    pub arc_vars: Vec<Option<ArcVar>>,
    /// Every integral solution has an integral objective value, so a node
    /// bound can be rounded up before pruning.
    pub objective_integral: bool,
}

impl MipModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            vars: Vec::new(),
            rows: Vec::new(),
            makespan: 0,
            arc_vars: Vec::new(),
            objective_integral: false,
        }
    }

    pub fn add_var(&mut self, var: Variable, arc: Option<ArcVar>) -> usize {
        self.vars.push(var);
        self.arc_vars.push(arc);
        self.vars.len() - 1
    }

    pub fn add_row(&mut self, name: impl Into<String>, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Row { name: name.into(), coeffs, sense, rhs });
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Sorted textual form with rows and variables identified by name only,
    /// for order-independent comparison of two models.
    pub fn canonical(&self) -> Vec<String> {
        let mut lines = BTreeSet::new();
        for v in &self.vars {
            lines.insert(format!(
                "var {} {:?} [{}, {}] obj {}",
                v.name, v.kind, v.lower, v.upper, v.objective
            ));
        }
        for r in &self.rows {
            let mut terms: Vec<(&str, f64)> = r.coeffs.iter().map(|&(i, c)| (self.vars[i].name.as_str(), c)).collect();
            terms.sort_by(|a, b| a.0.cmp(b.0));
            let mut s = format!("row {} {:?} {}:", r.name, r.sense, r.rhs);
            for (n, c) in terms {
                let _ = write!(s, " {c}*{n}");
            }
            lines.insert(s);
        }
        lines.into_iter().collect()
    }

    /// Checks `values` against bounds, integrality and every row.
    pub fn violated_rows(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut bad = Vec::new();
        for (v, &x) in self.vars.iter().zip(values) {
            if x < v.lower - tol || x > v.upper + tol {
                bad.push(format!("bound {}", v.name));
            }
            if v.kind == VarKind::Binary && (x - x.round()).abs() > tol {
                bad.push(format!("integrality {}", v.name));
            }
        }
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().map(|&(i, c)| c * values[i]).sum();
            let ok = match r.sense {
                Sense::Le => lhs <= r.rhs + tol,
                Sense::Ge => lhs >= r.rhs - tol,
                Sense::Eq => (lhs - r.rhs).abs() <= tol,
            };
            if !ok {
                bad.push(r.name.clone());
            }
        }
        bad
    }
}
