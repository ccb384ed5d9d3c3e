//! HiGHS backend, enabled with the `highs` feature.

use std::time::Instant;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense as HSense};

use crate::error::Result;

use super::{MipModel, Sense, SolveResult, SolveStatus, SolverBackend, SolverParams, VarKind};

#[derive(Debug, Default, Clone, Copy)]
pub struct HighsBackend;

impl SolverBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&mut self, model: &MipModel, params: &SolverParams) -> Result<SolveResult> {
        let start = Instant::now();
        let mut pb = RowProblem::default();
        let cols: Vec<_> = model
            .vars
            .iter()
            .map(|v| {
                let int = v.kind == VarKind::Binary && !params.relax_integrality;
                pb.add_column_with_integrality(v.objective, v.lower..=v.upper, int)
            })
            .collect();
        for r in &model.rows {
            let terms: Vec<_> = r.coeffs.iter().map(|&(j, c)| (cols[j], c)).collect();
            match r.sense {
                Sense::Le => pb.add_row(..=r.rhs, terms),
                Sense::Ge => pb.add_row(r.rhs.., terms),
                Sense::Eq => pb.add_row(r.rhs..=r.rhs, terms),
            }
        }
        let mut m = pb.optimise(HSense::Minimise);
        m.make_quiet();
        m.set_option("mip_rel_gap", params.rel_gap);
        m.set_option("threads", params.threads.max(1) as i32);
        m.set_option("random_seed", 0);
        if let Some(t) = params.time_limit_s {
            m.set_option("time_limit", t.max(0.0));
        }
        let solved = m.solve();
        let wall_s = start.elapsed().as_secs_f64();
        let has_point = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let status = match solved.status() {
            HighsModelStatus::Optimal => SolveStatus::Optimal,
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => SolveStatus::Infeasible,
            HighsModelStatus::ModelEmpty => SolveStatus::Optimal,
            _ if has_point => SolveStatus::Feasible,
            _ => SolveStatus::TimeLimit,
        };
        let (objective, values) = if matches!(status, SolveStatus::Optimal | SolveStatus::Feasible) {
            let mut x = solved.get_solution().columns().to_vec();
            if !params.relax_integrality {
                for (xi, v) in x.iter_mut().zip(&model.vars) {
                    if v.kind == VarKind::Binary {
                        *xi = xi.round();
                    }
                }
            }
            let obj = model.vars.iter().zip(&x).map(|(v, xi)| v.objective * xi).sum();
            (Some(obj), x)
        } else {
            (None, Vec::new())
        };
        let bound = if params.relax_integrality {
            objective
        } else {
            solved.double_info_value(c"mip_dual_bound").ok().filter(|b| b.is_finite())
        };
        Ok(SolveResult { status, objective, values, bound, wall_s, nodes: 0 })
    }
}
