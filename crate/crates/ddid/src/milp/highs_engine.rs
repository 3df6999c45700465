//! In-process engine backed by HiGHS.

use std::ffi::CString;
use std::time::Instant;

use highs::{HighsModelStatus, RowProblem, Sense};

use crate::error::MilpError;
use crate::milp::engine::{Engine, SolveParams};
use crate::milp::model::{Cmp, MilpModel, MilpSolution, ObjSense, SolveStatus, VarKind};

/// HiGHS in-process engine.
#[derive(Debug, Default, Clone)]
pub struct HighsEngine;

impl HighsEngine {
    pub fn new() -> Self {
        Self
    }
}

impl Engine for HighsEngine {
    fn name(&self) -> &str {
        "highs"
    }

    fn solve(&self, model: &MilpModel, params: &SolveParams) -> Result<MilpSolution, MilpError> {
        model.validate()?;
        let start = Instant::now();

        let mut pb = RowProblem::default();
        let mut obj = vec![0.0; model.num_vars()];
        for (id, c) in &model.obj_terms {
            obj[id.0] += c;
        }
        let mut cols = Vec::with_capacity(model.num_vars());
        let mut any_integer = false;
        for (i, v) in model.variables.iter().enumerate() {
            let integer = v.kind == VarKind::Binary;
            any_integer |= integer;
            cols.push(pb.add_column_with_integrality(obj[i], v.lo..=v.hi, integer));
        }
        for c in &model.constraints {
            let terms: Vec<_> = c.terms.iter().map(|(id, a)| (cols[id.0], *a)).collect();
            match c.sense {
                Cmp::Le => pb.add_row(..=c.rhs, &terms),
                Cmp::Ge => pb.add_row(c.rhs.., &terms),
                Cmp::Eq => pb.add_row(c.rhs..=c.rhs, &terms),
            }
        }

        let sense = match model.obj_sense {
            ObjSense::Min => Sense::Minimise,
            ObjSense::Max => Sense::Maximise,
        };
        let mut m = pb.optimise(sense);
        m.set_option("output_flag", false);
        m.set_option("time_limit", params.time_limit_s);
        m.set_option("mip_rel_gap", params.mip_gap);
        m.set_option("threads", params.threads as i32);
        m.set_option("random_seed", params.seed as i32);

        let solved = m.solve();
        let wall_time_s = start.elapsed().as_secs_f64();
        let mut warnings = Vec::new();

        let raw_status = solved.status();
        let have_primal = primal_feasible(&solved);
        let status = match raw_status {
            HighsModelStatus::Optimal => SolveStatus::Optimal,
            HighsModelStatus::Infeasible => SolveStatus::Infeasible,
            HighsModelStatus::Unbounded => SolveStatus::Unbounded,
            HighsModelStatus::UnboundedOrInfeasible => {
                warnings.push("engine reported unbounded-or-infeasible".to_string());
                SolveStatus::Unbounded
            }
            HighsModelStatus::ReachedTimeLimit | HighsModelStatus::ReachedIterationLimit => {
                if have_primal {
                    SolveStatus::FeasibleAtLimit
                } else {
                    warnings.push("limit reached before any feasible solution".to_string());
                    SolveStatus::Error
                }
            }
            HighsModelStatus::ModelEmpty => SolveStatus::Optimal,
            other => {
                warnings.push(format!("engine status {other:?}"));
                SolveStatus::Error
            }
        };

        let (objective, values_by_index) = if status.has_solution() {
            let sol = solved.get_solution();
            let values = sol.columns().to_vec();
            (model.objective_at(&values), values)
        } else {
            (f64::NAN, Vec::new())
        };

        let best_bound = match status {
            SolveStatus::Optimal => objective,
            SolveStatus::FeasibleAtLimit => {
                if any_integer {
                    dual_bound(&solved).map(|b| b + model.obj_constant).unwrap_or(objective)
                } else {
                    objective
                }
            }
            _ => f64::NAN,
        };

        let values = if status.has_solution() {
            model
                .variables
                .iter()
                .zip(&values_by_index)
                .map(|(v, x)| (v.name.clone(), *x))
                .collect()
        } else {
            Default::default()
        };

        Ok(MilpSolution {
            status,
            objective,
            best_bound,
            values,
            values_by_index,
            wall_time_s,
            nodes: node_count(&solved),
            warnings,
        })
    }
}

fn info_f64(solved: &highs::SolvedModel, name: &str) -> Option<f64> {
    let cname = CString::new(name).ok()?;
    let mut out = 0.0_f64;
    let status = unsafe {
        highs_sys::Highs_getDoubleInfoValue(solved.as_ptr(), cname.as_ptr(), &mut out)
    };
    (status == highs_sys::STATUS_OK).then_some(out)
}

fn info_i64(solved: &highs::SolvedModel, name: &str) -> Option<i64> {
    let cname = CString::new(name).ok()?;
    let mut out = 0_i64;
    let status = unsafe {
        highs_sys::Highs_getInt64InfoValue(solved.as_ptr(), cname.as_ptr(), &mut out)
    };
    (status == highs_sys::STATUS_OK).then_some(out)
}

fn info_i32(solved: &highs::SolvedModel, name: &str) -> Option<i32> {
    let cname = CString::new(name).ok()?;
    let mut out = 0_i32;
    let status =
        unsafe { highs_sys::Highs_getIntInfoValue(solved.as_ptr(), cname.as_ptr(), &mut out) };
    (status == highs_sys::STATUS_OK).then_some(out)
}

fn primal_feasible(solved: &highs::SolvedModel) -> bool {
    // kSolutionStatusFeasible == 2 in the HiGHS C API.
    info_i32(solved, "primal_solution_status") == Some(2)
}

fn dual_bound(solved: &highs::SolvedModel) -> Option<f64> {
    info_f64(solved, "mip_dual_bound").filter(|b| b.is_finite())
}

fn node_count(solved: &highs::SolvedModel) -> Option<u64> {
    info_i64(solved, "mip_node_count").and_then(|n| u64::try_from(n).ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::VarId;

    fn engine() -> HighsEngine {
        HighsEngine::new()
    }

    #[test]
    fn box_lp_minimum_is_lower_bound() {
        let mut m = MilpModel::new("box", ObjSense::Min);
        let x = m.add_var("x", 0.0, 1.0);
        m.set_obj(x, 1.0);
        let sol = engine().solve(&m, &SolveParams::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 0.0).abs() < 1e-9);
    }

    #[test]
    fn binary_knapsack_row() {
        let mut m = MilpModel::new("bin", ObjSense::Max);
        let x = m.add_binary("x");
        let y = m.add_binary("y");
        m.set_obj(x, 1.0);
        m.set_obj(y, 1.0);
        m.add_constr("cap", vec![(x, 1.0), (y, 1.0)], Cmp::Le, 1.0);
        let sol = engine().solve(&m, &SolveParams::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!((sol.best_bound - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut m = MilpModel::new("inf", ObjSense::Min);
        let x = m.add_var("x", 0.0, 1.0);
        m.add_constr("lo", vec![(x, 1.0)], Cmp::Ge, 1.0);
        m.add_constr("hi", vec![(x, 1.0)], Cmp::Le, 0.0);
        let sol = engine().solve(&m, &SolveParams::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn repeated_solves_are_deterministic() {
        let mut m = MilpModel::new("det", ObjSense::Max);
        let vars: Vec<_> = (0..6).map(|i| m.add_binary(format!("b{i}"))).collect();
        for (i, v) in vars.iter().enumerate() {
            m.set_obj(*v, 1.0 + 0.1 * i as f64);
        }
        m.add_constr("cap", vars.iter().map(|v| (*v, 1.0)).collect(), Cmp::Le, 3.0);
        let params = SolveParams::default();
        let a = engine().solve(&m, &params).unwrap();
        let b = engine().solve(&m, &params).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.values_by_index, b.values_by_index);
    }

    /// Emit → solve → write the solution file → parse: the parsed point
    /// re-verifies every constraint of the model.
    #[test]
    fn solution_file_round_trip_reverifies_constraints() {
        use crate::milp::lp_format::{emit_model_file, format_solution_file, parse_solution_file};
        let mut m = MilpModel::new("rt", ObjSense::Min);
        let x = m.add_var("x", 0.0, 5.0);
        let b = m.add_binary("pick");
        m.set_obj(x, 1.0);
        m.set_obj(b, -2.0);
        m.add_constr("link", vec![(x, 1.0), (b, -1.5)], Cmp::Ge, 0.25);
        let _ = emit_model_file(&m).unwrap();
        let solved = engine().solve(&m, &SolveParams::default()).unwrap();
        let text = format_solution_file(&m, &solved);
        let parsed = parse_solution_file(&m, &text).unwrap();
        assert!(m.max_violation(&parsed.values_by_index) <= 1e-6);
        assert!((parsed.objective - solved.objective).abs() <= 1e-6);
    }

    #[test]
    fn objective_constant_is_included() {
        let mut m = MilpModel::new("const", ObjSense::Min);
        let x = m.add_var("x", 2.0, 3.0);
        m.set_obj(x, 1.0);
        m.obj_constant = 10.0;
        let sol = engine().solve(&m, &SolveParams::default()).unwrap();
        assert!((sol.objective - 12.0).abs() < 1e-9);
        assert!((sol.value(VarId(0)) - 2.0).abs() < 1e-9);
    }
}
