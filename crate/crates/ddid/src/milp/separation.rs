//! Generic solve–separate–add–resolve loop for lazy constraint families.

use std::time::Instant;

use crate::error::MilpError;
use crate::milp::engine::{Engine, SolveParams};
use crate::milp::model::{Cmp, MilpModel, MilpSolution, SolveStatus, VarId};

/// A valid inequality emitted by a separator, in model-variable space.
#[derive(Debug, Clone)]
pub struct CutRow {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Cmp,
    pub rhs: f64,
}

/// Separation contract: given an incumbent with integer values for the
/// model's binaries, return violated rows that every feasible point satisfies.
/// Returning no rows certifies the incumbent against the lazy family.
pub trait Separator {
    fn separate(&mut self, model: &MilpModel, incumbent: &MilpSolution) -> Vec<CutRow>;
}

/// A separator that never fires; `solve_with_separation` then degenerates to
/// a plain solve.
pub struct NoSeparation;

impl Separator for NoSeparation {
    fn separate(&mut self, _: &MilpModel, _: &MilpSolution) -> Vec<CutRow> {
        Vec::new()
    }
}

/// Outcome of the cut loop.
#[derive(Debug)]
pub struct SeparationOutcome {
    pub solution: MilpSolution,
    /// Rows appended across all rounds.
    pub cuts_added: usize,
    /// Solve rounds performed (1 when the separator never fires).
    pub rounds: usize,
}

/// Solve `model`, lazily adding rows from `separator` until it certifies the
/// incumbent or a limit is hit. The model is mutated: appended rows stay.
///
/// `max_rounds` bounds the number of resolves after cuts; 0 means any firing
/// separator is an error.
pub fn solve_with_separation(
    engine: &dyn Engine,
    model: &mut MilpModel,
    separator: &mut dyn Separator,
    params: &SolveParams,
    max_rounds: usize,
) -> Result<SeparationOutcome, MilpError> {
    let start = Instant::now();
    let mut cuts_added = 0usize;
    let mut rounds = 0usize;
    loop {
        let remaining = params.time_limit_s - start.elapsed().as_secs_f64();
        let round_params = SolveParams { time_limit_s: remaining.max(0.01), ..params.clone() };
        let mut solution = engine.solve(model, &round_params)?;
        rounds += 1;
        if !solution.status.has_solution() {
            return Ok(SeparationOutcome { solution, cuts_added, rounds });
        }
        let cuts = separator.separate(model, &solution);
        if cuts.is_empty() {
            solution.wall_time_s = start.elapsed().as_secs_f64();
            return Ok(SeparationOutcome { solution, cuts_added, rounds });
        }
        if rounds > max_rounds {
            return Err(MilpError::CutLoopLimit { rounds });
        }
        if start.elapsed().as_secs_f64() >= params.time_limit_s {
            solution.status = SolveStatus::FeasibleAtLimit;
            solution
                .warnings
                .push("time limit hit with unseparated lazy rows outstanding".to_string());
            solution.wall_time_s = start.elapsed().as_secs_f64();
            return Ok(SeparationOutcome { solution, cuts_added, rounds });
        }
        for cut in cuts {
            model.add_constr(cut.name, cut.terms, cut.sense, cut.rhs);
            cuts_added += 1;
        }
    }
}
