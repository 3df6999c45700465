//! Logic-Benders outer loop: iteratively minimize an epigraph variable `φ`
//! over `w ∈ W` under integer optimality cuts (valid for any `Φ` with a known
//! lower bound) or information inequalities (tighter, valid when discovery
//! costs are deterministic), evaluating `Φ(w)` exactly through the CCG layer.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ccg::{evaluate_phi, install_recourse, CcgOptions};
use crate::error::DdidError;
use crate::linalg::dot;
use crate::milp::{Cmp, Engine, MilpModel, ObjSense, SolveParams, SolveStatus};
use crate::problem::DdidProblem;
use crate::OBJ_TOL;

/// Cut family of a master row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    /// Convex-lower-envelope cut, exact at its generator.
    Integer,
    /// Monotonicity-lifted cut; needs deterministic discovery cost.
    Information,
    /// `φ ≥ ζ^w·w + floor` bound, no generator.
    OptimisticBound,
}

/// A master row `φ ≥ constant + w_coeffs · w`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MasterCut {
    pub kind: CutKind,
    pub constant: f64,
    pub w_coeffs: Vec<f64>,
    /// Generating point and its `Φ` value (absent for the optimistic bound).
    pub generator: Option<(Vec<u8>, f64)>,
}

impl MasterCut {
    /// Right-hand side the cut imposes on `φ` at a (possibly fractional) `w`.
    pub fn rhs_at(&self, w: &[f64]) -> f64 {
        self.constant + dot(&self.w_coeffs, w)
    }
}

/// Integer optimality cut
/// `φ ≥ Φ(w′) − (Φ(w′) − Φ̲)·[Σ_{i: w′_i=1}(1 − w_i) + Σ_{i: w′_i=0} w_i]`.
pub fn integer_optimality_cut(
    w_prime: &[u8],
    phi_prime: f64,
    phi_lower: f64,
) -> Result<MasterCut, DdidError> {
    if phi_lower > phi_prime + OBJ_TOL {
        return Err(DdidError::InvalidData(format!(
            "phi_lower {phi_lower} exceeds the evaluated value {phi_prime}"
        )));
    }
    let depth = phi_prime - phi_lower;
    let ones = w_prime.iter().filter(|v| **v != 0).count() as f64;
    let w_coeffs = w_prime
        .iter()
        .map(|v| if *v != 0 { depth } else { -depth })
        .collect();
    Ok(MasterCut {
        kind: CutKind::Integer,
        constant: phi_prime - depth * ones,
        w_coeffs,
        generator: Some((w_prime.to_vec(), phi_prime)),
    })
}

/// Information inequality
/// `φ ≥ Φ(w′) − (Φ(w′) − Φ̲)·Σ_{i: w′_i=0} w_i`; refused when discovery
/// costs are uncertain because `Φ` is then not monotone in `w`.
pub fn information_cut(
    w_prime: &[u8],
    phi_prime: f64,
    phi_lower: f64,
    deterministic_discovery_cost: bool,
) -> Result<MasterCut, DdidError> {
    if !deterministic_discovery_cost {
        return Err(DdidError::InvalidData(
            "information cuts need deterministic discovery costs".into(),
        ));
    }
    if phi_lower > phi_prime + OBJ_TOL {
        return Err(DdidError::InvalidData(format!(
            "phi_lower {phi_lower} exceeds the evaluated value {phi_prime}"
        )));
    }
    let depth = phi_prime - phi_lower;
    let w_coeffs = w_prime.iter().map(|v| if *v != 0 { 0.0 } else { -depth }).collect();
    Ok(MasterCut {
        kind: CutKind::Information,
        constant: phi_prime,
        w_coeffs,
        generator: Some((w_prime.to_vec(), phi_prime)),
    })
}

/// Master bound from optimistic realizations. The printed form `Φ(w) ≥ ζ^w·w`
/// holds only when the recourse term is nonnegative; adding the w-independent
/// recourse floor `min_{y∈conv(Y)} ζ^y·y` makes the row valid in general and
/// changes nothing when `C = 0`.
pub fn master_optimistic_bound(zeta_w: &[f64], recourse_floor: f64) -> MasterCut {
    MasterCut {
        kind: CutKind::OptimisticBound,
        constant: recourse_floor,
        w_coeffs: zeta_w.to_vec(),
        generator: None,
    }
}

/// `min ζ^y·y` over the LP relaxation of the explicit recourse rows; dropping
/// the lazy family only widens the set, so the value stays a valid floor.
pub fn recourse_floor(
    problem: &DdidProblem,
    zeta_y: &[f64],
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<f64, DdidError> {
    let mut model = MilpModel::new("recourse-floor", ObjSense::Min);
    let (y, _aux) = install_recourse(&mut model, &problem.recourse, "");
    let mut relaxed = model.lp_relaxation();
    for (j, z) in zeta_y.iter().enumerate() {
        relaxed.set_obj(y[j], *z);
    }
    let sol = engine.solve(&relaxed, params)?;
    match sol.status {
        SolveStatus::Optimal => Ok(sol.objective),
        SolveStatus::Infeasible => Err(DdidError::Infeasible("recourse set Y is empty".into())),
        other => Err(DdidError::InvalidData(format!("floor LP ended with {other:?}"))),
    }
}

/// A valid lower bound `Φ̲ ≤ Φ(w)` for all `w ∈ W`:
/// `Σ_i min(ζ^w_i, 0) + min_{y ∈ conv(Y)} ζ^y·y`, from
/// `Φ(w) ≥ min_{ξ,y} ξᵀCw + ξᵀPy ≥ ζ^w·w + ζ^y·y`.
pub fn lower_bound_phi(
    problem: &DdidProblem,
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<f64, DdidError> {
    let (zeta_w, zeta_y) =
        crate::kadapt::compute_optimistic_vectors(problem, engine, params)?;
    let floor = recourse_floor(problem, &zeta_y, engine, params)?;
    Ok(zeta_w.iter().map(|z| z.min(0.0)).sum::<f64>() + floor)
}

/// Options for [`solve_exact`].
#[derive(Debug, Clone)]
pub struct ExactOptions {
    pub time_limit_s: f64,
    pub tol: f64,
    /// Add information inequalities instead of integer cuts whenever valid
    /// (they dominate, so only one cut is added per iteration).
    pub use_information_cuts: bool,
    /// Add the `φ ≥ ζ^w·w + floor` master row.
    pub use_optimistic_bound: bool,
    /// Replace the computed `Φ̲`; must still lower-bound `Φ` over `W`.
    pub phi_lower_override: Option<f64>,
    pub solve: SolveParams,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            time_limit_s: 7200.0,
            tol: OBJ_TOL,
            use_information_cuts: true,
            use_optimistic_bound: false,
            phi_lower_override: None,
            solve: SolveParams::default(),
        }
    }
}

/// One outer iteration, for tracing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactIter {
    pub iteration: usize,
    pub lb: f64,
    pub ub: f64,
    pub w: Vec<u8>,
    pub cut: Option<CutKind>,
}

/// Master-side state of the decomposition.
#[derive(Debug, Clone)]
pub struct MasterState {
    /// Evaluated points `(w, Φ_cut(w))` in evaluation order, where `Φ_cut`
    /// is the function the cuts underestimate (full `Φ`, or `Φ − c·w` when
    /// a deterministic discovery-cost vector is split into the objective).
    pub evaluated: Vec<(Vec<u8>, f64)>,
    pub cuts: Vec<MasterCut>,
    pub phi_lower: f64,
    /// Progressive bound (master optimum, min convention).
    pub lb: f64,
    /// Conservative bound (best evaluated `Φ`, min convention).
    pub ub: f64,
    pub iterations: usize,
    pub history: Vec<ExactIter>,
}

/// Result of the exact decomposition.
#[derive(Debug, Clone)]
pub struct ExactResult {
    pub w_star: Vec<u8>,
    /// `min_w Φ(w)` in min convention.
    pub value_min: f64,
    /// Same value in the problem's stated sense.
    pub objective: f64,
    pub converged: bool,
    pub state: MasterState,
}

impl ExactResult {
    /// Normalized optimality gap of the returned bounds (0 when converged).
    pub fn gap(&self) -> f64 {
        crate::exact::bound_gap(self.state.ub, self.state.lb)
    }
}

/// `(conservative − progressive) / |progressive|` in min convention.
pub fn bound_gap(conservative: f64, progressive: f64) -> f64 {
    if (conservative - progressive).abs() <= OBJ_TOL {
        0.0
    } else if progressive.abs() <= OBJ_TOL {
        f64::INFINITY
    } else {
        (conservative - progressive) / progressive.abs()
    }
}

/// Algorithm: solve the relaxed master over `(φ, w)`, evaluate `Φ(w*)`
/// exactly, add the violated cut, repeat until the bounds meet.
pub fn solve_exact(
    problem: &DdidProblem,
    engine: &dyn Engine,
    options: &ExactOptions,
) -> Result<ExactResult, DdidError> {
    let start = Instant::now();
    let c_min = problem.c_min();
    let n_w = problem.n_w();

    let (zeta_w, zeta_y) = crate::kadapt::compute_optimistic_vectors(problem, engine, &options.solve)?;
    let floor = recourse_floor(problem, &zeta_y, engine, &options.solve)?;

    // With deterministic discovery costs the term ξᵀCw = c·w is linear in w:
    // it moves into the master objective and the cuts underestimate the pure
    // recourse value Φ(w) − c·w, which is what Lemma-1 monotonicity covers.
    let split_c: Option<Vec<f64>> = if problem.deterministic_discovery_cost && !c_min.is_zero() {
        Some(zeta_w.clone())
    } else {
        None
    };
    let phi_lower = match options.phi_lower_override {
        Some(v) => v,
        None => {
            if split_c.is_some() {
                floor
            } else {
                zeta_w.iter().map(|z| z.min(0.0)).sum::<f64>() + floor
            }
        }
    };

    let mut state = MasterState {
        evaluated: Vec::new(),
        cuts: Vec::new(),
        phi_lower,
        lb: f64::NEG_INFINITY,
        ub: f64::INFINITY,
        iterations: 0,
        history: Vec::new(),
    };
    if options.use_optimistic_bound {
        let row = match &split_c {
            // w-part already in the objective: only the floor survives.
            Some(_) => master_optimistic_bound(&vec![0.0; n_w], floor),
            None => master_optimistic_bound(&zeta_w, floor),
        };
        state.cuts.push(row);
    }

    let ccg_options = CcgOptions {
        tol: options.tol,
        time_limit_s: options.time_limit_s,
        solve: options.solve.clone(),
    };
    let mut best: Option<(f64, Vec<u8>)> = None;

    loop {
        state.iterations += 1;

        // Master (7): min φ (+ c·w) over w ∈ W under the accumulated cuts.
        let mut master = MilpModel::new("benders-master", ObjSense::Min);
        let phi = master.add_var("phi", state.phi_lower, f64::INFINITY);
        master.set_obj(phi, 1.0);
        let w_vars = problem.install_w(&mut master, None);
        if let Some(c) = &split_c {
            for (i, ci) in c.iter().enumerate() {
                master.set_obj(w_vars[i], *ci);
            }
        }
        for (ci, cut) in state.cuts.iter().enumerate() {
            // φ ≥ const + coeffs·w  ⇔  φ − coeffs·w ≥ const
            let mut terms = vec![(phi, 1.0)];
            for (i, c) in cut.w_coeffs.iter().enumerate() {
                if *c != 0.0 {
                    terms.push((w_vars[i], -c));
                }
            }
            master.add_constr(format!("cut{ci}"), terms, Cmp::Ge, cut.constant);
        }

        let master_sol = engine.solve(&master, &options.solve)?;
        match master_sol.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => {
                return Err(DdidError::Infeasible("observation set W is empty".into()));
            }
            other => {
                return Err(DdidError::InvalidData(format!("master ended with {other:?}")));
            }
        }
        state.lb = state.lb.max(master_sol.objective);
        let w_star: Vec<u8> =
            w_vars.iter().map(|v| master_sol.value(*v).round() as u8).collect();

        if state.evaluated.iter().any(|(w, _)| *w == w_star) {
            // The cut at w* is tight, so re-selecting it means the master can
            // no longer improve: the incumbent is optimal.
            finish(&mut state, &mut best, options.tol);
            break;
        }

        // Evaluate Φ(w*) exactly.
        let (phi_full, _ccg_state) = evaluate_phi(problem, &w_star, engine, &ccg_options)?;
        let phi_cut_target = match &split_c {
            Some(c) => {
                let wf: Vec<f64> = w_star.iter().map(|v| *v as f64).collect();
                phi_full - dot(c, &wf)
            }
            None => phi_full,
        };
        state.evaluated.push((w_star.clone(), phi_cut_target));
        if best.as_ref().is_none_or(|(v, _)| phi_full < *v) {
            best = Some((phi_full, w_star.clone()));
        }
        state.ub = state.ub.min(phi_full);

        let finished = state.ub - state.lb <= options.tol;
        let cut_kind = if finished {
            None
        } else {
            let cut = if options.use_information_cuts && problem.deterministic_discovery_cost {
                // The information cut dominates; add only it.
                information_cut(&w_star, phi_cut_target, state.phi_lower, true)?
            } else {
                integer_optimality_cut(&w_star, phi_cut_target, state.phi_lower)?
            };
            let kind = cut.kind;
            let wf: Vec<f64> = w_star.iter().map(|v| *v as f64).collect();
            let residual = (cut.rhs_at(&wf) - phi_cut_target).abs();
            if residual > 1e-6 {
                return Err(DdidError::InvalidData(format!(
                    "cut not tight at its generator (residual {residual:.3e})"
                )));
            }
            state.cuts.push(cut);
            Some(kind)
        };
        state.history.push(ExactIter {
            iteration: state.iterations,
            lb: state.lb,
            ub: state.ub,
            w: w_star.clone(),
            cut: cut_kind,
        });

        if finished {
            break;
        }
        if start.elapsed().as_secs_f64() > options.time_limit_s {
            let (value_min, w_best) = best.clone().expect("at least one evaluation");
            return Ok(ExactResult {
                objective: problem.reported(value_min),
                w_star: w_best,
                value_min,
                converged: false,
                state,
            });
        }
    }

    let (value_min, w_best) = best.expect("at least one evaluation");
    Ok(ExactResult {
        objective: problem.reported(value_min),
        w_star: w_best,
        value_min,
        converged: true,
        state,
    })
}

fn finish(state: &mut MasterState, best: &mut Option<(f64, Vec<u8>)>, tol: f64) {
    if let Some((v, _)) = best {
        state.ub = state.ub.min(*v);
    }
    debug_assert!(state.ub >= state.lb - tol * 10.0);
}
