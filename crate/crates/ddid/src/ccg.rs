//! Exact evaluation of `Φ(w)` by column-and-constraint generation: an LP
//! master over a growing policy pool against a dualized MILP subproblem.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::DdidError;
use crate::linalg::dot;
use crate::milp::{
    solve_with_separation, Cmp, CutRow, Engine, MilpModel, MilpSolution, ObjSense, SolveParams,
    SolveStatus, Separator, VarId, DEFAULT_MAX_SEPARATION_ROUNDS,
};
use crate::oracle::WorstCaseCertificate;
use crate::problem::DdidProblem;
use crate::recourse::{RecoursePoint, RecourseSpec, RowSense};
use crate::OBJ_TOL;

/// Options for [`evaluate_phi`].
#[derive(Debug, Clone)]
pub struct CcgOptions {
    pub tol: f64,
    pub time_limit_s: f64,
    pub solve: SolveParams,
}

impl Default for CcgOptions {
    fn default() -> Self {
        Self { tol: OBJ_TOL, time_limit_s: 7200.0, solve: SolveParams::default() }
    }
}

/// One master/subproblem alternation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CcgIter {
    pub iteration: usize,
    pub ub: f64,
    pub lb: f64,
    pub pool_size: usize,
}

/// Evaluation state returned next to `Φ(w)`.
#[derive(Debug, Clone)]
pub struct CcgState {
    pub pool: Vec<RecoursePoint>,
    /// Master value (min-convention upper bound on Φ).
    pub ub: f64,
    /// Best subproblem value (min-convention lower bound on Φ).
    pub lb: f64,
    pub iterations: usize,
    pub converged: bool,
    pub certificate: Option<WorstCaseCertificate>,
    pub history: Vec<CcgIter>,
}

/// Install every recourse binary into `model` and map the explicit rows.
/// Returns the `(y, aux)` variable ids.
pub(crate) fn install_recourse(
    model: &mut MilpModel,
    spec: &RecourseSpec,
    prefix: &str,
) -> (Vec<VarId>, Vec<VarId>) {
    let y: Vec<VarId> =
        (0..spec.n_main).map(|j| model.add_binary(format!("{prefix}y{j}"))).collect();
    let aux: Vec<VarId> =
        (0..spec.n_aux).map(|j| model.add_binary(format!("{prefix}z{j}"))).collect();
    for (ri, row) in spec.rows.iter().enumerate() {
        let mut terms = Vec::new();
        for (j, c) in row.coeffs.iter().enumerate() {
            if *c != 0.0 {
                let var = if j < spec.n_main { y[j] } else { aux[j - spec.n_main] };
                terms.push((var, *c));
            }
        }
        let sense = match row.sense {
            RowSense::Le => Cmp::Le,
            RowSense::Eq => Cmp::Eq,
            RowSense::Ge => Cmp::Ge,
        };
        model.add_constr(format!("{prefix}row{ri}_{}", row.name), terms, sense, row.rhs);
    }
    (y, aux)
}

/// Separator running the recourse separation contract over one `(y, aux)`
/// block of a model.
pub(crate) struct RecourseBlockSeparator<'a> {
    pub spec: &'a RecourseSpec,
    pub y: Vec<VarId>,
    pub aux: Vec<VarId>,
    pub prefix: String,
    pub rows_added: usize,
}

impl<'a> RecourseBlockSeparator<'a> {
    pub fn new(spec: &'a RecourseSpec, y: Vec<VarId>, aux: Vec<VarId>, prefix: &str) -> Self {
        Self { spec, y, aux, prefix: prefix.to_string(), rows_added: 0 }
    }

    /// Map a domain row over `(y, aux)` onto this block's model variables.
    pub fn lift(&self, row: &crate::recourse::LinearRow) -> CutRow {
        let mut terms = Vec::new();
        for (j, c) in row.coeffs.iter().enumerate() {
            if *c != 0.0 {
                let var =
                    if j < self.spec.n_main { self.y[j] } else { self.aux[j - self.spec.n_main] };
                terms.push((var, *c));
            }
        }
        CutRow {
            name: format!("{}{}_{}", self.prefix, row.name, self.rows_added),
            terms,
            sense: match row.sense {
                RowSense::Le => Cmp::Le,
                RowSense::Eq => Cmp::Eq,
                RowSense::Ge => Cmp::Ge,
            },
            rhs: row.rhs,
        }
    }
}

impl Separator for RecourseBlockSeparator<'_> {
    fn separate(&mut self, _model: &MilpModel, incumbent: &MilpSolution) -> Vec<CutRow> {
        let y: Vec<f64> = self.y.iter().map(|v| incumbent.value(*v).round()).collect();
        let aux: Vec<f64> = self.aux.iter().map(|v| incumbent.value(*v).round()).collect();
        let violated = self.spec.separate(&y, &aux);
        let cuts: Vec<CutRow> = violated.iter().map(|row| self.lift(row)).collect();
        self.rows_added += cuts.len();
        cuts
    }
}

/// The relaxed adversary LP over a policy pool: variables `τ`, `ξ̄ ∈ Ξ` and
/// one scenario copy `ξ(y) ∈ Ξ(w, ξ̄)` per pooled policy, epigraph rows
/// `τ ≤ ξ(y)ᵀ(Cw + Py)`, objective `max τ`.
pub fn build_ccg_master(
    problem: &DdidProblem,
    w: &[u8],
    pool: &[RecoursePoint],
) -> Result<MilpModel, DdidError> {
    if pool.is_empty() {
        return Err(DdidError::InvalidData("policy pool must be nonempty".into()));
    }
    if w.len() != problem.n_w() {
        return Err(DdidError::InvalidData("w has the wrong dimension".into()));
    }
    let c_min = problem.c_min();
    let p_min = problem.p_min();
    let wf: Vec<f64> = w.iter().map(|v| *v as f64).collect();
    let cw = c_min.mul_vec_t(&wf);
    let n_xi = problem.n_xi();

    let mut model = MilpModel::new("ccg-master", ObjSense::Max);
    let tau = model.add_var("tau", f64::NEG_INFINITY, f64::INFINITY);
    model.set_obj(tau, 1.0);
    let xi_bar = problem.xi_set.install(&mut model, "xibar");
    for (pi, policy) in pool.iter().enumerate() {
        let xi_y = problem.xi_set.install(&mut model, &format!("xi{pi}_"));
        for i in 0..n_xi {
            if w[i] != 0 {
                model.add_constr(
                    format!("pin{pi}_{i}"),
                    vec![(xi_y[i], 1.0), (xi_bar[i], -1.0)],
                    Cmp::Eq,
                    0.0,
                );
            }
        }
        let yf = policy.y_f64();
        let mut terms = vec![(tau, 1.0)];
        for i in 0..n_xi {
            terms.push((xi_y[i], -(cw[i] + dot(p_min.row(i), &yf))));
        }
        model.add_constr(format!("epi{pi}"), terms, Cmp::Le, 0.0);
    }
    Ok(model)
}

/// The dualized recourse subproblem `ψ(w, ξ̄) = min_{y∈Y} max_{ξ∈Ξ(w,ξ̄)} …`
/// as a single MILP: duals `λ ≥ 0` for `Aξ ≤ b`, free `μ_i` for each pinned
/// coordinate, constraint `Aᵀλ + w∘μ = Cw + Py`, objective
/// `min bᵀλ + Σ_{i: w_i=1} ξ̄_i μ_i`, with the recourse separation loop
/// active inside the MILP.
pub fn solve_recourse_subproblem(
    problem: &DdidProblem,
    w: &[u8],
    xi_bar: &[f64],
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<(f64, RecoursePoint), DdidError> {
    if !problem.xi_set.contains(xi_bar, 1e-5) {
        return Err(DdidError::Infeasible("ξ̄ outside Ξ".into()));
    }
    let c_min = problem.c_min();
    let p_min = problem.p_min();
    let wf: Vec<f64> = w.iter().map(|v| *v as f64).collect();
    let cw = c_min.mul_vec_t(&wf);
    let n_xi = problem.n_xi();

    let mut model = MilpModel::new("ccg-subproblem", ObjSense::Min);
    let (y, aux) = install_recourse(&mut model, &problem.recourse, "");
    let lambda: Vec<VarId> = (0..problem.xi_set.num_rows())
        .map(|l| {
            let v = model.add_var(format!("lam{l}"), 0.0, f64::INFINITY);
            model.set_obj(v, problem.xi_set.rows()[l].rhs);
            v
        })
        .collect();
    // μ only for observed coordinates; others are structurally absent.
    let mut mu = vec![None; n_xi];
    for i in 0..n_xi {
        if w[i] != 0 {
            let v = model.add_var(format!("mu{i}"), f64::NEG_INFINITY, f64::INFINITY);
            model.set_obj(v, xi_bar[i]);
            mu[i] = Some(v);
        }
    }
    for i in 0..n_xi {
        let mut terms: Vec<(VarId, f64)> = Vec::new();
        for (l, row) in problem.xi_set.rows().iter().enumerate() {
            if row.coeffs[i] != 0.0 {
                terms.push((lambda[l], row.coeffs[i]));
            }
        }
        if let Some(m) = mu[i] {
            terms.push((m, 1.0));
        }
        for (j, yv) in y.iter().enumerate() {
            let p = p_min.get(i, j);
            if p != 0.0 {
                terms.push((*yv, -p));
            }
        }
        model.add_constr(format!("dual{i}"), terms, Cmp::Eq, cw[i]);
    }

    let mut separator =
        RecourseBlockSeparator::new(&problem.recourse, y.clone(), aux.clone(), "sub_");
    let outcome = solve_with_separation(
        engine,
        &mut model,
        &mut separator,
        params,
        DEFAULT_MAX_SEPARATION_ROUNDS,
    )?;
    match outcome.solution.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Err(DdidError::InvalidData(
                "dual subproblem infeasible: Ξ(w, ξ̄) is empty or unbounded, or Y is empty".into(),
            ));
        }
        other => {
            return Err(DdidError::InvalidData(format!("subproblem ended with {other:?}")));
        }
    }
    let point = RecoursePoint {
        y: outcome.solution.values_of(&y).iter().map(|v| v.round() as u8).collect(),
        aux: outcome.solution.values_of(&aux).iter().map(|v| v.round() as u8).collect(),
    };
    Ok((outcome.solution.objective, point))
}

/// Find one feasible recourse point, preferring the all-zero policy (the MILP
/// minimizes `eᵀy`, so a zero optimum is the zero policy with a feasible
/// auxiliary witness).
pub fn seed_policy(
    problem: &DdidProblem,
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<RecoursePoint, DdidError> {
    let mut model = MilpModel::new("recourse-seed", ObjSense::Min);
    let (y, aux) = install_recourse(&mut model, &problem.recourse, "");
    for v in &y {
        model.set_obj(*v, 1.0);
    }
    let mut separator =
        RecourseBlockSeparator::new(&problem.recourse, y.clone(), aux.clone(), "seed_");
    let outcome = solve_with_separation(
        engine,
        &mut model,
        &mut separator,
        params,
        DEFAULT_MAX_SEPARATION_ROUNDS,
    )?;
    if outcome.solution.status != SolveStatus::Optimal {
        return Err(DdidError::Infeasible("recourse set Y is empty".into()));
    }
    Ok(RecoursePoint {
        y: outcome.solution.values_of(&y).iter().map(|v| v.round() as u8).collect(),
        aux: outcome.solution.values_of(&aux).iter().map(|v| v.round() as u8).collect(),
    })
}

/// Algorithm: alternate the pool master (upper bound) with the dualized
/// subproblem (lower bound), adding the priced policy until the bounds meet.
/// Returns `Φ(w)` in min convention with the evaluation state.
pub fn evaluate_phi(
    problem: &DdidProblem,
    w: &[u8],
    engine: &dyn Engine,
    options: &CcgOptions,
) -> Result<(f64, CcgState), DdidError> {
    let start = Instant::now();
    let mut state = CcgState {
        pool: vec![seed_policy(problem, engine, &options.solve)?],
        ub: f64::INFINITY,
        lb: f64::NEG_INFINITY,
        iterations: 0,
        converged: false,
        certificate: None,
        history: Vec::new(),
    };

    loop {
        state.iterations += 1;
        let master = build_ccg_master(problem, w, &state.pool)?;
        let master_sol = engine.solve(&master, &options.solve)?;
        if master_sol.status != SolveStatus::Optimal {
            return Err(DdidError::InvalidData(format!(
                "CCG master ended with {:?}",
                master_sol.status
            )));
        }
        // Master relaxes Φ from above; the sequence is non-increasing.
        state.ub = master_sol.objective;
        let xi_bar: Vec<f64> = (0..problem.n_xi())
            .map(|i| master_sol.values[&format!("xibar{i}")])
            .collect();

        let (psi, y_star) =
            solve_recourse_subproblem(problem, w, &xi_bar, engine, &options.solve)?;
        state.lb = state.lb.max(psi);
        state.history.push(CcgIter {
            iteration: state.iterations,
            ub: state.ub,
            lb: state.lb,
            pool_size: state.pool.len(),
        });

        if state.ub - state.lb <= options.tol {
            state.converged = true;
            state.certificate = Some(extract_certificate(problem, w, &state.pool, &master_sol));
            return Ok((state.ub, state));
        }
        if start.elapsed().as_secs_f64() > options.time_limit_s {
            state.certificate = Some(extract_certificate(problem, w, &state.pool, &master_sol));
            return Ok((state.ub, state));
        }
        if state.pool.iter().any(|p| p.y == y_star.y) {
            // A repeated policy can only price out when the bounds already
            // coincide; reaching here with an open gap is a numerical fault.
            return Err(DdidError::InvalidData(format!(
                "CCG generated duplicate policy {:?} with gap {:.3e}",
                y_star.y,
                state.ub - state.lb
            )));
        }
        state.pool.push(y_star);
    }
}

fn extract_certificate(
    problem: &DdidProblem,
    w: &[u8],
    pool: &[RecoursePoint],
    master_sol: &crate::milp::MilpSolution,
) -> WorstCaseCertificate {
    WorstCaseCertificate {
        w: w.to_vec(),
        xi_bar: (0..problem.n_xi())
            .map(|i| master_sol.values[&format!("xibar{i}")])
            .collect(),
        xi_per_policy: pool
            .iter()
            .enumerate()
            .map(|(pi, p)| {
                let xi = (0..problem.n_xi())
                    .map(|i| master_sol.values[&format!("xi{pi}_{i}")])
                    .collect();
                (p.y.clone(), xi)
            })
            .collect(),
        value_min: master_sol.objective,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapters::orienteering::example1;
    use crate::milp::HighsEngine;
    use crate::oracle::enumerate_recourse;

    fn eval(b: usize, w: &[u8]) -> (f64, CcgState) {
        let problem = example1(b).unwrap();
        let engine = HighsEngine::new();
        let (v, state) = evaluate_phi(&problem, w, &engine, &CcgOptions::default()).unwrap();
        (problem.reported(v), state)
    }

    #[test]
    fn example1_full_observation() {
        let (v, state) = eval(3, &[1, 1, 1]);
        assert!((v - 0.5).abs() < 1e-6);
        assert!(state.converged);
        assert!(state.iterations <= 6);
    }

    #[test]
    fn example1_middle_sensor_gets_nothing() {
        let (v, _) = eval(1, &[0, 1, 0]);
        assert!(v.abs() < 1e-6);
    }

    #[test]
    fn example1_side_sensor_gets_half() {
        let (v, _) = eval(1, &[1, 0, 0]);
        assert!((v - 0.5).abs() < 1e-6);
    }

    #[test]
    fn example1_no_observation() {
        let (v, _) = eval(0, &[0, 0, 0]);
        assert!(v.abs() < 1e-6);
    }

    #[test]
    fn full_pool_master_is_exact_in_one_shot() {
        let problem = example1(1).unwrap();
        let engine = HighsEngine::new();
        let pool = enumerate_recourse(&problem, 100).unwrap();
        let model = build_ccg_master(&problem, &[1, 0, 0], &pool).unwrap();
        let sol = engine.solve(&model, &SolveParams::default()).unwrap();
        assert!((problem.reported(sol.objective) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn zero_policy_pool_pins_value_at_zero() {
        // Pool = {zero path}: the adversary cannot lose anything.
        let problem = example1(1).unwrap();
        let engine = HighsEngine::new();
        let seed = seed_policy(&problem, &engine, &SolveParams::default()).unwrap();
        assert!(seed.y.iter().all(|v| *v == 0));
        let model = build_ccg_master(&problem, &[1, 0, 0], &[seed]).unwrap();
        let sol = engine.solve(&model, &SolveParams::default()).unwrap();
        assert!(sol.objective.abs() < 1e-6);
    }

    #[test]
    fn subproblem_with_full_observation_is_deterministic_recourse() {
        // w = e pins every coordinate: ψ(e, ξ̄) = min_y ξ̄ᵀ(Cw + Py).
        let problem = example1(3).unwrap();
        let engine = HighsEngine::new();
        let xi_bar = [0.5, 0.25, 0.25];
        let (psi, y_star) =
            solve_recourse_subproblem(&problem, &[1, 1, 1], &xi_bar, &engine, &SolveParams::default())
                .unwrap();
        // Best path collects ξ₁ + ξ₂ = 0.75 (min convention −0.75).
        assert!((psi + 0.75).abs() < 1e-6);
        assert_eq!(y_star.y, vec![1, 1, 0]);
    }

    #[test]
    fn subproblem_prices_the_example1_certificate_scenario() {
        let problem = example1(1).unwrap();
        let engine = HighsEngine::new();
        let (psi, y_star) = solve_recourse_subproblem(
            &problem,
            &[1, 0, 0],
            &[0.5, 0.25, 0.25],
            &engine,
            &SolveParams::default(),
        )
        .unwrap();
        assert!((psi + 0.5).abs() < 1e-6, "ψ = {psi}");
        // Either visit node 1 or nodes 2&3, both collect 0.5 in the worst case.
        assert!(y_star.y == vec![1, 0, 0] || y_star.y == vec![0, 1, 1]);
    }

    #[test]
    fn master_bound_is_monotone_and_pool_stays_duplicate_free() {
        let problem = example1(3).unwrap();
        let engine = HighsEngine::new();
        let (_, state) = evaluate_phi(&problem, &[1, 1, 0], &engine, &CcgOptions::default()).unwrap();
        for pair in state.history.windows(2) {
            assert!(pair[1].ub <= pair[0].ub + 1e-9, "master bound increased");
        }
        let mut ys: Vec<_> = state.pool.iter().map(|p| p.y.clone()).collect();
        ys.sort();
        ys.dedup();
        assert_eq!(ys.len(), state.pool.len());
    }
}
