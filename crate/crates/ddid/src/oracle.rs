//! Brute-force oracles: exact `Φ(w)` by full recourse enumeration plus one
//! primal LP. Every solver in the crate is tested against this path, so it is
//! built independently of the column-and-constraint machinery.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::DdidError;
use crate::linalg::dot;
use crate::milp::{Cmp, Engine, MilpModel, ObjSense, SolveParams, SolveStatus};
use crate::problem::DdidProblem;
use crate::recourse::RecoursePoint;

/// Adversary certificate backing a `Φ(w)` value: the first-move scenario and
/// one worst-case completion per enumerated policy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorstCaseCertificate {
    pub w: Vec<u8>,
    pub xi_bar: Vec<f64>,
    /// Worst-case `ξ(y) ∈ Ξ(w, ξ̄)` keyed by the policy's `y` vector.
    pub xi_per_policy: Vec<(Vec<u8>, Vec<f64>)>,
    /// `Φ(w)` in min convention.
    pub value_min: f64,
}

impl WorstCaseCertificate {
    /// Check the stored scenarios against the problem: membership in Ξ and
    /// the pinning `w_i (ξ_i − ξ̄_i) = 0`, both within `tol`.
    pub fn check(&self, problem: &DdidProblem, tol: f64) -> Result<(), DdidError> {
        if !problem.xi_set.contains(&self.xi_bar, tol) {
            return Err(DdidError::Infeasible("certificate ξ̄ outside Ξ".into()));
        }
        for (y, xi) in &self.xi_per_policy {
            if !problem.xi_set.contains(xi, tol) {
                return Err(DdidError::Infeasible(format!(
                    "certificate ξ(y) outside Ξ for y = {y:?}"
                )));
            }
            for (i, ((w_i, xv), xb)) in self.w.iter().zip(xi).zip(&self.xi_bar).enumerate() {
                if *w_i != 0 && (xv - xb).abs() > tol {
                    return Err(DdidError::Infeasible(format!(
                        "certificate ξ(y) not pinned at observed coordinate {i}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Enumerate the recourse set (see [`crate::recourse::RecourseSpec::enumerate`]).
pub fn enumerate_recourse(
    problem: &DdidProblem,
    cap: usize,
) -> Result<Vec<RecoursePoint>, DdidError> {
    problem.recourse.enumerate(cap)
}

/// Exact `Φ(w)` over the full enumerated policy list: one LP with a scenario
/// copy `ξ(y)` per feasible `y`, pinned to `ξ̄` on observed coordinates, and
/// an epigraph row per policy. Returns the value in min convention together
/// with the certificate.
pub fn brute_force_phi(
    problem: &DdidProblem,
    w: &[u8],
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<(f64, WorstCaseCertificate), DdidError> {
    let policies = enumerate_recourse(problem, 1 << 20)?;
    brute_force_phi_with_pool(problem, w, &policies, engine, params)
}

/// `Φ(w)` restricted to an explicit policy list (exact when the list is all
/// of `Y`).
pub fn brute_force_phi_with_pool(
    problem: &DdidProblem,
    w: &[u8],
    policies: &[RecoursePoint],
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<(f64, WorstCaseCertificate), DdidError> {
    if w.len() != problem.n_w() {
        return Err(DdidError::InvalidData("w has the wrong dimension".into()));
    }
    if policies.is_empty() {
        return Err(DdidError::InvalidData("policy list is empty".into()));
    }
    let c_min = problem.c_min();
    let p_min = problem.p_min();
    let n_xi = problem.n_xi();
    let wf: Vec<f64> = w.iter().map(|v| *v as f64).collect();
    let cw = c_min.mul_vec_t(&wf);

    let mut model = MilpModel::new("brute-force-phi", ObjSense::Max);
    let tau = model.add_var("tau", f64::NEG_INFINITY, f64::INFINITY);
    model.set_obj(tau, 1.0);
    let xi_bar = problem.xi_set.install(&mut model, "xibar");
    let mut policy_vars = Vec::with_capacity(policies.len());
    for (pi, policy) in policies.iter().enumerate() {
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
        // τ ≤ ξ(y)ᵀ(Cw + Py)
        let yf = policy.y_f64();
        let mut terms = vec![(tau, 1.0)];
        for i in 0..n_xi {
            let coeff = cw[i] + dot(p_min.row(i), &yf);
            terms.push((xi_y[i], -coeff));
        }
        model.add_constr(format!("epi{pi}"), terms, Cmp::Le, 0.0);
        policy_vars.push(xi_y);
    }

    let sol = engine.solve(&model, params)?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Err(DdidError::Infeasible("Ξ is empty".into()));
        }
        other => {
            return Err(DdidError::InvalidData(format!("oracle LP ended with {other:?}")));
        }
    }

    let value_min = sol.objective;
    let certificate = WorstCaseCertificate {
        w: w.to_vec(),
        xi_bar: sol.values_of(&xi_bar),
        xi_per_policy: policies
            .iter()
            .zip(&policy_vars)
            .map(|(p, vars)| (p.y.clone(), sol.values_of(vars)))
            .collect(),
        value_min,
    };
    debug_assert!(certificate.check(problem, 1e-5).is_ok());
    Ok((value_min, certificate))
}

/// `Φ(w)` values keyed by the observation vector.
pub type PhiTable = HashMap<Vec<u8>, f64>;

/// Exhaustive `min_w Φ(w)` over an enumerable observation set; the oracle
/// counterpart of the exact solver. Returns the min-convention optimum, the
/// winning `w` and all evaluations.
pub fn brute_force_over_w(
    problem: &DdidProblem,
    engine: &dyn Engine,
    params: &SolveParams,
    w_cap: usize,
) -> Result<(f64, Vec<u8>, PhiTable), DdidError> {
    let members = problem.enumerate_w(w_cap)?;
    if members.is_empty() {
        return Err(DdidError::InvalidData("observation set W is empty".into()));
    }
    let policies = enumerate_recourse(problem, 1 << 20)?;
    let mut best: Option<(f64, Vec<u8>)> = None;
    let mut evaluations = HashMap::new();
    for w in members {
        let (value, _) = brute_force_phi_with_pool(problem, &w, &policies, engine, params)?;
        evaluations.insert(w.clone(), value);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, w));
        }
    }
    let (value, w) = best.unwrap();
    Ok((value, w, evaluations))
}

impl crate::linalg::Matrix {
    /// `Mᵀ …` helper: `(M w)` for observation vectors — `M` is `N_ξ × N_w`
    /// and `w` lives in the column space.
    pub(crate) fn mul_vec_t(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), w)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapters::orienteering::example1;
    use crate::milp::HighsEngine;
    use crate::FEAS_TOL;

    fn phi_reported(b: usize, w: &[u8]) -> f64 {
        let problem = example1(b).unwrap();
        let engine = HighsEngine::new();
        let (value_min, cert) =
            brute_force_phi(&problem, w, &engine, &SolveParams::default()).unwrap();
        cert.check(&problem, FEAS_TOL).unwrap();
        problem.reported(value_min)
    }

    #[test]
    fn example1_no_observation_collects_nothing() {
        assert!((phi_reported(0, &[0, 0, 0]) - 0.0).abs() < 1e-6);
    }

    #[test]
    fn example1_observing_node1_collects_half() {
        assert!((phi_reported(1, &[1, 0, 0]) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn example1_observing_node2_collects_nothing() {
        assert!((phi_reported(1, &[0, 1, 0]) - 0.0).abs() < 1e-6);
    }

    #[test]
    fn example1_full_observation_collects_half() {
        assert!((phi_reported(3, &[1, 1, 1]) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn node3_is_symmetric_to_node1() {
        assert!((phi_reported(1, &[0, 0, 1]) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn exhaustive_w_search_finds_the_example1_optimum() {
        let problem = example1(1).unwrap();
        let engine = HighsEngine::new();
        let (value_min, w, evals) =
            brute_force_over_w(&problem, &engine, &SolveParams::default(), 64).unwrap();
        assert!((problem.reported(value_min) - 0.5).abs() < 1e-6);
        assert!(w == vec![1, 0, 0] || w == vec![0, 0, 1]);
        assert_eq!(evals.len(), 4);
    }

    /// Lemma-1 monotonicity on the golden instance: more observation never
    /// hurts (min convention: Φ(w¹) ≤ Φ(w²) for w¹ ≥ w²).
    #[test]
    fn phi_is_monotone_along_w_chains() {
        let problem = example1(3).unwrap();
        let engine = HighsEngine::new();
        let params = SolveParams::default();
        let chain: [&[u8]; 4] = [&[0, 0, 0], &[1, 0, 0], &[1, 1, 0], &[1, 1, 1]];
        let mut last = f64::INFINITY;
        for w in chain {
            let (v, _) = brute_force_phi(&problem, w, &engine, &params).unwrap();
            assert!(v <= last + 1e-6, "Φ increased along the chain");
            last = v;
        }
    }
}
