//! The DDID problem instance: uncertainty set, cost coupling, observation
//! budget and recourse set, plus validation and the JSON schema.

use serde::{Deserialize, Serialize};

use crate::error::DdidError;
use crate::linalg::Matrix;
use crate::milp::{Cmp, Engine, MilpModel, ObjSense, SolveParams, SolveStatus};
use crate::polyhedron::Polyhedron;
use crate::recourse::{LinearRow, RecourseSpec, RowSense};
use crate::FEAS_TOL;

/// Current JSON schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Stated optimization sense of the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// A two-stage robust problem with decision-dependent information discovery:
///
/// ```text
/// min_{w ∈ W}  Φ(w),    Φ(w) = max_{ξ̄∈Ξ} min_{y∈Y} max_{ξ∈Ξ(w,ξ̄)} ξᵀCw + ξᵀPy
/// ```
///
/// `C` and `P` are stored exactly as stated; solvers fetch min-convention
/// copies through [`DdidProblem::c_min`] / [`DdidProblem::p_min`], which
/// negate them for a max-stated problem, and report objectives back through
/// [`DdidProblem::reported`]. One code path then serves cuts whose validity
/// direction depends on the sense.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DdidProblem {
    /// Mandatory schema version; rejected when unsupported.
    pub schema_version: u32,
    pub name: String,
    pub sense: Sense,
    pub xi_set: Polyhedron,
    /// Observation-cost coupling, `N_ξ × N_w`.
    pub c: Matrix,
    /// Recourse-cost coupling, `N_ξ × N_y`.
    pub p: Matrix,
    /// Linear constraints over the binary observation vector `w`
    /// (e.g. `eᵀw ≤ B`). Coefficients are dense of length `N_w`.
    pub w_set: Vec<LinearRow>,
    pub recourse: RecourseSpec,
    /// True iff `ξᵀCw` is constant over `Ξ` for every `w` (e.g. `C = 0`);
    /// precondition of the information inequalities.
    pub deterministic_discovery_cost: bool,
}

impl DdidProblem {
    /// Observation dimension `N_w` (equals `N_ξ`).
    pub fn n_w(&self) -> usize {
        self.c.cols
    }

    /// Uncertainty dimension `N_ξ`.
    pub fn n_xi(&self) -> usize {
        self.xi_set.dim()
    }

    /// Profit-bearing recourse dimension `N_y`.
    pub fn n_y(&self) -> usize {
        self.recourse.n_main
    }

    /// `C` in min convention.
    pub fn c_min(&self) -> Matrix {
        match self.sense {
            Sense::Min => self.c.clone(),
            Sense::Max => self.c.negated(),
        }
    }

    /// `P` in min convention.
    pub fn p_min(&self) -> Matrix {
        match self.sense {
            Sense::Min => self.p.clone(),
            Sense::Max => self.p.negated(),
        }
    }

    /// Map a min-convention value back to the stated sense. Negative zero is
    /// normalized so reports and CSVs stay byte-stable.
    pub fn reported(&self, min_convention_value: f64) -> f64 {
        let v = match self.sense {
            Sense::Min => min_convention_value,
            Sense::Max => -min_convention_value,
        };
        if v == 0.0 {
            0.0
        } else {
            v
        }
    }

    /// Install the `w` binaries and the `W` rows into a model.
    pub fn install_w(&self, model: &mut MilpModel, fix_w: Option<&[u8]>) -> Vec<crate::milp::VarId> {
        let vars: Vec<_> = (0..self.n_w())
            .map(|i| match fix_w {
                Some(w) => model.add_fixed_binary(format!("w{i}"), w[i] as f64),
                None => model.add_binary(format!("w{i}")),
            })
            .collect();
        for (ri, row) in self.w_set.iter().enumerate() {
            let terms: Vec<_> = row
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| (vars[i], *c))
                .collect();
            let sense = match row.sense {
                RowSense::Le => Cmp::Le,
                RowSense::Eq => Cmp::Eq,
                RowSense::Ge => Cmp::Ge,
            };
            model.add_constr(format!("wset{ri}"), terms, sense, row.rhs);
        }
        vars
    }

    /// Enumerate the observation set `W`. Errors once more than `cap`
    /// members are found.
    pub fn enumerate_w(&self, cap: usize) -> Result<Vec<Vec<u8>>, DdidError> {
        let n = self.n_w();
        if n > 24 {
            return Err(DdidError::InvalidData(format!(
                "|W| enumeration over {n} binaries is not tractable"
            )));
        }
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << n) {
            let w: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
            let wf: Vec<f64> = w.iter().map(|v| *v as f64).collect();
            if self.w_set.iter().all(|row| row.satisfied(&wf, FEAS_TOL)) {
                out.push(w);
                if out.len() > cap {
                    return Err(DdidError::CapExceeded { cap });
                }
            }
        }
        Ok(out)
    }

    /// Serialize to the documented JSON schema.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serialization cannot fail")
    }

    /// Deserialize from the JSON schema, enforcing the version field.
    pub fn from_json(text: &str) -> Result<Self, DdidError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| DdidError::InvalidData(format!("bad problem JSON: {e}")))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => {
                return Err(DdidError::InvalidData(format!(
                    "unsupported schema_version {v}, expected {SCHEMA_VERSION}"
                )))
            }
            None => {
                return Err(DdidError::InvalidData(
                    "schema_version field is mandatory".into(),
                ))
            }
        }
        serde_json::from_value(value)
            .map_err(|e| DdidError::InvalidData(format!("bad problem JSON: {e}")))
    }
}

/// Outcome of [`validate`]: findings only, never a hard failure.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Validate an instance: dimension coherence, nonempty `W`, bounded and
/// nonempty `Ξ` (per-coordinate LP probes), and agreement between the
/// `deterministic_discovery_cost` flag and `C`.
pub fn validate(
    problem: &DdidProblem,
    engine: &dyn Engine,
    params: &SolveParams,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n_xi = problem.n_xi();

    if problem.c.rows != n_xi {
        report.errors.push(format!(
            "dimension mismatch: C has {} rows, N_xi is {n_xi}",
            problem.c.rows
        ));
    }
    if problem.p.rows != n_xi {
        report.errors.push(format!(
            "dimension mismatch: P has {} rows, N_xi is {n_xi}",
            problem.p.rows
        ));
    }
    if problem.c.cols != n_xi {
        report.errors.push(format!(
            "dimension mismatch: N_w = {} but N_xi = {n_xi}; each observation variable must cover exactly one uncertain component",
            problem.c.cols
        ));
    }
    if problem.p.cols != problem.recourse.n_main {
        report.errors.push(format!(
            "dimension mismatch: P has {} columns, recourse declares {} main binaries",
            problem.p.cols, problem.recourse.n_main
        ));
    }
    if !problem.c.is_finite() || !problem.p.is_finite() {
        report.errors.push("cost matrices contain non-finite entries".into());
    }
    if let Err(e) = problem.recourse.check() {
        report.errors.push(e.to_string());
    }
    for row in &problem.w_set {
        if row.coeffs.len() != problem.n_w() {
            report.errors.push(format!(
                "w-set row {} has {} coefficients, N_w is {}",
                row.name,
                row.coeffs.len(),
                problem.n_w()
            ));
        }
    }
    if !report.errors.is_empty() {
        return report;
    }

    // W nonempty: a tiny feasibility MILP over the w binaries.
    let mut w_model = MilpModel::new("w-feas", ObjSense::Min);
    problem.install_w(&mut w_model, None);
    match engine.solve(&w_model, params) {
        Ok(sol) if sol.status == SolveStatus::Infeasible => {
            report.errors.push("observation set W is empty".into())
        }
        Ok(_) => {}
        Err(e) => report.errors.push(format!("W feasibility probe failed: {e}")),
    }

    // Ξ nonempty and bounded.
    match problem.xi_set.coordinate_bounds(engine, params) {
        Ok((lo, hi)) => {
            for i in 0..n_xi {
                if !lo[i].is_finite() || !hi[i].is_finite() {
                    report
                        .errors
                        .push(format!("unbounded uncertainty coordinate {i}"));
                }
            }
        }
        Err(DdidError::Infeasible(_)) => {
            report.errors.push("uncertainty set is empty".into())
        }
        Err(e) => report.errors.push(format!("bound probe failed: {e}")),
    }

    // Flag consistency: ξᵀC_i constant over Ξ for every i?
    if report.errors.is_empty() {
        let mut constant = true;
        if !problem.c.is_zero() {
            for i in 0..problem.c.cols {
                let col = problem.c.col(i);
                let lo = problem.xi_set.minimize(&col, engine, params);
                let hi = problem.xi_set.maximize(&col, engine, params);
                match (lo, hi) {
                    (Ok(lo), Ok(hi)) => {
                        if hi - lo > FEAS_TOL {
                            constant = false;
                            break;
                        }
                    }
                    _ => {
                        report.warnings.push(format!(
                            "could not probe discovery-cost column {i} for constancy"
                        ));
                        constant = false;
                        break;
                    }
                }
            }
        }
        if problem.deterministic_discovery_cost && !constant {
            report.errors.push(
                "deterministic_discovery_cost is set but ξᵀCw varies over Ξ".into(),
            );
        }
        if !problem.deterministic_discovery_cost && constant {
            report.warnings.push(
                "ξᵀCw is constant over Ξ; deterministic_discovery_cost could be set".into(),
            );
        }
    }

    report
}
