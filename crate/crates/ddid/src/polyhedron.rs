//! Polyhedral uncertainty sets `Ξ = {ξ : Aξ ≤ b}` and their observation
//! restrictions `Ξ(w, ξ̄)`.

use serde::{Deserialize, Serialize};

use crate::error::DdidError;
use crate::linalg::dot;
use crate::milp::{Cmp, Engine, MilpModel, ObjSense, SolveParams, SolveStatus, VarId};
use crate::FEAS_TOL;

/// One inequality row `coeffs · ξ ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// Bounded polyhedron in inequality form. Box bounds, when known, are stored
/// redundantly next to the rows (they are also appended as rows, so
/// membership testing through `Aξ ≤ b` alone stays complete) and spare the
/// big-M and ζ-vector code repeated LP probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyhedron {
    dim: usize,
    rows: Vec<HalfSpace>,
    box_lo: Option<Vec<f64>>,
    box_hi: Option<Vec<f64>>,
}

impl Polyhedron {
    /// Polyhedron from explicit `Aξ ≤ b` rows.
    pub fn new(dim: usize, rows: Vec<HalfSpace>) -> Result<Self, DdidError> {
        if rows.is_empty() {
            return Err(DdidError::InvalidData("polyhedron needs at least one row".into()));
        }
        for r in &rows {
            if r.coeffs.len() != dim {
                return Err(DdidError::InvalidData(format!(
                    "row has {} coefficients, dimension is {dim}",
                    r.coeffs.len()
                )));
            }
            if !r.coeffs.iter().all(|c| c.is_finite()) || !r.rhs.is_finite() {
                return Err(DdidError::InvalidData("non-finite row entries".into()));
            }
        }
        Ok(Self { dim, rows, box_lo: None, box_hi: None })
    }

    /// Polyhedron from rows plus per-coordinate box bounds; the bounds are
    /// appended as rows.
    pub fn with_box(
        dim: usize,
        mut rows: Vec<HalfSpace>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    ) -> Result<Self, DdidError> {
        if lo.len() != dim || hi.len() != dim {
            return Err(DdidError::InvalidData("box bound length mismatch".into()));
        }
        for i in 0..dim {
            if lo[i] > hi[i] {
                return Err(DdidError::InvalidData(format!(
                    "box bound lo {} > hi {} at coordinate {i}",
                    lo[i], hi[i]
                )));
            }
            let mut up = vec![0.0; dim];
            up[i] = 1.0;
            rows.push(HalfSpace { coeffs: up, rhs: hi[i] });
            let mut down = vec![0.0; dim];
            down[i] = -1.0;
            rows.push(HalfSpace { coeffs: down, rhs: -lo[i] });
        }
        let mut p = Self::new(dim, rows)?;
        p.box_lo = Some(lo);
        p.box_hi = Some(hi);
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows `L`.
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[HalfSpace] {
        &self.rows
    }

    /// Stored box bounds, if any.
    pub fn stored_box(&self) -> Option<(&[f64], &[f64])> {
        match (&self.box_lo, &self.box_hi) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            _ => None,
        }
    }

    /// Membership test `Aξ ≤ b + tol`.
    pub fn contains(&self, xi: &[f64], tol: f64) -> bool {
        xi.len() == self.dim && self.rows.iter().all(|r| dot(&r.coeffs, xi) <= r.rhs + tol)
    }

    /// Largest row violation (0 when inside).
    pub fn violation(&self, xi: &[f64]) -> f64 {
        self.rows.iter().map(|r| dot(&r.coeffs, xi) - r.rhs).fold(0.0, f64::max)
    }

    /// Restriction `Ξ(w, ξ̄) = {ξ ∈ Ξ : w ∘ ξ = w ∘ ξ̄}`: the original rows
    /// plus pinning rows `ξ_i = ξ̄_i` (as inequality pairs) for every
    /// observed coordinate.
    pub fn restrict(&self, w: &[u8], xi_bar: &[f64]) -> Result<Polyhedron, DdidError> {
        if w.len() != self.dim || xi_bar.len() != self.dim {
            return Err(DdidError::InvalidData("restriction dimension mismatch".into()));
        }
        if !self.contains(xi_bar, FEAS_TOL) {
            return Err(DdidError::Infeasible(format!(
                "xi_bar violates the uncertainty set by {:.3e}",
                self.violation(xi_bar)
            )));
        }
        let mut rows = self.rows.clone();
        for i in 0..self.dim {
            if w[i] != 0 {
                let mut up = vec![0.0; self.dim];
                up[i] = 1.0;
                rows.push(HalfSpace { coeffs: up, rhs: xi_bar[i] });
                let mut down = vec![0.0; self.dim];
                down[i] = -1.0;
                rows.push(HalfSpace { coeffs: down, rhs: -xi_bar[i] });
            }
        }
        let mut restricted = Polyhedron::new(self.dim, rows)?;
        if let (Some(lo), Some(hi)) = (&self.box_lo, &self.box_hi) {
            let mut lo = lo.clone();
            let mut hi = hi.clone();
            for i in 0..self.dim {
                if w[i] != 0 {
                    lo[i] = xi_bar[i];
                    hi[i] = xi_bar[i];
                }
            }
            restricted.box_lo = Some(lo);
            restricted.box_hi = Some(hi);
        }
        Ok(restricted)
    }

    /// Install `ξ` variables and the `Aξ ≤ b` rows into a model under a name
    /// prefix; returns the variable ids.
    pub fn install(&self, model: &mut MilpModel, prefix: &str) -> Vec<VarId> {
        let (lo, hi) = match (&self.box_lo, &self.box_hi) {
            (Some(lo), Some(hi)) => (lo.clone(), hi.clone()),
            _ => (vec![f64::NEG_INFINITY; self.dim], vec![f64::INFINITY; self.dim]),
        };
        let vars: Vec<VarId> = (0..self.dim)
            .map(|i| model.add_var(format!("{prefix}{i}"), lo[i], hi[i]))
            .collect();
        for (ri, row) in self.rows.iter().enumerate() {
            let terms: Vec<_> = row
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| (vars[i], *c))
                .collect();
            model.add_constr(format!("{prefix}row{ri}"), terms, Cmp::Le, row.rhs);
        }
        vars
    }

    /// Minimize `objective · ξ` over the polyhedron.
    pub fn minimize(
        &self,
        objective: &[f64],
        engine: &dyn Engine,
        params: &SolveParams,
    ) -> Result<f64, DdidError> {
        let sol = self.extremize(objective, ObjSense::Min, engine, params)?;
        Ok(sol)
    }

    /// Maximize `objective · ξ` over the polyhedron.
    pub fn maximize(
        &self,
        objective: &[f64],
        engine: &dyn Engine,
        params: &SolveParams,
    ) -> Result<f64, DdidError> {
        self.extremize(objective, ObjSense::Max, engine, params)
    }

    fn extremize(
        &self,
        objective: &[f64],
        sense: ObjSense,
        engine: &dyn Engine,
        params: &SolveParams,
    ) -> Result<f64, DdidError> {
        let mut model = MilpModel::new("xi-probe", sense);
        let vars = self.install(&mut model, "xi");
        for (i, c) in objective.iter().enumerate() {
            model.set_obj(vars[i], *c);
        }
        let sol = engine.solve(&model, params)?;
        match sol.status {
            SolveStatus::Optimal => Ok(sol.objective),
            SolveStatus::Infeasible => {
                Err(DdidError::Infeasible("uncertainty set is empty".into()))
            }
            SolveStatus::Unbounded => Ok(match sense {
                ObjSense::Min => f64::NEG_INFINITY,
                ObjSense::Max => f64::INFINITY,
            }),
            other => Err(DdidError::InvalidData(format!("probe LP returned {other:?}"))),
        }
    }

    /// Per-coordinate bounds: the stored box when present, otherwise 2·dim LP
    /// probes. Infinite entries mean the coordinate is unbounded.
    pub fn coordinate_bounds(
        &self,
        engine: &dyn Engine,
        params: &SolveParams,
    ) -> Result<(Vec<f64>, Vec<f64>), DdidError> {
        if let (Some(lo), Some(hi)) = (&self.box_lo, &self.box_hi) {
            return Ok((lo.clone(), hi.clone()));
        }
        let mut lo = vec![0.0; self.dim];
        let mut hi = vec![0.0; self.dim];
        for i in 0..self.dim {
            let mut e = vec![0.0; self.dim];
            e[i] = 1.0;
            lo[i] = self.minimize(&e, engine, params)?;
            hi[i] = self.maximize(&e, engine, params)?;
        }
        Ok((lo, hi))
    }

    /// Any feasible point (LP with zero objective).
    pub fn feasible_point(
        &self,
        engine: &dyn Engine,
        params: &SolveParams,
    ) -> Result<Vec<f64>, DdidError> {
        let mut model = MilpModel::new("xi-feas", ObjSense::Min);
        let vars = self.install(&mut model, "xi");
        let sol = engine.solve(&model, params)?;
        if sol.status != SolveStatus::Optimal {
            return Err(DdidError::Infeasible("uncertainty set is empty".into()));
        }
        Ok(sol.values_of(&vars))
    }
}
