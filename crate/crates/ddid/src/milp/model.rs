//! Backend-agnostic MILP/LP intermediate representation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::MilpError;

/// Index of a variable in a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

/// Variable kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
}

/// Constraint comparison sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

/// A declared variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
}

/// A linear constraint with sparse coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Cmp,
    pub rhs: f64,
}

/// Objective sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjSense {
    Min,
    Max,
}

/// Mixed-integer linear program.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MilpModel {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub obj_sense: ObjSense,
    /// Sparse objective coefficients; variables absent here have weight 0.
    pub obj_terms: Vec<(VarId, f64)>,
    /// Constant added to the objective value.
    pub obj_constant: f64,
    #[serde(skip)]
    name_index: HashMap<String, VarId>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>, obj_sense: ObjSense) -> Self {
        Self {
            name: name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            obj_sense,
            obj_terms: Vec::new(),
            obj_constant: 0.0,
            name_index: HashMap::new(),
        }
    }

    /// Add a continuous variable with the given bounds.
    pub fn add_var(&mut self, name: impl Into<String>, lo: f64, hi: f64) -> VarId {
        self.push_var(name.into(), VarKind::Continuous, lo, hi)
    }

    /// Add a binary variable.
    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.push_var(name.into(), VarKind::Binary, 0.0, 1.0)
    }

    /// Add a binary variable fixed to `value` (used for `fix_w`).
    pub fn add_fixed_binary(&mut self, name: impl Into<String>, value: f64) -> VarId {
        self.push_var(name.into(), VarKind::Binary, value, value)
    }

    fn push_var(&mut self, name: String, kind: VarKind, lo: f64, hi: f64) -> VarId {
        let id = VarId(self.variables.len());
        let prev = self.name_index.insert(name.clone(), id);
        assert!(prev.is_none(), "duplicate variable name {name:?}");
        self.variables.push(Variable { name, kind, lo, hi });
        id
    }

    /// Look up a variable by name.
    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.name_index.get(name).copied()
    }

    /// Set an objective coefficient (accumulates if called twice for one id).
    pub fn set_obj(&mut self, var: VarId, coeff: f64) {
        if coeff != 0.0 {
            self.obj_terms.push((var, coeff));
        }
    }

    /// Add a constraint row; zero-coefficient terms are dropped.
    pub fn add_constr(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Cmp,
        rhs: f64,
    ) {
        let terms: Vec<_> = terms.into_iter().filter(|(_, c)| *c != 0.0).collect();
        self.constraints.push(Constraint { name: name.into(), terms, sense, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Structural validation: bounds ordered, binaries in [0,1], term ids in
    /// range, names unique (guaranteed by the builder, re-checked here for
    /// deserialized models).
    pub fn validate(&self) -> Result<(), MilpError> {
        let mut seen = HashMap::new();
        for (i, v) in self.variables.iter().enumerate() {
            if v.lo > v.hi + 1e-12 {
                return Err(MilpError::InvalidModel(format!(
                    "variable {} has lo {} > hi {}",
                    v.name, v.lo, v.hi
                )));
            }
            if v.kind == VarKind::Binary && (v.lo < -1e-12 || v.hi > 1.0 + 1e-12) {
                return Err(MilpError::InvalidModel(format!(
                    "binary variable {} has bounds outside [0,1]",
                    v.name
                )));
            }
            if seen.insert(v.name.clone(), i).is_some() {
                return Err(MilpError::InvalidModel(format!("duplicate variable name {}", v.name)));
            }
        }
        for c in &self.constraints {
            for (VarId(i), coeff) in &c.terms {
                if *i >= self.variables.len() {
                    return Err(MilpError::InvalidModel(format!(
                        "constraint {} references undeclared variable index {i}",
                        c.name
                    )));
                }
                if !coeff.is_finite() {
                    return Err(MilpError::InvalidModel(format!(
                        "constraint {} has non-finite coefficient",
                        c.name
                    )));
                }
            }
        }
        for (VarId(i), _) in &self.obj_terms {
            if *i >= self.variables.len() {
                return Err(MilpError::InvalidModel(format!(
                    "objective references undeclared variable index {i}"
                )));
            }
        }
        Ok(())
    }

    /// Rebuild the name index (needed after deserialization).
    pub fn rebuild_index(&mut self) {
        self.name_index = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), VarId(i)))
            .collect();
    }

    /// Copy of the model with every integer variable relaxed to a continuous
    /// variable over the same bounds.
    pub fn lp_relaxation(&self) -> MilpModel {
        let mut relaxed = self.clone();
        for v in &mut relaxed.variables {
            v.kind = VarKind::Continuous;
        }
        relaxed
    }

    /// Evaluate the objective at a point given as values per variable index.
    pub fn objective_at(&self, values: &[f64]) -> f64 {
        let mut total = self.obj_constant;
        for (VarId(i), c) in &self.obj_terms {
            total += c * values[*i];
        }
        total
    }

    /// Maximum constraint violation of a point (0 when feasible).
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|(VarId(i), a)| a * values[*i]).sum();
            let v = match c.sense {
                Cmp::Le => lhs - c.rhs,
                Cmp::Ge => c.rhs - lhs,
                Cmp::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (i, var) in self.variables.iter().enumerate() {
            worst = worst.max(var.lo - values[i]).max(values[i] - var.hi);
        }
        worst
    }
}

/// Solve outcome reported by an engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    FeasibleAtLimit,
    Infeasible,
    Unbounded,
    Error,
}

impl SolveStatus {
    /// True when primal values are available.
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::FeasibleAtLimit)
    }
}

/// Result of solving a [`MilpModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// Objective value (includes the model's constant term).
    pub objective: f64,
    /// Best proven bound on the objective; equals `objective` at optimality.
    pub best_bound: f64,
    /// Values by variable name.
    pub values: HashMap<String, f64>,
    /// Values by variable index, aligned with the model's variable order.
    pub values_by_index: Vec<f64>,
    pub wall_time_s: f64,
    /// Branch-and-bound nodes, when the engine reports them.
    pub nodes: Option<u64>,
    /// Warnings accumulated while interpreting engine output.
    pub warnings: Vec<String>,
}

impl MilpSolution {
    pub fn value(&self, id: VarId) -> f64 {
        self.values_by_index[id.0]
    }

    /// Values of a block of variables.
    pub fn values_of(&self, ids: &[VarId]) -> Vec<f64> {
        ids.iter().map(|id| self.value(*id)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_assigns_sequential_ids_and_tracks_names() {
        let mut m = MilpModel::new("t", ObjSense::Min);
        let x = m.add_var("x", 0.0, 1.0);
        let b = m.add_binary("b");
        assert_eq!(x, VarId(0));
        assert_eq!(b, VarId(1));
        assert_eq!(m.var_by_name("b"), Some(b));
        m.add_constr("c0", vec![(x, 1.0), (b, 2.0)], Cmp::Le, 2.0);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn validate_rejects_binary_with_widened_bounds() {
        let mut m = MilpModel::new("t", ObjSense::Min);
        m.add_var("x", 0.0, 1.0);
        m.variables[0].kind = VarKind::Binary;
        m.variables[0].hi = 2.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn violation_measures_worst_row() {
        let mut m = MilpModel::new("t", ObjSense::Min);
        let x = m.add_var("x", 0.0, 10.0);
        m.add_constr("c", vec![(x, 1.0)], Cmp::Le, 1.0);
        assert!(m.max_violation(&[0.5]) <= 0.0 + 1e-12);
        assert!((m.max_violation(&[3.0]) - 2.0).abs() < 1e-12);
    }
}
