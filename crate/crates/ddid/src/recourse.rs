//! Binary recourse sets: explicit linear rows over `(y, aux)` plus an
//! optional lazily separated constraint family, and the depth-first
//! enumerator used by the brute-force oracles.

use serde::{Deserialize, Serialize};

use crate::error::DdidError;

/// Comparison sense of a recourse row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

/// Linear row over the concatenated `(y, aux)` vector. `coeffs` is dense with
/// length `n_main + n_aux`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub name: String,
    pub coeffs: Vec<f64>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl LinearRow {
    pub fn eval(&self, point: &[f64]) -> f64 {
        crate::linalg::dot(&self.coeffs, point)
    }

    pub fn satisfied(&self, point: &[f64], tol: f64) -> bool {
        let lhs = self.eval(point);
        match self.sense {
            RowSense::Le => lhs <= self.rhs + tol,
            RowSense::Ge => lhs >= self.rhs - tol,
            RowSense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// Serializable description of a lazily separated constraint family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeparationFamily {
    /// Orienteering subtour elimination: chosen edges must form one walk
    /// through the start and destination; any other connected component on
    /// visited nodes yields a violated row
    /// `Σ_{e ∈ U(S)} z_e ≤ Σ_{i ∈ S} y_i − y_u`.
    OrienteeringSubtour {
        /// Total node count of the split graph (start and destination
        /// included).
        nodes: usize,
        /// Visited-node index of each main `y` variable.
        profit_nodes: Vec<usize>,
        /// Edge of each aux `z` variable, as node pairs `(i, j)`, `i < j`.
        edges: Vec<(usize, usize)>,
        start: usize,
        dest: usize,
    },
}

/// Feasible binary second-stage decisions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecourseSpec {
    /// Profit-bearing binaries `y` (the columns of `P`).
    pub n_main: usize,
    /// Auxiliary binaries (e.g. edge variables).
    pub n_aux: usize,
    /// Explicit rows over `(y, aux)`.
    pub rows: Vec<LinearRow>,
    /// Lazily separated family, when the set needs one.
    pub separation: Option<SeparationFamily>,
}

impl RecourseSpec {
    pub fn num_vars(&self) -> usize {
        self.n_main + self.n_aux
    }

    /// Check that every row references only declared variables.
    pub fn check(&self) -> Result<(), DdidError> {
        for row in &self.rows {
            if row.coeffs.len() != self.num_vars() {
                return Err(DdidError::InvalidData(format!(
                    "recourse row {} has {} coefficients, expected {}",
                    row.name,
                    row.coeffs.len(),
                    self.num_vars()
                )));
            }
        }
        if let Some(SeparationFamily::OrienteeringSubtour { profit_nodes, edges, .. }) =
            &self.separation
        {
            if profit_nodes.len() != self.n_main || edges.len() != self.n_aux {
                return Err(DdidError::InvalidData(
                    "subtour family does not match the declared variable counts".into(),
                ));
            }
        }
        Ok(())
    }

    /// Run the separation contract on an integer point: returns violated
    /// rows, all valid for every member of the recourse set.
    pub fn separate(&self, y: &[f64], aux: &[f64]) -> Vec<LinearRow> {
        match &self.separation {
            None => Vec::new(),
            Some(family) => family.separate(y, aux),
        }
    }

    /// Explicit-row feasibility of an integer point.
    pub fn point_satisfies_rows(&self, point: &[f64], tol: f64) -> bool {
        self.rows.iter().all(|r| r.satisfied(point, tol))
    }

    /// All feasible `y` projections of the recourse set, by depth-first
    /// search over `(y, aux)` with row-interval pruning, verifying each leaf
    /// against the separation contract. Aborts once more than `cap` distinct
    /// `y` points are found.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<RecoursePoint>, DdidError> {
        let n = self.num_vars();
        if n > 64 {
            return Err(DdidError::InvalidData(format!(
                "recourse set has {n} binaries; enumeration is not tractable"
            )));
        }
        let order = self.dfs_order();
        let mut search = DfsState::new(self, order);
        search.run(cap)?;
        let mut points = search.points;
        points.sort_by(|a, b| a.y.cmp(&b.y));
        points.dedup_by(|a, b| a.y == b.y);
        Ok(points)
    }

    /// Variable order for the DFS: mains first, then auxiliaries sorted so
    /// that equality rows close early (edges grouped by their later node).
    fn dfs_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.num_vars()).collect();
        if let Some(SeparationFamily::OrienteeringSubtour { edges, .. }) = &self.separation {
            order.sort_by_key(|&v| {
                if v < self.n_main {
                    (0, v, 0)
                } else {
                    let (i, j) = edges[v - self.n_main];
                    (1, i.max(j), i.min(j))
                }
            });
        }
        order
    }
}

/// One feasible member of the recourse set: the profit projection plus an
/// auxiliary witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoursePoint {
    pub y: Vec<u8>,
    pub aux: Vec<u8>,
}

impl RecoursePoint {
    pub fn zero(spec: &RecourseSpec) -> Self {
        Self { y: vec![0; spec.n_main], aux: vec![0; spec.n_aux] }
    }

    pub fn y_f64(&self) -> Vec<f64> {
        self.y.iter().map(|v| *v as f64).collect()
    }

    pub fn concat_f64(&self) -> Vec<f64> {
        self.y.iter().chain(self.aux.iter()).map(|v| *v as f64).collect()
    }
}

const DFS_NODE_LIMIT: u64 = 50_000_000;

struct DfsState<'a> {
    spec: &'a RecourseSpec,
    order: Vec<usize>,
    assignment: Vec<u8>,
    // Per row: fixed part of the lhs, and the max addable from unassigned
    // positive coefficients / min addable from negative ones.
    fixed: Vec<f64>,
    max_add: Vec<f64>,
    min_add: Vec<f64>,
    points: Vec<RecoursePoint>,
    distinct_y: std::collections::HashSet<Vec<u8>>,
    nodes: u64,
}

impl<'a> DfsState<'a> {
    fn new(spec: &'a RecourseSpec, order: Vec<usize>) -> Self {
        let fixed = vec![0.0; spec.rows.len()];
        let mut max_add = vec![0.0; spec.rows.len()];
        let mut min_add = vec![0.0; spec.rows.len()];
        for (ri, row) in spec.rows.iter().enumerate() {
            for c in &row.coeffs {
                if *c > 0.0 {
                    max_add[ri] += c;
                } else {
                    min_add[ri] += c;
                }
            }
        }
        Self {
            spec,
            order,
            assignment: vec![0; spec.num_vars()],
            fixed,
            max_add,
            min_add,
            points: Vec::new(),
            distinct_y: Default::default(),
            nodes: 0,
        }
    }

    fn rows_can_complete(&self) -> bool {
        for (ri, row) in self.spec.rows.iter().enumerate() {
            let lo = self.fixed[ri] + self.min_add[ri];
            let hi = self.fixed[ri] + self.max_add[ri];
            let ok = match row.sense {
                RowSense::Le => lo <= row.rhs + 1e-9,
                RowSense::Ge => hi >= row.rhs - 1e-9,
                RowSense::Eq => lo <= row.rhs + 1e-9 && hi >= row.rhs - 1e-9,
            };
            if !ok {
                return false;
            }
        }
        true
    }

    fn assign(&mut self, var: usize, value: u8) {
        self.assignment[var] = value;
        for (ri, row) in self.spec.rows.iter().enumerate() {
            let c = row.coeffs[var];
            if c == 0.0 {
                continue;
            }
            if c > 0.0 {
                self.max_add[ri] -= c;
            } else {
                self.min_add[ri] -= c;
            }
            self.fixed[ri] += c * value as f64;
        }
    }

    fn unassign(&mut self, var: usize, value: u8) {
        for (ri, row) in self.spec.rows.iter().enumerate() {
            let c = row.coeffs[var];
            if c == 0.0 {
                continue;
            }
            if c > 0.0 {
                self.max_add[ri] += c;
            } else {
                self.min_add[ri] += c;
            }
            self.fixed[ri] -= c * value as f64;
        }
        self.assignment[var] = 0;
    }

    fn run(&mut self, cap: usize) -> Result<(), DdidError> {
        self.dfs(0, cap)
    }

    fn dfs(&mut self, depth: usize, cap: usize) -> Result<(), DdidError> {
        self.nodes += 1;
        if self.nodes > DFS_NODE_LIMIT {
            return Err(DdidError::InvalidData(
                "recourse enumeration exceeded the search-node limit".into(),
            ));
        }
        if !self.rows_can_complete() {
            return Ok(());
        }
        if depth == self.order.len() {
            let y: Vec<u8> = self.assignment[..self.spec.n_main].to_vec();
            let aux: Vec<u8> = self.assignment[self.spec.n_main..].to_vec();
            let yf: Vec<f64> = y.iter().map(|v| *v as f64).collect();
            let auxf: Vec<f64> = aux.iter().map(|v| *v as f64).collect();
            if !self.spec.separate(&yf, &auxf).is_empty() {
                return Ok(());
            }
            if self.distinct_y.insert(y.clone()) {
                if self.distinct_y.len() > cap {
                    return Err(DdidError::CapExceeded { cap });
                }
                self.points.push(RecoursePoint { y, aux });
            }
            return Ok(());
        }
        let var = self.order[depth];
        for value in [0u8, 1u8] {
            self.assign(var, value);
            self.dfs(depth + 1, cap)?;
            self.unassign(var, value);
        }
        Ok(())
    }
}

impl SeparationFamily {
    /// Violated rows at an integer point; empty when the point satisfies the
    /// whole family.
    pub fn separate(&self, y: &[f64], aux: &[f64]) -> Vec<LinearRow> {
        match self {
            SeparationFamily::OrienteeringSubtour { nodes, profit_nodes, edges, start, dest } => {
                separate_subtours(*nodes, profit_nodes, edges, *start, *dest, y, aux)
            }
        }
    }
}

/// Connectivity check on the chosen-edge subgraph: every connected component
/// that touches a visited node but neither the start nor the destination
/// yields one violated row `Σ_{e∈U(S)} z_e ≤ Σ_{i∈S} y_i − y_u`, with `u` the
/// smallest-index visited node of the component.
fn separate_subtours(
    nodes: usize,
    profit_nodes: &[usize],
    edges: &[(usize, usize)],
    start: usize,
    dest: usize,
    y: &[f64],
    aux: &[f64],
) -> Vec<LinearRow> {
    let y_of_node: std::collections::HashMap<usize, usize> =
        profit_nodes.iter().enumerate().map(|(vi, node)| (*node, vi)).collect();

    // Union-find over chosen edges.
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (ei, (i, j)) in edges.iter().enumerate() {
        if aux[ei] > 0.5 {
            let (ri, rj) = (find(&mut parent, *i), find(&mut parent, *j));
            if ri != rj {
                parent[ri] = rj;
            }
        }
    }

    let depot_roots: Vec<usize> =
        [start, dest].iter().map(|n| find(&mut parent, *n)).collect();
    let mut components: std::collections::HashMap<usize, Vec<usize>> = Default::default();
    for (node, yi) in &y_of_node {
        if y[*yi] > 0.5 {
            let root = find(&mut parent, *node);
            if !depot_roots.contains(&root) {
                components.entry(root).or_default().push(*node);
            }
        }
    }

    let mut cuts = Vec::new();
    let mut roots: Vec<usize> = components.keys().copied().collect();
    roots.sort_unstable();
    for root in roots {
        let mut members = components[&root].clone();
        members.sort_unstable();
        let anchor = members[0];
        let member_set: std::collections::HashSet<usize> = members.iter().copied().collect();
        let mut coeffs = vec![0.0; y.len() + aux.len()];
        // Σ_{e ∈ U(S)} z_e − Σ_{i∈S} y_i + y_u ≤ 0
        for (ei, (i, j)) in edges.iter().enumerate() {
            if member_set.contains(i) && member_set.contains(j) {
                coeffs[y.len() + ei] = 1.0;
            }
        }
        for node in &members {
            coeffs[y_of_node[node]] -= 1.0;
        }
        coeffs[y_of_node[&anchor]] += 1.0;
        cuts.push(LinearRow {
            name: format!("subtour_{}", members.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("_")),
            coeffs,
            sense: RowSense::Le,
            rhs: 0.0,
        });
    }
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A 2-of-3 selection set: y₁ + y₂ + y₃ ≤ 2, no auxiliaries.
    fn two_of_three() -> RecourseSpec {
        RecourseSpec {
            n_main: 3,
            n_aux: 0,
            rows: vec![LinearRow {
                name: "cap".into(),
                coeffs: vec![1.0, 1.0, 1.0],
                sense: RowSense::Le,
                rhs: 2.0,
            }],
            separation: None,
        }
    }

    #[test]
    fn enumerate_counts_all_points_under_cap() {
        let spec = two_of_three();
        let points = spec.enumerate(100).unwrap();
        assert_eq!(points.len(), 7); // all subsets except {1,2,3}
    }

    #[test]
    fn enumerate_cap_exceeded() {
        let spec = two_of_three();
        let err = spec.enumerate(2).unwrap_err();
        assert!(matches!(err, DdidError::CapExceeded { cap: 2 }));
    }

    #[test]
    fn zero_budget_leaves_only_the_empty_point() {
        let mut spec = two_of_three();
        spec.rows[0].rhs = 0.0;
        let points = spec.enumerate(10).unwrap();
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].y, vec![0, 0, 0]);
    }

    #[test]
    fn subtour_separation_flags_detached_cycle() {
        // Nodes 0..5: start 0, dest 4, profit nodes 1,2,3. Edges listed over
        // the profit triangle plus depot legs.
        let edges = vec![(0, 1), (1, 4), (1, 2), (2, 3), (1, 3), (0, 4)];
        let family = SeparationFamily::OrienteeringSubtour {
            nodes: 5,
            profit_nodes: vec![1, 2, 3],
            edges: edges.clone(),
            start: 0,
            dest: 4,
        };
        // Direct start→dest edge chosen, plus the 1-2-3 triangle detached.
        let y = [1.0, 1.0, 1.0];
        let aux = [0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let cuts = family.separate(&y, &aux);
        assert_eq!(cuts.len(), 1);
        let cut = &cuts[0];
        // Violated at the point: 3 edges inside S, rhs side Σy − y_u = 2.
        let point: Vec<f64> = y.iter().chain(aux.iter()).copied().collect();
        assert!(cut.eval(&point) > cut.rhs + 0.5);
        // Valid at a genuine path 0-1-2-3? Not a member (degree rows absent
        // here); check instead the canonical walk 0–1, 1–2, 2–3 … which has
        // no cycle inside S when it reaches the depot.
        let walk: Vec<f64> = vec![1.0, 1.0, 1.0, /*aux*/ 1.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        assert!(cut.satisfied(&walk, 1e-9));
    }

    #[test]
    fn connected_tour_produces_no_cuts() {
        let edges = vec![(0, 1), (1, 2), (2, 4)];
        let family = SeparationFamily::OrienteeringSubtour {
            nodes: 5,
            profit_nodes: vec![1, 2, 3],
            edges,
            start: 0,
            dest: 4,
        };
        let cuts = family.separate(&[1.0, 1.0, 0.0], &[1.0, 1.0, 1.0]);
        assert!(cuts.is_empty());
    }
}
