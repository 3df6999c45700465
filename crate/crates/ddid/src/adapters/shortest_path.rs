//! Robust shortest-path benchmark: seeded instance generator and conversion
//! to the DDID form with full information (`w ≡ e`).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DdidError;
use crate::linalg::Matrix;
use crate::polyhedron::{HalfSpace, Polyhedron};
use crate::problem::{DdidProblem, Sense, SCHEMA_VERSION};
use crate::recourse::{LinearRow, RecourseSpec, RowSense};

/// A directed shortest-path instance with budgeted cost inflation
/// `c_ij(ξ) = (1 + ξ_ij/2)·c̃_ij`, `ξ ∈ [0,1]^A`, `Σξ ≤ B`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShortestPathInstance {
    pub name: String,
    pub coords: Vec<(f64, f64)>,
    /// Kept arcs after removing the 70% largest-weight ones.
    pub arcs: Vec<(usize, usize)>,
    /// Euclidean nominal costs, aligned with `arcs`.
    pub nominal: Vec<f64>,
    pub start: usize,
    pub terminal: usize,
    /// Uncertainty budget B.
    pub budget: f64,
    pub seed: u64,
}

impl ShortestPathInstance {
    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }
}

/// Generate a seeded instance: node locations uniform in [0,10]², the
/// ⌊0.7·|base|⌋ largest-weight arcs removed, start/terminal the farthest node
/// pair. Self-arcs are excluded from the base set by default;
/// `include_self_arcs` restores the literal `𝒩 × 𝒩` reading. Instances whose
/// terminal is unreachable are regenerated from the next seed (recorded in
/// `seed`).
pub fn generate_shortest_path_instance(
    n: usize,
    seed: u64,
    budget: f64,
    include_self_arcs: bool,
) -> Result<ShortestPathInstance, DdidError> {
    if n < 2 {
        return Err(DdidError::InvalidData("need at least two nodes".into()));
    }
    let mut attempt_seed = seed;
    loop {
        let inst = generate_once(n, attempt_seed, budget, include_self_arcs);
        if reachable(&inst) {
            return Ok(inst);
        }
        attempt_seed += 1;
        if attempt_seed - seed > 1000 {
            return Err(DdidError::InvalidData(
                "could not generate a connected instance in 1000 attempts".into(),
            ));
        }
    }
}

fn generate_once(n: usize, seed: u64, budget: f64, include_self_arcs: bool) -> ShortestPathInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<(f64, f64)> =
        (0..n).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
    let dist = |i: usize, j: usize| -> f64 {
        let dx = coords[i].0 - coords[j].0;
        let dy = coords[i].1 - coords[j].1;
        (dx * dx + dy * dy).sqrt()
    };

    let mut base: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if include_self_arcs || i != j {
                base.push((i, j));
            }
        }
    }
    let remove = (0.7 * base.len() as f64).floor() as usize;
    // Largest nominal weight first; among equal weights the later arc goes
    // first, so lower-index arcs survive ties.
    let mut order: Vec<usize> = (0..base.len()).collect();
    order.sort_by(|&a, &b| {
        dist(base[b].0, base[b].1)
            .partial_cmp(&dist(base[a].0, base[a].1))
            .unwrap()
            .then(base[b].cmp(&base[a]))
    });
    let removed: std::collections::HashSet<usize> = order[..remove].iter().copied().collect();
    let mut arcs = Vec::new();
    let mut nominal = Vec::new();
    for (ai, arc) in base.iter().enumerate() {
        if !removed.contains(&ai) {
            arcs.push(*arc);
            nominal.push(dist(arc.0, arc.1));
        }
    }

    // Farthest pair, lowest-index pair on ties.
    let mut best = (0usize, 1usize);
    let mut best_d = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = dist(i, j);
            if d > best_d + 1e-12 {
                best_d = d;
                best = (i, j);
            }
        }
    }

    ShortestPathInstance {
        name: format!("sp-n{n}-s{seed}-B{budget}"),
        coords,
        arcs,
        nominal,
        start: best.0,
        terminal: best.1,
        budget,
        seed,
    }
}

fn reachable(inst: &ShortestPathInstance) -> bool {
    let n = inst.n_nodes();
    let mut adj = vec![Vec::new(); n];
    for (i, j) in &inst.arcs {
        adj[*i].push(*j);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![inst.start];
    seen[inst.start] = true;
    while let Some(node) = stack.pop() {
        if node == inst.terminal {
            return true;
        }
        for next in &adj[node] {
            if !seen[*next] {
                seen[*next] = true;
                stack.push(*next);
            }
        }
    }
    false
}

/// Convert to a min-convention DDID problem. The affine cost
/// `Σ (1 + ξ_a/2) c̃_a y_a` is expressed through an augmented uncertainty
/// vector: coordinate 0 is frozen at 1 and carries the nominal cost in its
/// `P` row, the remaining coordinates are the arc inflations with `P` rows
/// `c̃_a/2`. Information discovery plays no role in the benchmark, so the
/// caller fixes `w = e`; the returned `w_set` also pins every `w_i = 1`.
pub fn sp_to_ddid(inst: &ShortestPathInstance) -> Result<DdidProblem, DdidError> {
    let n_arcs = inst.arcs.len();
    let n_xi = n_arcs + 1;

    // Ξ: ξ₀ = 1 (two rows), ξ_a ∈ [0,1], Σ_a ξ_a ≤ B.
    let mut budget_row = vec![1.0; n_xi];
    budget_row[0] = 0.0;
    let rows = vec![HalfSpace { coeffs: budget_row, rhs: inst.budget }];
    let mut lo = vec![0.0; n_xi];
    let mut hi = vec![1.0; n_xi];
    lo[0] = 1.0;
    hi[0] = 1.0;
    let xi_set = Polyhedron::with_box(n_xi, rows, lo, hi)?;

    let mut p = Matrix::zeros(n_xi, n_arcs);
    for (ai, c) in inst.nominal.iter().enumerate() {
        p.set(0, ai, *c);
        p.set(ai + 1, ai, c / 2.0);
    }

    // Flow rows: Σ_out(j) y ≥ Σ_in(j) y + 𝕀[j=s] − 𝕀[j=t] for every node.
    let mut rows = Vec::new();
    for node in 0..inst.n_nodes() {
        let mut coeffs = vec![0.0; n_arcs];
        for (ai, (i, j)) in inst.arcs.iter().enumerate() {
            if *i == node {
                coeffs[ai] += 1.0;
            }
            if *j == node {
                coeffs[ai] -= 1.0;
            }
        }
        let rhs = if node == inst.start {
            1.0
        } else if node == inst.terminal {
            -1.0
        } else {
            0.0
        };
        rows.push(LinearRow { name: format!("flow_{node}"), coeffs, sense: RowSense::Ge, rhs });
    }

    let recourse = RecourseSpec { n_main: n_arcs, n_aux: 0, rows, separation: None };

    Ok(DdidProblem {
        schema_version: SCHEMA_VERSION,
        name: inst.name.clone(),
        sense: Sense::Min,
        xi_set,
        c: Matrix::zeros(n_xi, n_xi),
        p,
        w_set: (0..n_xi)
            .map(|i| {
                let mut coeffs = vec![0.0; n_xi];
                coeffs[i] = 1.0;
                LinearRow { name: format!("fix_w{i}"), coeffs, sense: RowSense::Ge, rhs: 1.0 }
            })
            .collect(),
        recourse,
        deterministic_discovery_cost: true,
    })
}
