//! Sensor-placement orienteering: instance data, the recourse set of feasible
//! paths, uncertainty sets Ξ₁/Ξ₂ and conversion to a [`DdidProblem`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DdidError;
use crate::linalg::Matrix;
use crate::polyhedron::{HalfSpace, Polyhedron};
use crate::problem::{DdidProblem, Sense, SCHEMA_VERSION};
use crate::recourse::{LinearRow, RecourseSpec, RowSense, SeparationFamily};

/// An orienteering network: travel times over a complete undirected graph, a
/// start/destination pair, a per-node profit cap `U` and candidate maximum
/// durations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrienteeringInstance {
    pub name: String,
    /// Node coordinates when the instance is geometric.
    pub coords: Option<Vec<(f64, f64)>>,
    /// Symmetric travel-time matrix over the original nodes.
    pub travel: Matrix,
    pub start: usize,
    pub dest: usize,
    /// Per-node profit cap of the uncertainty set Ξ₁.
    pub u_cap: f64,
    /// Candidate maximum travel durations.
    pub t_list: Vec<f64>,
}

impl OrienteeringInstance {
    /// Build from coordinates with Euclidean travel times.
    pub fn from_coords(
        name: impl Into<String>,
        coords: Vec<(f64, f64)>,
        start: usize,
        dest: usize,
        u_cap: f64,
        t_list: Vec<f64>,
    ) -> Result<Self, DdidError> {
        let n = coords.len();
        if start >= n || dest >= n {
            return Err(DdidError::InvalidData("start/destination out of range".into()));
        }
        let mut travel = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let dx = coords[i].0 - coords[j].0;
                let dy = coords[i].1 - coords[j].1;
                travel.set(i, j, (dx * dx + dy * dy).sqrt());
            }
        }
        Ok(Self { name: name.into(), coords: Some(coords), travel, start, dest, u_cap, t_list })
    }

    /// Number of profit-bearing nodes (everything except start/destination).
    pub fn n_profit(&self) -> usize {
        let n = self.travel.rows;
        if self.start == self.dest {
            n - 1
        } else {
            n - 2
        }
    }

    pub fn check(&self) -> Result<(), DdidError> {
        let n = self.travel.rows;
        if self.travel.cols != n {
            return Err(DdidError::InvalidData("travel matrix is not square".into()));
        }
        if self.start >= n || self.dest >= n {
            return Err(DdidError::InvalidData("start/destination out of range".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let t = self.travel.get(i, j);
                if t < 0.0 || !t.is_finite() {
                    return Err(DdidError::InvalidData("negative or non-finite travel time".into()));
                }
                if (t - self.travel.get(j, i)).abs() > 1e-9 {
                    return Err(DdidError::InvalidData("travel matrix is not symmetric".into()));
                }
            }
        }
        Ok(())
    }

    /// Parse the plain-text instance format:
    ///
    /// ```text
    /// N U
    /// x y        (N lines; node 0 is the depot, start = destination)
    /// T: t1 t2 ...
    /// ```
    pub fn read_text(name: impl Into<String>, text: &str) -> Result<Self, DdidError> {
        let bad = |m: &str| DdidError::InvalidData(format!("instance text: {m}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        let mut head = header.split_whitespace();
        let n: usize = head
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("header must start with the node count"))?;
        let u: f64 = head
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("header must carry U after the node count"))?;
        let mut coords = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| bad("fewer coordinate lines than N"))?;
            let mut it = line.split_whitespace();
            let x: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("bad coordinate line"))?;
            let y: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("bad coordinate line"))?;
            coords.push((x, y));
        }
        let t_line = lines.next().ok_or_else(|| bad("missing T: line"))?;
        let rest = t_line.trim().strip_prefix("T:").ok_or_else(|| bad("missing T: prefix"))?;
        let t_list: Vec<f64> = rest
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad T value")))
            .collect::<Result<_, _>>()?;
        if t_list.is_empty() {
            return Err(bad("empty T list"));
        }
        Self::from_coords(name, coords, 0, 0, u, t_list)
    }

    /// Write the plain-text instance format. Requires coordinates.
    pub fn write_text(&self) -> Result<String, DdidError> {
        let coords = self
            .coords
            .as_ref()
            .ok_or_else(|| DdidError::InvalidData("text format needs coordinates".into()))?;
        let mut out = format!("{} {}\n", coords.len(), self.u_cap);
        for (x, y) in coords {
            out.push_str(&format!("{x} {y}\n"));
        }
        out.push_str("T:");
        for t in &self.t_list {
            out.push_str(&format!(" {t}"));
        }
        out.push('\n');
        Ok(out)
    }
}

/// The split routing graph: start and destination become separate co-located
/// endpoints when the instance uses a single depot, keeping the path rows of
/// the recourse set verbatim.
#[derive(Debug, Clone)]
pub struct SplitGraph {
    pub n_nodes: usize,
    /// Split ids of the profit nodes, aligned with the `y` variables.
    pub profit_nodes: Vec<usize>,
    /// Original node id behind each split id.
    pub original_of: Vec<usize>,
    /// All undirected edges `(i, j)`, `i < j`, aligned with the `z` variables.
    pub edges: Vec<(usize, usize)>,
    pub edge_time: Vec<f64>,
    pub start: usize,
    pub dest: usize,
}

impl SplitGraph {
    pub fn new(inst: &OrienteeringInstance) -> Self {
        let n = inst.travel.rows;
        let split_depot = inst.start == inst.dest;
        // Split layout: 0 = start, 1..=p profit nodes, p+1 = destination.
        let originals: Vec<usize> =
            (0..n).filter(|i| *i != inst.start && *i != inst.dest).collect();
        let p = originals.len();
        let mut original_of = Vec::with_capacity(p + 2);
        original_of.push(inst.start);
        original_of.extend(&originals);
        original_of.push(inst.dest);
        let n_nodes = p + 2;
        let time = |a: usize, b: usize| -> f64 {
            if split_depot && ((a == 0 && b == n_nodes - 1) || (b == 0 && a == n_nodes - 1)) {
                0.0
            } else {
                inst.travel.get(original_of[a], original_of[b])
            }
        };
        let mut edges = Vec::new();
        let mut edge_time = Vec::new();
        for i in 0..n_nodes {
            for j in (i + 1)..n_nodes {
                edges.push((i, j));
                edge_time.push(time(i, j));
            }
        }
        Self {
            n_nodes,
            profit_nodes: (1..=p).collect(),
            original_of,
            edges,
            edge_time,
            start: 0,
            dest: n_nodes - 1,
        }
    }

    fn incident(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, (i, j))| *i == node || *j == node)
            .map(|(ei, _)| ei)
    }
}

/// The set of feasible paths as a [`RecourseSpec`]: budget, depot and degree
/// rows explicitly, subtour elimination as the separation contract.
pub fn build_orienteering_recourse(
    inst: &OrienteeringInstance,
    t_max: f64,
) -> Result<RecourseSpec, DdidError> {
    if t_max < 0.0 {
        return Err(DdidError::InvalidData("maximum duration must be nonnegative".into()));
    }
    inst.check()?;
    let graph = SplitGraph::new(inst);
    let n_main = graph.profit_nodes.len();
    let n_aux = graph.edges.len();
    let width = n_main + n_aux;

    let mut rows = Vec::new();
    let mut budget = vec![0.0; width];
    for (ei, t) in graph.edge_time.iter().enumerate() {
        budget[n_main + ei] = *t;
    }
    rows.push(LinearRow { name: "budget".into(), coeffs: budget, sense: RowSense::Le, rhs: t_max });

    for (label, node) in [("depot_start", graph.start), ("depot_dest", graph.dest)] {
        let mut coeffs = vec![0.0; width];
        for ei in graph.incident(node) {
            coeffs[n_main + ei] = 1.0;
        }
        rows.push(LinearRow { name: label.into(), coeffs, sense: RowSense::Eq, rhs: 1.0 });
    }

    for (yi, node) in graph.profit_nodes.iter().enumerate() {
        let mut coeffs = vec![0.0; width];
        for ei in graph.incident(*node) {
            coeffs[n_main + ei] = 1.0;
        }
        coeffs[yi] = -2.0;
        rows.push(LinearRow {
            name: format!("degree_{node}"),
            coeffs,
            sense: RowSense::Eq,
            rhs: 0.0,
        });
    }

    Ok(RecourseSpec {
        n_main,
        n_aux,
        rows,
        separation: Some(SeparationFamily::OrienteeringSubtour {
            nodes: graph.n_nodes,
            profit_nodes: graph.profit_nodes.clone(),
            edges: graph.edges.clone(),
            start: graph.start,
            dest: graph.dest,
        }),
    })
}

/// Ξ₁ = {ξ ∈ [0, U]^N : eᵀξ = 1}: total profit known, breakdown uncertain.
pub fn make_xi1(n: usize, u: f64) -> Result<Polyhedron, DdidError> {
    if u <= 0.0 {
        return Err(DdidError::InvalidData("U must be positive".into()));
    }
    if (n as f64) * u < 1.0 - 1e-12 {
        return Err(DdidError::InvalidData(format!(
            "Ξ₁ is empty: {n} coordinates capped at {u} cannot sum to 1"
        )));
    }
    let rows = vec![
        HalfSpace { coeffs: vec![1.0; n], rhs: 1.0 },
        HalfSpace { coeffs: vec![-1.0; n], rhs: -1.0 },
    ];
    Polyhedron::with_box(n, rows, vec![0.0; n], vec![u.min(1.0); n])
}

/// Ξ₂ = {ξ ≥ 0 : ξ_i ∈ [Û_i(1−θ), Û_i(1+θ)], eᵀξ = 1}.
pub fn make_xi2(u_hat: &[f64], theta: f64) -> Result<Polyhedron, DdidError> {
    if theta < 0.0 {
        return Err(DdidError::InvalidData("θ must be nonnegative".into()));
    }
    if u_hat.iter().any(|u| *u < 0.0) {
        return Err(DdidError::InvalidData("Û entries must be nonnegative".into()));
    }
    let lo: Vec<f64> = u_hat.iter().map(|u| (u * (1.0 - theta)).max(0.0)).collect();
    let hi: Vec<f64> = u_hat.iter().map(|u| u * (1.0 + theta)).collect();
    let lo_sum: f64 = lo.iter().sum();
    let hi_sum: f64 = hi.iter().sum();
    if hi_sum < 1.0 - 1e-12 || lo_sum > 1.0 + 1e-12 {
        return Err(DdidError::InvalidData(format!(
            "Ξ₂ is empty: eᵀξ = 1 incompatible with box sums [{lo_sum}, {hi_sum}]"
        )));
    }
    let n = u_hat.len();
    let rows = vec![
        HalfSpace { coeffs: vec![1.0; n], rhs: 1.0 },
        HalfSpace { coeffs: vec![-1.0; n], rhs: -1.0 },
    ];
    Polyhedron::with_box(n, rows, lo, hi)
}

/// Convert an orienteering instance into the max-convention DDID problem
/// `max_{w: eᵀw ≤ ⌈δ N⌉} min_{ξ̄} max_{y} min_{ξ} ξᵀy` over the given Ξ.
pub fn orienteering_to_ddid(
    inst: &OrienteeringInstance,
    t_max: f64,
    delta: f64,
    xi_set: Polyhedron,
) -> Result<DdidProblem, DdidError> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(DdidError::InvalidData("δ must lie in [0, 1]".into()));
    }
    let recourse = build_orienteering_recourse(inst, t_max)?;
    let n = recourse.n_main;
    if xi_set.dim() != n {
        return Err(DdidError::InvalidData(format!(
            "Ξ has dimension {}, instance has {n} profit nodes",
            xi_set.dim()
        )));
    }
    let budget = (delta * n as f64).ceil();
    let mut p = Matrix::zeros(n, n);
    for i in 0..n {
        p.set(i, i, 1.0);
    }
    Ok(DdidProblem {
        schema_version: SCHEMA_VERSION,
        name: format!("{}-T{}-d{}", inst.name, t_max, delta),
        sense: Sense::Max,
        xi_set,
        c: Matrix::zeros(n, n),
        p,
        w_set: vec![LinearRow {
            name: "sensor_budget".into(),
            coeffs: vec![1.0; n],
            sense: RowSense::Le,
            rhs: budget,
        }],
        recourse,
        deterministic_discovery_cost: true,
    })
}

/// The worked four-node instance: depot 0 plus nodes 1, 2, 3 at unit distance
/// (left / top / right), t₁₂ = t₂₃ = √2, t₁₃ = 2, T = 3.5, Ξ the unit
/// simplex, at most `b` sensors.
pub fn example1(b: usize) -> Result<DdidProblem, DdidError> {
    let inst = example1_instance();
    let xi = make_xi1(3, 1.0)?;
    let mut problem = orienteering_to_ddid(&inst, 3.5, 0.0, xi)?;
    problem.name = format!("example1-B{b}");
    problem.w_set = vec![LinearRow {
        name: "sensor_budget".into(),
        coeffs: vec![1.0; 3],
        sense: RowSense::Le,
        rhs: b as f64,
    }];
    Ok(problem)
}

/// The Example-1 network alone.
pub fn example1_instance() -> OrienteeringInstance {
    let s2 = std::f64::consts::SQRT_2;
    let travel = Matrix::from_rows(
        4,
        4,
        vec![
            0.0, 1.0, 1.0, 1.0, //
            1.0, 0.0, s2, 2.0, //
            1.0, s2, 0.0, s2, //
            1.0, 2.0, s2, 0.0,
        ],
    );
    OrienteeringInstance {
        name: "example1".into(),
        coords: None,
        travel,
        start: 0,
        dest: 0,
        u_cap: 1.0,
        t_list: vec![3.5],
    }
}

/// Department labels of the 14-node hospital network.
pub const ALRIJNE_LABELS: [&str; 14] = [
    "0B", "0C", "1A", "1B", "1C", "2A", "2B", "2C", "3A", "3B", "4A", "4B", "5A", "5B",
];

/// Expected crate fractions Û per node, in [`ALRIJNE_LABELS`] order.
pub const ALRIJNE_U_HAT: [f64; 14] = [
    0.05, 0.10, 0.10, 0.07, 0.05, 0.10, 0.05, 0.06, 0.07, 0.05, 0.07, 0.08, 0.10, 0.05,
];

/// Hospital instance from a user-supplied 15×15 travel-time matrix
/// (node 0 = pharmacy depot, nodes 1..=14 in [`ALRIJNE_LABELS`] order).
pub fn alrijne_instance(travel: Matrix, t_list: Vec<f64>) -> Result<OrienteeringInstance, DdidError> {
    if travel.rows != 15 || travel.cols != 15 {
        return Err(DdidError::InvalidData(
            "hospital travel matrix must be 15×15 (depot + 14 nodes)".into(),
        ));
    }
    let inst = OrienteeringInstance {
        name: "alrijne".into(),
        coords: None,
        travel,
        start: 0,
        dest: 0,
        u_cap: 0.2,
        t_list,
    };
    inst.check()?;
    Ok(inst)
}

/// Seeded random geometric instance: `n_total` nodes (node 0 the depot) with
/// coordinates uniform in [0, 10]². The two duration candidates scale the
/// median depot round trip so the path set is neither empty nor everything.
pub fn random_orienteering(seed: u64, n_total: usize, u_cap: f64) -> OrienteeringInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<(f64, f64)> =
        (0..n_total).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
    let mut depot_dist: Vec<f64> = (1..n_total)
        .map(|i| {
            let dx = coords[i].0 - coords[0].0;
            let dy = coords[i].1 - coords[0].1;
            (dx * dx + dy * dy).sqrt()
        })
        .collect();
    depot_dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = depot_dist[depot_dist.len() / 2];
    let t_list = vec![2.6 * median, 4.2 * median];
    OrienteeringInstance::from_coords(
        format!("rand-{seed}-n{n_total}"),
        coords,
        0,
        0,
        u_cap,
        t_list,
    )
    .expect("generated coordinates are always valid")
}
