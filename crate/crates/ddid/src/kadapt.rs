//! Strengthened K-adaptability: the dualized MILP over K constant policies
//! with symmetry ordering `A_S`, tightened α bounds `A_B`, strengthened
//! McCormick linearization, big-M γ rows, optimistic inequalities, RLT rows,
//! and lazy recourse separation per policy block. With every flag off and
//! α ∈ [0,1] the same builder yields the plain formulation used as the A/B
//! baseline.

use std::collections::HashSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ccg::{build_ccg_master, install_recourse};
use crate::error::DdidError;
use crate::linalg::Matrix;
use crate::milp::{
    solve_with_separation, Cmp, CutRow, Engine, MilpModel, MilpSolution, ObjSense, SolveParams,
    SolveStatus, Separator, VarId, DEFAULT_MAX_SEPARATION_ROUNDS,
};
use crate::problem::DdidProblem;
use crate::recourse::{LinearRow, RecoursePoint, RowSense};
use crate::FEAS_TOL;

/// Individually togglable strengthening blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrengthenFlags {
    /// Symmetry ordering rows `α_k ≥ α_{k+1}` (the set A_S).
    pub symmetry: bool,
    /// Tightened α bounds (the set A_B) driving the McCormick envelopes.
    pub bounds: bool,
    /// Optimistic inequalities from component-wise best-case costs.
    pub optimistic: bool,
    /// RLT products of recourse rows with α_k.
    pub rlt: bool,
}

impl StrengthenFlags {
    pub fn all() -> Self {
        Self { symmetry: true, bounds: true, optimistic: true, rlt: true }
    }

    pub fn none() -> Self {
        Self { symmetry: false, bounds: false, optimistic: false, rlt: false }
    }
}

/// Big-M choice for the γ linearization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BigM {
    /// `K · max_i(Σ_j |C_ij| + Σ_j |P_ij|) · max(1, ‖box‖∞)`, from the box
    /// bounds of Ξ.
    Auto,
    Fixed(f64),
}

/// Options of the K-adaptability solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KadaptOptions {
    pub k: usize,
    pub strengthen: StrengthenFlags,
    pub big_m: BigM,
    /// Fix the observation vector (e.g. `w ≡ e` for the shortest-path
    /// benchmark).
    pub fix_w: Option<Vec<u8>>,
}

impl KadaptOptions {
    pub fn new(k: usize) -> Self {
        Self { k, strengthen: StrengthenFlags::all(), big_m: BigM::Auto, fix_w: None }
    }

    pub fn plain(k: usize) -> Self {
        Self { k, strengthen: StrengthenFlags::none(), big_m: BigM::Auto, fix_w: None }
    }

    fn check(&self, problem: &DdidProblem) -> Result<(), DdidError> {
        if self.k < 1 {
            return Err(DdidError::InvalidData("K must be at least 1".into()));
        }
        if let BigM::Fixed(m) = self.big_m {
            if m.is_nan() || m <= 0.0 {
                return Err(DdidError::InvalidData("big_M must be positive".into()));
            }
        }
        if let Some(w) = &self.fix_w {
            if w.len() != problem.n_w() {
                return Err(DdidError::InvalidData("fix_w dimension mismatch".into()));
            }
        }
        Ok(())
    }
}

/// α bounds of the set A_B: `ℓ = (1/K, 0, …, 0)`, `u_k = 1/k`.
pub fn alpha_bounds(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![0.0; k];
    lo[0] = 1.0 / k as f64;
    let hi = (1..=k).map(|i| 1.0 / i as f64).collect();
    (lo, hi)
}

/// Index pairs `(k, k+1)` of the A_S ordering rows `α_k ≥ α_{k+1}`.
pub fn symmetry_rows(k: usize) -> Vec<(usize, usize)> {
    (0..k.saturating_sub(1)).map(|i| (i, i + 1)).collect()
}

/// Component-wise best-case cost vectors over Ξ in min convention:
/// `ζ^w_i = min_ξ ξᵀC_i`, `ζ^y_j = min_ξ ξᵀP_j` — one LP per column.
pub fn compute_optimistic_vectors(
    problem: &DdidProblem,
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<(Vec<f64>, Vec<f64>), DdidError> {
    let c_min = problem.c_min();
    let p_min = problem.p_min();
    let minimize_col = |m: &Matrix, j: usize| -> Result<f64, DdidError> {
        let col = m.col(j);
        if col.iter().all(|v| *v == 0.0) {
            return Ok(0.0);
        }
        let value = problem.xi_set.minimize(&col, engine, params)?;
        if !value.is_finite() {
            return Err(DdidError::InvalidData(
                "Ξ must be bounded to compute optimistic vectors".into(),
            ));
        }
        Ok(value)
    };
    let zeta_w =
        (0..c_min.cols).map(|j| minimize_col(&c_min, j)).collect::<Result<Vec<_>, _>>()?;
    let zeta_y =
        (0..p_min.cols).map(|j| minimize_col(&p_min, j)).collect::<Result<Vec<_>, _>>()?;
    Ok((zeta_w, zeta_y))
}

/// One optimistic inequality `bᵀ(β + Σ_κ β^κ) ≥ ζ^w·w + ζ^y·y^k`, expressed
/// as data: the objective side is shared, the right side binds policy `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticRow {
    pub policy: usize,
    pub zeta_w: Vec<f64>,
    pub zeta_y: Vec<f64>,
}

/// The K optimistic inequalities for the given best-case vectors.
pub fn optimistic_rows(zeta_w: &[f64], zeta_y: &[f64], k: usize) -> Vec<OptimisticRow> {
    (0..k)
        .map(|policy| OptimisticRow {
            policy,
            zeta_w: zeta_w.to_vec(),
            zeta_y: zeta_y.to_vec(),
        })
        .collect()
}

/// RLT product of a recourse row with `α_k`: `fᵀ(y,aux) ⋈ h` becomes
/// `fᵀ(ỹ^k, aũx^k) − h·α_k ⋈ 0` (sense preserved, valid since `α_k ≥ 0`).
#[derive(Debug, Clone)]
pub struct RltRow {
    /// Coefficients over the lifted `(ỹ^k, aũx^k)` vector.
    pub coeffs: Vec<f64>,
    /// Coefficient on `α_k` (equals `−h`).
    pub alpha_coeff: f64,
    pub sense: RowSense,
    pub name: String,
}

/// Build the RLT companion of one recourse row for policy `k`.
pub fn rlt_row(row: &LinearRow, k: usize) -> RltRow {
    RltRow {
        coeffs: row.coeffs.clone(),
        alpha_coeff: -row.rhs,
        sense: row.sense,
        name: format!("rlt{k}_{}", row.name),
    }
}

/// Per-policy variable blocks of the built model.
#[derive(Debug, Clone)]
pub struct PolicyBlock {
    pub y: Vec<VarId>,
    pub aux: Vec<VarId>,
    pub y_tilde: Vec<VarId>,
    pub aux_tilde: Vec<VarId>,
    pub w_tilde: Vec<VarId>,
    pub beta_k: Vec<VarId>,
    pub gamma: Vec<VarId>,
    pub alpha: VarId,
}

/// The assembled K-adaptability MILP plus everything needed to read a
/// solution back and to run separation.
pub struct KadaptModel {
    pub model: MilpModel,
    pub w: Vec<VarId>,
    pub beta: Vec<VarId>,
    pub blocks: Vec<PolicyBlock>,
    pub big_m: f64,
    pub options: KadaptOptions,
    /// (ζ^w, ζ^y) when the optimistic block is active.
    pub zeta: Option<(Vec<f64>, Vec<f64>)>,
}

fn auto_big_m(
    problem: &DdidProblem,
    k: usize,
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<f64, DdidError> {
    let c_min = problem.c_min();
    let p_min = problem.p_min();
    let mut row_mass: f64 = 1.0;
    for i in 0..problem.n_xi() {
        let mass: f64 = c_min.row(i).iter().map(|v| v.abs()).sum::<f64>()
            + p_min.row(i).iter().map(|v| v.abs()).sum::<f64>();
        row_mass = row_mass.max(mass);
    }
    let (lo, hi) = problem.xi_set.coordinate_bounds(engine, params)?;
    let mut box_mass: f64 = 1.0;
    for i in 0..problem.n_xi() {
        if !lo[i].is_finite() || !hi[i].is_finite() {
            return Err(DdidError::InvalidData(
                "Ξ must be bounded to derive big-M automatically".into(),
            ));
        }
        box_mass = box_mass.max(lo[i].abs()).max(hi[i].abs());
    }
    Ok(k as f64 * row_mass * box_mass)
}

/// Four McCormick rows tying `tilde = α·x` for binary `x` and `α ∈ [lo, hi]`.
fn add_mccormick(
    model: &mut MilpModel,
    name: &str,
    alpha: VarId,
    x: VarId,
    tilde: VarId,
    lo: f64,
    hi: f64,
) {
    model.add_constr(
        format!("{name}_ge_lo"),
        vec![(tilde, -1.0), (x, lo)],
        Cmp::Le,
        0.0,
    );
    model.add_constr(
        format!("{name}_le_hi"),
        vec![(tilde, 1.0), (x, -hi)],
        Cmp::Le,
        0.0,
    );
    model.add_constr(
        format!("{name}_le_free"),
        vec![(tilde, 1.0), (x, -lo), (alpha, -1.0)],
        Cmp::Le,
        -lo,
    );
    model.add_constr(
        format!("{name}_ge_free"),
        vec![(tilde, -1.0), (x, hi), (alpha, 1.0)],
        Cmp::Le,
        hi,
    );
}

/// Build problem (the strengthened counterpart, or the plain one when every
/// flag is off): binaries `(w, y^k, aux^k)`, duals `(α, β, β^k, γ^k)` and the
/// linearized copies `(ỹ^k, w̃^k, aũx^k)`, objective `min bᵀ(β + Σ_k β^k)`.
pub fn build_strengthened(
    problem: &DdidProblem,
    options: &KadaptOptions,
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<KadaptModel, DdidError> {
    options.check(problem)?;
    problem.recourse.check()?;
    let k_count = options.k;
    let c_min = problem.c_min();
    let p_min = problem.p_min();
    let n_xi = problem.n_xi();
    let n_w = problem.n_w();
    let n_y = problem.recourse.n_main;
    let n_aux = problem.recourse.n_aux;
    let xi_rows = problem.xi_set.rows();
    let n_rows = xi_rows.len();

    let big_m = match options.big_m {
        BigM::Fixed(m) => m,
        BigM::Auto => auto_big_m(problem, k_count, engine, params)?,
    };
    let (alpha_lo, alpha_hi) = if options.strengthen.bounds {
        alpha_bounds(k_count)
    } else {
        (vec![0.0; k_count], vec![1.0; k_count])
    };
    let zeta = if options.strengthen.optimistic {
        Some(compute_optimistic_vectors(problem, engine, params)?)
    } else {
        None
    };

    let mut model = MilpModel::new(format!("kadapt-{}", problem.name), ObjSense::Min);
    let w = problem.install_w(&mut model, options.fix_w.as_deref());
    let alpha: Vec<VarId> = (0..k_count)
        .map(|k| model.add_var(format!("alpha{k}"), alpha_lo[k], alpha_hi[k]))
        .collect();
    let beta: Vec<VarId> = (0..n_rows)
        .map(|l| {
            let v = model.add_var(format!("beta{l}"), 0.0, f64::INFINITY);
            model.set_obj(v, xi_rows[l].rhs);
            v
        })
        .collect();

    let mut blocks = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let (y, aux) = install_recourse(&mut model, &problem.recourse, &format!("k{k}_"));
        let beta_k: Vec<VarId> = (0..n_rows)
            .map(|l| {
                let v = model.add_var(format!("beta{k}_{l}"), 0.0, f64::INFINITY);
                model.set_obj(v, xi_rows[l].rhs);
                v
            })
            .collect();
        let gamma: Vec<VarId> = (0..n_xi)
            .map(|i| model.add_var(format!("gamma{k}_{i}"), f64::NEG_INFINITY, f64::INFINITY))
            .collect();
        let y_tilde: Vec<VarId> =
            (0..n_y).map(|j| model.add_var(format!("yt{k}_{j}"), 0.0, alpha_hi[k])).collect();
        let aux_tilde: Vec<VarId> =
            (0..n_aux).map(|j| model.add_var(format!("zt{k}_{j}"), 0.0, alpha_hi[k])).collect();
        let w_tilde: Vec<VarId> =
            (0..n_w).map(|i| model.add_var(format!("wt{k}_{i}"), 0.0, alpha_hi[k])).collect();
        blocks.push(PolicyBlock {
            y,
            aux,
            y_tilde,
            aux_tilde,
            w_tilde,
            beta_k,
            gamma,
            alpha: alpha[k],
        });
    }

    // eᵀα = 1.
    model.add_constr(
        "alpha_simplex",
        alpha.iter().map(|a| (*a, 1.0)).collect(),
        Cmp::Eq,
        1.0,
    );

    // Aᵀβ = Σ_k γ^k, one row per uncertainty coordinate.
    for i in 0..n_xi {
        let mut terms: Vec<(VarId, f64)> = Vec::new();
        for (l, row) in xi_rows.iter().enumerate() {
            if row.coeffs[i] != 0.0 {
                terms.push((beta[l], row.coeffs[i]));
            }
        }
        for block in &blocks {
            terms.push((block.gamma[i], -1.0));
        }
        model.add_constr(format!("balance{i}"), terms, Cmp::Eq, 0.0);
    }

    for (k, block) in blocks.iter().enumerate() {
        // Aᵀβ^k + γ^k = C w̃^k + P ỹ^k.
        for i in 0..n_xi {
            let mut terms: Vec<(VarId, f64)> = Vec::new();
            for (l, row) in xi_rows.iter().enumerate() {
                if row.coeffs[i] != 0.0 {
                    terms.push((block.beta_k[l], row.coeffs[i]));
                }
            }
            terms.push((block.gamma[i], 1.0));
            for j in 0..n_w {
                let c = c_min.get(i, j);
                if c != 0.0 {
                    terms.push((block.w_tilde[j], -c));
                }
            }
            for j in 0..n_y {
                let p = p_min.get(i, j);
                if p != 0.0 {
                    terms.push((block.y_tilde[j], -p));
                }
            }
            model.add_constr(format!("dual{k}_{i}"), terms, Cmp::Eq, 0.0);
        }
        // γ^k ∈ [−M w, M w].
        for (i, (gamma_i, w_i)) in block.gamma.iter().zip(&w).enumerate() {
            model.add_constr(
                format!("gamma_ub{k}_{i}"),
                vec![(*gamma_i, 1.0), (*w_i, -big_m)],
                Cmp::Le,
                0.0,
            );
            model.add_constr(
                format!("gamma_lb{k}_{i}"),
                vec![(*gamma_i, -1.0), (*w_i, -big_m)],
                Cmp::Le,
                0.0,
            );
        }
        // McCormick envelopes for ỹ, w̃ and aũx.
        for j in 0..n_y {
            add_mccormick(
                &mut model,
                &format!("mc_y{k}_{j}"),
                block.alpha,
                block.y[j],
                block.y_tilde[j],
                alpha_lo[k],
                alpha_hi[k],
            );
        }
        for j in 0..n_aux {
            add_mccormick(
                &mut model,
                &format!("mc_z{k}_{j}"),
                block.alpha,
                block.aux[j],
                block.aux_tilde[j],
                alpha_lo[k],
                alpha_hi[k],
            );
        }
        for (i, (w_i, wt_i)) in w.iter().zip(&block.w_tilde).enumerate() {
            add_mccormick(
                &mut model,
                &format!("mc_w{k}_{i}"),
                block.alpha,
                *w_i,
                *wt_i,
                alpha_lo[k],
                alpha_hi[k],
            );
        }
    }

    if options.strengthen.symmetry {
        for (a, b) in symmetry_rows(k_count) {
            model.add_constr(
                format!("sym{a}"),
                vec![(alpha[a], 1.0), (alpha[b], -1.0)],
                Cmp::Ge,
                0.0,
            );
        }
    }

    if let Some((zeta_w, zeta_y)) = &zeta {
        for row in optimistic_rows(zeta_w, zeta_y, k_count) {
            let block = &blocks[row.policy];
            let mut terms: Vec<(VarId, f64)> = Vec::new();
            for (l, xi_row) in xi_rows.iter().enumerate() {
                if xi_row.rhs != 0.0 {
                    terms.push((beta[l], xi_row.rhs));
                    for other in &blocks {
                        terms.push((other.beta_k[l], xi_row.rhs));
                    }
                }
            }
            for (i, z) in row.zeta_w.iter().enumerate() {
                if *z != 0.0 {
                    terms.push((w[i], -z));
                }
            }
            for (j, z) in row.zeta_y.iter().enumerate() {
                if *z != 0.0 {
                    terms.push((block.y[j], -z));
                }
            }
            model.add_constr(format!("optimistic{}", row.policy), terms, Cmp::Ge, 0.0);
        }
    }

    if options.strengthen.rlt {
        for (k, block) in blocks.iter().enumerate() {
            for row in &problem.recourse.rows {
                install_rlt_row(&mut model, &rlt_row(row, k), block, problem.recourse.n_main);
            }
        }
    }

    Ok(KadaptModel { model, w, beta, blocks, big_m, options: options.clone(), zeta })
}

fn install_rlt_row(model: &mut MilpModel, row: &RltRow, block: &PolicyBlock, n_main: usize) {
    let mut terms: Vec<(VarId, f64)> = Vec::new();
    for (j, c) in row.coeffs.iter().enumerate() {
        if *c != 0.0 {
            let var = if j < n_main { block.y_tilde[j] } else { block.aux_tilde[j - n_main] };
            terms.push((var, *c));
        }
    }
    if row.alpha_coeff != 0.0 {
        terms.push((block.alpha, row.alpha_coeff));
    }
    let sense = match row.sense {
        RowSense::Le => Cmp::Le,
        RowSense::Eq => Cmp::Eq,
        RowSense::Ge => Cmp::Ge,
    };
    let name = format!("{}_{}", row.name, model.constraints.len());
    model.add_constr(name, terms, sense, 0.0);
}

/// Lazy separation over every policy block: a subtour row discovered on one
/// block is valid for the whole recourse set, so it is imposed on all K
/// blocks, each with its RLT companion when that strengthening is active.
struct KadaptSeparator<'a> {
    problem: &'a DdidProblem,
    blocks: &'a [PolicyBlock],
    rlt: bool,
    seen: HashSet<String>,
    subtour_rows: usize,
    rlt_rows: usize,
}

impl Separator for KadaptSeparator<'_> {
    fn separate(&mut self, _model: &MilpModel, incumbent: &MilpSolution) -> Vec<CutRow> {
        let mut base_rows: Vec<LinearRow> = Vec::new();
        for block in self.blocks {
            let y: Vec<f64> = block.y.iter().map(|v| incumbent.value(*v).round()).collect();
            let aux: Vec<f64> = block.aux.iter().map(|v| incumbent.value(*v).round()).collect();
            for row in self.problem.recourse.separate(&y, &aux) {
                if self.seen.insert(row.name.clone()) {
                    base_rows.push(row);
                }
            }
        }
        let n_main = self.problem.recourse.n_main;
        let mut cuts = Vec::new();
        for row in &base_rows {
            for (k, block) in self.blocks.iter().enumerate() {
                let mut terms: Vec<(VarId, f64)> = Vec::new();
                for (j, c) in row.coeffs.iter().enumerate() {
                    if *c != 0.0 {
                        let var = if j < n_main { block.y[j] } else { block.aux[j - n_main] };
                        terms.push((var, *c));
                    }
                }
                cuts.push(CutRow {
                    name: format!("k{k}_{}", row.name),
                    terms,
                    sense: match row.sense {
                        RowSense::Le => Cmp::Le,
                        RowSense::Eq => Cmp::Eq,
                        RowSense::Ge => Cmp::Ge,
                    },
                    rhs: row.rhs,
                });
                self.subtour_rows += 1;
                if self.rlt {
                    let companion = rlt_row(row, k);
                    let mut terms: Vec<(VarId, f64)> = Vec::new();
                    for (j, c) in companion.coeffs.iter().enumerate() {
                        if *c != 0.0 {
                            let var = if j < n_main {
                                block.y_tilde[j]
                            } else {
                                block.aux_tilde[j - n_main]
                            };
                            terms.push((var, *c));
                        }
                    }
                    if companion.alpha_coeff != 0.0 {
                        terms.push((block.alpha, companion.alpha_coeff));
                    }
                    cuts.push(CutRow {
                        name: format!("{}_{}", companion.name, self.rlt_rows),
                        terms,
                        sense: match companion.sense {
                            RowSense::Le => Cmp::Le,
                            RowSense::Eq => Cmp::Eq,
                            RowSense::Ge => Cmp::Ge,
                        },
                        rhs: 0.0,
                    });
                    self.rlt_rows += 1;
                }
            }
        }
        cuts
    }
}

/// Separation statistics of a solve.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct KadaptCutStats {
    pub subtour_rows: usize,
    pub rlt_rows: usize,
    pub rounds: usize,
}

/// A solved K-adaptability problem with every dual block, for audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KadaptSolution {
    pub status: SolveStatus,
    pub k: usize,
    pub w: Vec<u8>,
    pub policies: Vec<RecoursePoint>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub beta_k: Vec<Vec<f64>>,
    pub gamma_k: Vec<Vec<f64>>,
    pub y_tilde: Vec<Vec<f64>>,
    pub w_tilde: Vec<Vec<f64>>,
    /// Objective in min convention.
    pub objective_min: f64,
    /// Objective in the problem's stated sense.
    pub objective: f64,
    /// Proven bound in min convention.
    pub bound_min: f64,
    pub big_m: f64,
    pub cuts: KadaptCutStats,
    pub wall_time_s: f64,
}

impl KadaptSolution {
    /// Largest `|ỹ^k − α_k y^k|` over all policies; tight linearizations
    /// stay within the feasibility tolerance at integer solutions.
    pub fn linearization_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, policy) in self.policies.iter().enumerate() {
            for (j, y) in policy.y.iter().enumerate() {
                worst = worst.max((self.y_tilde[k][j] - self.alpha[k] * *y as f64).abs());
            }
            for (i, w) in self.w.iter().enumerate() {
                worst = worst.max((self.w_tilde[k][i] - self.alpha[k] * *w as f64).abs());
            }
        }
        worst
    }

    /// Verify every policy against the recourse rows and separation contract.
    pub fn check_policies(&self, problem: &DdidProblem) -> Result<(), DdidError> {
        for policy in &self.policies {
            let point = policy.concat_f64();
            if !problem.recourse.point_satisfies_rows(&point, FEAS_TOL) {
                return Err(DdidError::Infeasible("policy violates an explicit recourse row".into()));
            }
            if !problem.recourse.separate(&policy.y_f64(), &policy.aux_f64()).is_empty() {
                return Err(DdidError::Infeasible("policy violates the lazy recourse family".into()));
            }
        }
        Ok(())
    }
}

impl RecoursePoint {
    pub fn aux_f64(&self) -> Vec<f64> {
        self.aux.iter().map(|v| *v as f64).collect()
    }
}

/// Solve the K-adaptability problem with lazy recourse separation.
pub fn solve_kadapt(
    problem: &DdidProblem,
    options: &KadaptOptions,
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<KadaptSolution, DdidError> {
    let start = Instant::now();
    let mut built = build_strengthened(problem, options, engine, params)?;
    let mut separator = KadaptSeparator {
        problem,
        blocks: &built.blocks,
        rlt: options.strengthen.rlt,
        seen: HashSet::new(),
        subtour_rows: 0,
        rlt_rows: 0,
    };
    let outcome = solve_with_separation(
        engine,
        &mut built.model,
        &mut separator,
        params,
        DEFAULT_MAX_SEPARATION_ROUNDS,
    )?;
    let stats = KadaptCutStats {
        subtour_rows: separator.subtour_rows,
        rlt_rows: separator.rlt_rows,
        rounds: outcome.rounds,
    };
    let solution = outcome.solution;
    match solution.status {
        SolveStatus::Optimal | SolveStatus::FeasibleAtLimit => {}
        SolveStatus::Infeasible => {
            return Err(DdidError::Infeasible(
                "K-adaptability model infeasible: W or Y is empty".into(),
            ));
        }
        other => {
            return Err(DdidError::InvalidData(format!("K-adapt solve ended with {other:?}")));
        }
    }

    let extract =
        |ids: &[VarId]| -> Vec<f64> { ids.iter().map(|v| solution.value(*v)).collect() };
    let out = KadaptSolution {
        status: solution.status,
        k: options.k,
        w: built.w.iter().map(|v| solution.value(*v).round() as u8).collect(),
        policies: built
            .blocks
            .iter()
            .map(|b| RecoursePoint {
                y: b.y.iter().map(|v| solution.value(*v).round() as u8).collect(),
                aux: b.aux.iter().map(|v| solution.value(*v).round() as u8).collect(),
            })
            .collect(),
        alpha: built.blocks.iter().map(|b| solution.value(b.alpha)).collect(),
        beta: extract(&built.beta),
        beta_k: built.blocks.iter().map(|b| extract(&b.beta_k)).collect(),
        gamma_k: built.blocks.iter().map(|b| extract(&b.gamma)).collect(),
        y_tilde: built.blocks.iter().map(|b| extract(&b.y_tilde)).collect(),
        w_tilde: built.blocks.iter().map(|b| extract(&b.w_tilde)).collect(),
        objective_min: solution.objective,
        objective: problem.reported(solution.objective),
        bound_min: solution.best_bound,
        big_m: built.big_m,
        cuts: stats,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    out.check_policies(problem)?;
    Ok(out)
}

/// LP-relaxation value of the (explicit-row) model: the root bound used for
/// the strengthened-vs-plain dominance comparison.
pub fn root_relaxation_bound(
    problem: &DdidProblem,
    options: &KadaptOptions,
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<f64, DdidError> {
    let built = build_strengthened(problem, options, engine, params)?;
    let relaxed = built.model.lp_relaxation();
    let sol = engine.solve(&relaxed, params)?;
    if sol.status != SolveStatus::Optimal {
        return Err(DdidError::InvalidData(format!(
            "root relaxation ended with {:?}",
            sol.status
        )));
    }
    Ok(sol.objective)
}

/// Exact worst-case value of a fixed K-policy solution (the adversary's LP of
/// the policy-evaluation observation; identical to the CCG master over
/// `pool = policies`). Min convention.
pub fn evaluate_policies(
    problem: &DdidProblem,
    w: &[u8],
    policies: &[RecoursePoint],
    engine: &dyn Engine,
    params: &SolveParams,
) -> Result<f64, DdidError> {
    let model = build_ccg_master(problem, w, policies)?;
    let sol = engine.solve(&model, params)?;
    if sol.status != SolveStatus::Optimal {
        return Err(DdidError::InvalidData(format!(
            "policy-evaluation LP ended with {:?}",
            sol.status
        )));
    }
    Ok(sol.objective)
}
