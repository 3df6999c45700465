//! Cross-solver invariants on enumerable instances: stored Benders cuts
//! under-estimate Φ everywhere, CCG certificates replay, K-adaptability never
//! beats the exact optimum, and the shortest-path pipeline agrees with a path
//! enumeration oracle.

use ddid::adapters::orienteering::{make_xi1, orienteering_to_ddid, random_orienteering};
use ddid::adapters::shortest_path::{generate_shortest_path_instance, sp_to_ddid};
use ddid::ccg::{build_ccg_master, evaluate_phi, solve_recourse_subproblem, CcgOptions};
use ddid::exact::{solve_exact, ExactOptions};
use ddid::kadapt::{solve_kadapt, KadaptOptions};
use ddid::milp::{Engine, HighsEngine, SolveParams};
use ddid::oracle::{brute_force_phi_with_pool, enumerate_recourse};
use ddid::problem::DdidProblem;

const TOL: f64 = 1e-6;

fn engine() -> HighsEngine {
    HighsEngine::new()
}

fn params() -> SolveParams {
    SolveParams { mip_gap: 1e-9, ..Default::default() }
}

fn small_problem(seed: u64, delta: f64) -> DdidProblem {
    let inst = random_orienteering(seed, 7, 0.3);
    let xi = make_xi1(inst.n_profit(), 0.3).unwrap();
    orienteering_to_ddid(&inst, inst.t_list[0], delta, xi).unwrap()
}

#[test]
fn stored_cuts_underestimate_phi_everywhere() {
    let engine = engine();
    let problem = small_problem(21, 1.0 / 3.0);
    let result = solve_exact(&problem, &engine, &ExactOptions { solve: params(), ..Default::default() })
        .unwrap();
    assert!(result.converged);

    let members = problem.enumerate_w(64).unwrap();
    let policies = enumerate_recourse(&problem, 1 << 20).unwrap();
    for w in &members {
        let (phi, _) =
            brute_force_phi_with_pool(&problem, w, &policies, &engine, &params()).unwrap();
        let wf: Vec<f64> = w.iter().map(|v| *v as f64).collect();
        for cut in &result.state.cuts {
            assert!(
                cut.rhs_at(&wf) <= phi + TOL,
                "stored {:?} cut over-estimates Φ({w:?}) = {phi}: rhs {}",
                cut.kind,
                cut.rhs_at(&wf)
            );
        }
        // Tightness at each generator.
        if let Some(cut) = result
            .state
            .cuts
            .iter()
            .find(|c| c.generator.as_ref().map(|(g, _)| g == w).unwrap_or(false))
        {
            assert!((cut.rhs_at(&wf) - phi).abs() <= TOL, "cut loose at its generator {w:?}");
        }
    }
}

#[test]
fn ccg_certificate_replays_through_the_master() {
    let engine = engine();
    let problem = small_problem(22, 0.5);
    let w = vec![1u8, 0, 0, 1, 0, 0];
    assert_eq!(problem.n_w(), 6);
    let (phi, state) = evaluate_phi(&problem, &w, &engine, &CcgOptions::default()).unwrap();
    assert!(state.converged);

    let certificate = state.certificate.expect("converged evaluation carries a certificate");
    certificate.check(&problem, TOL).unwrap();
    assert!((certificate.value_min - phi).abs() <= TOL);

    // Re-solving the master over the final pool reproduces Φ(w).
    let master = build_ccg_master(&problem, &w, &state.pool).unwrap();
    let sol = engine.solve(&master, &params()).unwrap();
    assert!((sol.objective - phi).abs() <= TOL);
}

#[test]
fn subproblem_policies_are_genuine_paths() {
    let engine = engine();
    let problem = small_problem(23, 0.5);
    let xi_bar = problem.xi_set.feasible_point(&engine, &params()).unwrap();
    for w in [vec![0u8; 6], vec![1u8; 6], vec![1, 0, 1, 0, 1, 0]] {
        let (_, point) =
            solve_recourse_subproblem(&problem, &w, &xi_bar, &engine, &params()).unwrap();
        let concat = point.concat_f64();
        assert!(problem.recourse.point_satisfies_rows(&concat, TOL));
        assert!(problem
            .recourse
            .separate(&point.y_f64(), &point.aux_f64())
            .is_empty());
    }
}

#[test]
fn kadapt_never_beats_exact_and_improves_with_k() {
    let engine = engine();
    let problem = small_problem(24, 0.25);
    let exact = solve_exact(&problem, &engine, &ExactOptions { solve: params(), ..Default::default() })
        .unwrap();
    assert!(exact.converged);

    let mut last_min = f64::INFINITY;
    for k in [1usize, 2, 3] {
        let sol =
            solve_kadapt(&problem, &KadaptOptions::new(k), &engine, &params()).unwrap();
        // Inner approximation: min-convention objective ≥ exact optimum.
        assert!(
            sol.objective_min >= exact.value_min - TOL,
            "K={k} beat the exact optimum: {} < {}",
            sol.objective_min,
            exact.value_min
        );
        assert!(sol.objective_min <= last_min + TOL, "K={k} regressed");
        assert!(sol.linearization_residual() <= TOL);
        last_min = sol.objective_min;
    }
}

/// All simple s→t paths of a small shortest-path instance with their
/// worst-case inflated costs.
fn enumerate_path_costs(
    inst: &ddid::adapters::shortest_path::ShortestPathInstance,
    budget: f64,
) -> Vec<f64> {
    let n = inst.n_nodes();
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (ai, (i, j)) in inst.arcs.iter().enumerate() {
        adjacency[*i].push((*j, inst.nominal[ai]));
    }
    let mut costs = Vec::new();
    let mut stack_costs: Vec<f64> = Vec::new();
    let mut visited = vec![false; n];
    fn dfs(
        node: usize,
        terminal: usize,
        adjacency: &[Vec<(usize, f64)>],
        visited: &mut Vec<bool>,
        stack_costs: &mut Vec<f64>,
        budget: f64,
        out: &mut Vec<f64>,
    ) {
        if node == terminal {
            // Worst case puts full inflation on the most expensive arcs
            // until the budget runs out.
            let mut arcs = stack_costs.clone();
            arcs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let nominal: f64 = arcs.iter().sum();
            let mut remaining = budget;
            let mut inflation = 0.0;
            for c in arcs {
                let take = remaining.min(1.0);
                if take <= 0.0 {
                    break;
                }
                inflation += take * c / 2.0;
                remaining -= take;
            }
            out.push(nominal + inflation);
            return;
        }
        for (next, cost) in &adjacency[node] {
            if !visited[*next] {
                visited[*next] = true;
                stack_costs.push(*cost);
                dfs(*next, terminal, adjacency, visited, stack_costs, budget, out);
                stack_costs.pop();
                visited[*next] = false;
            }
        }
    }
    visited[inst.start] = true;
    dfs(inst.start, inst.terminal, &adjacency, &mut visited, &mut stack_costs, budget, &mut costs);
    costs
}

#[test]
fn sp_k1_matches_the_path_enumeration_oracle() {
    let engine = engine();
    let inst = generate_shortest_path_instance(6, 5, 3.0, false).unwrap();
    let problem = sp_to_ddid(&inst).unwrap();
    let fix_w = Some(vec![1u8; problem.n_w()]);

    let oracle = enumerate_path_costs(&inst, 3.0)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    assert!(oracle.is_finite(), "instance must be connected");

    let options = KadaptOptions { fix_w, ..KadaptOptions::new(1) };
    let sol = solve_kadapt(&problem, &options, &engine, &params()).unwrap();
    assert!(
        (sol.objective_min - oracle).abs() <= 1e-5,
        "K=1 {} vs enumerated best worst-case path {oracle}",
        sol.objective_min
    );
}

#[test]
fn sp_extreme_budgets_match_the_trivial_values() {
    let engine = engine();
    let inst = generate_shortest_path_instance(6, 5, 3.0, false).unwrap();

    // Budget 0: no inflation, the nominal shortest path.
    let mut no_uncertainty = inst.clone();
    no_uncertainty.budget = 0.0;
    let problem0 = sp_to_ddid(&no_uncertainty).unwrap();
    let nominal_best = enumerate_path_costs(&inst, 0.0)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let sol0 = solve_kadapt(
        &problem0,
        &KadaptOptions { fix_w: Some(vec![1u8; problem0.n_w()]), ..KadaptOptions::new(1) },
        &engine,
        &params(),
    )
    .unwrap();
    assert!((sol0.objective_min - nominal_best).abs() <= 1e-5);

    // Budget ≥ |A|: every arc inflates fully, cost = 1.5 × nominal.
    let mut slack = inst.clone();
    slack.budget = inst.arcs.len() as f64;
    let problem_full = sp_to_ddid(&slack).unwrap();
    let inflated_best = enumerate_path_costs(&inst, f64::INFINITY)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let sol_full = solve_kadapt(
        &problem_full,
        &KadaptOptions { fix_w: Some(vec![1u8; problem_full.n_w()]), ..KadaptOptions::new(1) },
        &engine,
        &params(),
    )
    .unwrap();
    assert!((sol_full.objective_min - inflated_best).abs() <= 1e-5);
}
