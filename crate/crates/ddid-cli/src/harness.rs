//! Experiment sweeps: Cartesian runs over instances × methods × K × δ × T
//! in a bounded worker pool, collected into versioned CSV and a Markdown
//! table mirroring the usual Opt (#) / Time (s) / Gap layout.

use std::sync::mpsc;
use std::sync::{Arc, Mutex};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ddid::adapters::orienteering::{example1, make_xi1, orienteering_to_ddid, random_orienteering, OrienteeringInstance};
use ddid::adapters::shortest_path::{generate_shortest_path_instance, sp_to_ddid};
use ddid::exact::{solve_exact, ExactOptions};
use ddid::kadapt::{solve_kadapt, BigM, KadaptOptions, StrengthenFlags};
use ddid::milp::{HighsEngine, SolveParams, SolveStatus};
use ddid::problem::DdidProblem;
use ddid::OBJ_TOL;

/// CSV schema version of [`RunRecord`].
pub const RECORD_SCHEMA: u32 = 1;

/// One experiment row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub instance: String,
    pub method: String,
    pub k: Option<usize>,
    pub delta: Option<f64>,
    pub t_max: Option<f64>,
    pub status: String,
    /// Objective in the problem's stated sense.
    pub objective: f64,
    /// Proven bound in the problem's stated sense.
    pub bound: f64,
    /// Normalized optimality gap, computed in min convention.
    pub gap: f64,
    pub iterations: usize,
    pub cuts_added: usize,
    pub wall_time_s: f64,
    pub seed: u64,
}

/// `(conservative − progressive) / |progressive|` with the zero guards:
/// both near zero → 0; progressive near zero with an open gap → +∞.
pub fn compute_gap(conservative: f64, progressive: f64) -> f64 {
    if !progressive.is_finite() || !conservative.is_finite() {
        return f64::INFINITY;
    }
    if (conservative - progressive).abs() <= OBJ_TOL {
        0.0
    } else if progressive.abs() <= OBJ_TOL {
        f64::INFINITY
    } else {
        (conservative - progressive) / progressive.abs()
    }
}

/// A problem source of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    /// The worked four-node example with a sensor budget.
    Example1 { b: usize },
    /// Orienteering text/JSON file; δ and T come from the sweep axes.
    OrienteeringFile { path: String },
    /// Seeded random orienteering network.
    RandomOrienteering { seed: u64, nodes: usize, u: f64 },
    /// Seeded shortest-path benchmark (w fixed to e; δ and T do not apply).
    ShortestPath { n: usize, seed: u64, budget: f64 },
    /// A shortest-path instance JSON file, e.g. from `gen-sp`.
    ShortestPathFile { path: String },
    /// A ready DdidProblem JSON file (δ and T do not apply).
    ProblemFile { path: String },
}

impl InstanceSpec {
    /// Parse the CLI/config syntax, e.g. `example1`, `example1:b=2`,
    /// `sp:n=20:seed=1:b=3`, `rand-op:seed=4:n=7:u=0.3`, or a file path.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.split(':');
        let head = parts.next().unwrap_or_default();
        let mut kv = std::collections::BTreeMap::new();
        for part in parts {
            if let Some((k, v)) = part.split_once('=') {
                kv.insert(k.trim().to_string(), v.trim().to_string());
            } else {
                bail!("bad instance component {part:?} in {text:?}");
            }
        }
        let get_u64 = |kv: &std::collections::BTreeMap<String, String>, k: &str, d: u64| {
            kv.get(k).map(|v| v.parse::<u64>()).transpose().map(|o| o.unwrap_or(d))
        };
        match head {
            "example1" => Ok(Self::Example1 {
                b: get_u64(&kv, "b", 1).context("bad b")? as usize,
            }),
            "sp" => Ok(Self::ShortestPath {
                n: get_u64(&kv, "n", 20).context("bad n")? as usize,
                seed: get_u64(&kv, "seed", 0).context("bad seed")?,
                budget: kv.get("b").map(|v| v.parse()).transpose().context("bad b")?.unwrap_or(3.0),
            }),
            "rand-op" => Ok(Self::RandomOrienteering {
                seed: get_u64(&kv, "seed", 0).context("bad seed")?,
                nodes: get_u64(&kv, "n", 7).context("bad n")? as usize,
                u: kv.get("u").map(|v| v.parse()).transpose().context("bad u")?.unwrap_or(0.3),
            }),
            path if path.ends_with(".json") => {
                // Sniff: a DdidProblem file carries `schema_version`, a
                // shortest-path instance carries `arcs`.
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {path}"))?;
                let value: serde_json::Value = serde_json::from_str(&text)?;
                if value.get("schema_version").is_some() {
                    Ok(Self::ProblemFile { path: path.to_string() })
                } else if value.get("arcs").is_some() {
                    Ok(Self::ShortestPathFile { path: path.to_string() })
                } else {
                    Ok(Self::OrienteeringFile { path: path.to_string() })
                }
            }
            path if path.ends_with(".txt") => {
                Ok(Self::OrienteeringFile { path: path.to_string() })
            }
            other => bail!("unknown instance source {other:?}"),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Example1 { b } => format!("example1-B{b}"),
            Self::OrienteeringFile { path } => path.clone(),
            Self::RandomOrienteering { seed, nodes, u } => format!("rand-op-s{seed}-n{nodes}-u{u}"),
            Self::ShortestPath { n, seed, budget } => format!("sp-n{n}-s{seed}-B{budget}"),
            Self::ShortestPathFile { path } => path.clone(),
            Self::ProblemFile { path } => path.clone(),
        }
    }

    /// Whether the δ and T sweep axes apply to this source.
    fn sweepable(&self) -> bool {
        matches!(
            self,
            Self::OrienteeringFile { .. } | Self::RandomOrienteering { .. }
        )
    }

    /// Materialize the DDID problem for one sweep point.
    pub fn build(&self, delta: Option<f64>, t_max: Option<f64>) -> Result<BuiltInstance> {
        match self {
            Self::Example1 { b } => Ok(BuiltInstance {
                problem: example1(*b).map_err(anyhow::Error::from)?,
                fix_w: None,
            }),
            Self::ProblemFile { path } => {
                let text = std::fs::read_to_string(path)?;
                Ok(BuiltInstance { problem: DdidProblem::from_json(&text)?, fix_w: None })
            }
            Self::ShortestPath { n, seed, budget } => {
                let inst = generate_shortest_path_instance(*n, *seed, *budget, false)?;
                let problem = sp_to_ddid(&inst)?;
                let fix_w = Some(vec![1u8; problem.n_w()]);
                Ok(BuiltInstance { problem, fix_w })
            }
            Self::ShortestPathFile { path } => {
                let text = std::fs::read_to_string(path)?;
                let inst: ddid::adapters::shortest_path::ShortestPathInstance =
                    serde_json::from_str(&text)?;
                let problem = sp_to_ddid(&inst)?;
                let fix_w = Some(vec![1u8; problem.n_w()]);
                Ok(BuiltInstance { problem, fix_w })
            }
            Self::OrienteeringFile { path } => {
                let text = std::fs::read_to_string(path)?;
                let inst = if path.ends_with(".json") {
                    serde_json::from_str::<OrienteeringInstance>(&text)?
                } else {
                    OrienteeringInstance::read_text(path.clone(), &text)?
                };
                build_orienteering(&inst, delta, t_max)
            }
            Self::RandomOrienteering { seed, nodes, u } => {
                let inst = random_orienteering(*seed, *nodes, *u);
                build_orienteering(&inst, delta, t_max)
            }
        }
    }
}

fn build_orienteering(
    inst: &OrienteeringInstance,
    delta: Option<f64>,
    t_max: Option<f64>,
) -> Result<BuiltInstance> {
    let delta = delta.unwrap_or(0.5);
    let t_max = t_max
        .or_else(|| inst.t_list.first().copied())
        .context("orienteering instance needs a T value")?;
    let xi = make_xi1(inst.n_profit(), inst.u_cap)?;
    let problem = orienteering_to_ddid(inst, t_max, delta, xi)?;
    Ok(BuiltInstance { problem, fix_w: None })
}

/// A materialized sweep point.
pub struct BuiltInstance {
    pub problem: DdidProblem,
    /// Observation fixing for benchmarks without information discovery.
    pub fix_w: Option<Vec<u8>>,
}

/// A solver configuration of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    Exact { information_cuts: bool, optimistic_bound: bool },
    Kadapt { k: usize, strengthen: StrengthenFlags },
}

impl MethodSpec {
    /// Parse `exact`, `kadapt:k=2`, `kadapt-plain:k=3`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.split(':');
        let head = parts.next().unwrap_or_default();
        let mut k = 2usize;
        for part in parts {
            if let Some(("k", v)) = part.split_once('=') {
                k = v.parse().context("bad k")?;
            } else {
                bail!("bad method component {part:?}");
            }
        }
        match head {
            "exact" => Ok(Self::Exact { information_cuts: true, optimistic_bound: false }),
            "kadapt" => Ok(Self::Kadapt { k, strengthen: StrengthenFlags::all() }),
            "kadapt-plain" => Ok(Self::Kadapt { k, strengthen: StrengthenFlags::none() }),
            other => bail!("unknown method {other:?}"),
        }
    }

    fn label(&self) -> String {
        match self {
            Self::Exact { .. } => "exact".to_string(),
            Self::Kadapt { strengthen, .. } if *strengthen == StrengthenFlags::none() => {
                "kadapt-plain".to_string()
            }
            Self::Kadapt { .. } => "kadapt".to_string(),
        }
    }

    fn k(&self) -> Option<usize> {
        match self {
            Self::Exact { .. } => None,
            Self::Kadapt { k, .. } => Some(*k),
        }
    }
}

/// Sweep configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub instances: Vec<InstanceSpec>,
    pub methods: Vec<MethodSpec>,
    /// δ axis; `None` entries mean "instance default".
    pub deltas: Vec<Option<f64>>,
    /// T axis; `None` entries mean "instance default".
    pub t_values: Vec<Option<f64>>,
    pub time_limit_s: f64,
    pub workers: usize,
    pub seed: u64,
    /// Also emit the δ-vs-objective series per method.
    pub delta_sweep: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instances: Vec::new(),
            methods: Vec::new(),
            deltas: vec![None],
            t_values: vec![None],
            time_limit_s: 120.0,
            workers: 1,
            seed: 0,
            delta_sweep: false,
        }
    }
}

/// Reports produced next to the raw records.
#[derive(Debug, Clone)]
pub struct Report {
    pub csv: String,
    pub markdown: String,
    /// `method,delta,objective` series when δ-sweep mode is on.
    pub delta_series_csv: Option<String>,
}

struct Job {
    index: usize,
    instance: InstanceSpec,
    method: MethodSpec,
    delta: Option<f64>,
    t_max: Option<f64>,
}

/// Run the Cartesian sweep. Every failure is captured in its record (status
/// `error`); the sweep itself never aborts. Records come back in job order,
/// so identical configs produce identical reports modulo wall time.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(Vec<RunRecord>, Report)> {
    let mut jobs = Vec::new();
    for instance in &config.instances {
        let deltas: Vec<Option<f64>> =
            if instance.sweepable() { config.deltas.clone() } else { vec![None] };
        let t_values: Vec<Option<f64>> =
            if instance.sweepable() { config.t_values.clone() } else { vec![None] };
        for delta in &deltas {
            for t_max in &t_values {
                for method in &config.methods {
                    jobs.push(Job {
                        index: jobs.len(),
                        instance: instance.clone(),
                        method: method.clone(),
                        delta: *delta,
                        t_max: *t_max,
                    });
                }
            }
        }
    }

    let results: Vec<Option<RunRecord>> = {
        let slots = Mutex::new(vec![None; jobs.len()]);
        let queue = Arc::new(Mutex::new(jobs.into_iter().collect::<Vec<_>>()));
        let workers = config.workers.max(1);
        std::thread::scope(|scope| {
            let (tx, rx) = mpsc::channel::<()>();
            for _ in 0..workers {
                let queue = Arc::clone(&queue);
                let slots = &slots;
                let tx = tx.clone();
                scope.spawn(move || {
                    loop {
                        let job = { queue.lock().unwrap().pop() };
                        let Some(job) = job else { break };
                        let record = run_job(&job, config);
                        slots.lock().unwrap()[job.index] = Some(record);
                    }
                    drop(tx);
                });
            }
            drop(tx);
            // Wait for all workers to hang up.
            while rx.recv().is_ok() {}
        });
        slots.into_inner().unwrap()
    };
    let records: Vec<RunRecord> = results.into_iter().map(|r| r.expect("job completed")).collect();

    let report = Report {
        csv: to_csv(&records),
        markdown: to_markdown(&records),
        delta_series_csv: config.delta_sweep.then(|| delta_series(&records)),
    };
    Ok((records, report))
}

fn run_job(job: &Job, config: &ExperimentConfig) -> RunRecord {
    let label = job.instance.label();
    let mut record = RunRecord {
        schema: RECORD_SCHEMA,
        instance: label,
        method: job.method.label(),
        k: job.method.k(),
        delta: job.delta,
        t_max: job.t_max,
        status: "error".to_string(),
        objective: f64::NAN,
        bound: f64::NAN,
        gap: f64::INFINITY,
        iterations: 0,
        cuts_added: 0,
        wall_time_s: 0.0,
        seed: config.seed,
    };
    let built = match job.instance.build(job.delta, job.t_max) {
        Ok(b) => b,
        Err(e) => {
            record.status = format!("error: {e}");
            return record;
        }
    };
    let engine = HighsEngine::new();
    let started = std::time::Instant::now();
    let solve = SolveParams {
        time_limit_s: config.time_limit_s,
        mip_gap: 1e-9,
        threads: 1,
        seed: config.seed as u32,
    };
    match &job.method {
        MethodSpec::Exact { information_cuts, optimistic_bound } => {
            let options = ExactOptions {
                time_limit_s: config.time_limit_s,
                use_information_cuts: *information_cuts,
                use_optimistic_bound: *optimistic_bound,
                solve,
                ..Default::default()
            };
            match solve_exact(&built.problem, &engine, &options) {
                Ok(result) => {
                    record.status = if result.converged { "optimal" } else { "feasible-at-limit" }
                        .to_string();
                    record.objective = result.objective;
                    record.bound = built.problem.reported(result.state.lb);
                    record.gap = compute_gap(result.state.ub, result.state.lb);
                    record.iterations = result.state.iterations;
                    record.cuts_added = result.state.cuts.len();
                }
                Err(e) => record.status = format!("error: {e}"),
            }
        }
        MethodSpec::Kadapt { k, strengthen } => {
            let options = KadaptOptions {
                k: *k,
                strengthen: *strengthen,
                big_m: BigM::Auto,
                fix_w: built.fix_w.clone(),
            };
            match solve_kadapt(&built.problem, &options, &engine, &solve) {
                Ok(result) => {
                    record.status = match result.status {
                        SolveStatus::Optimal => "optimal".to_string(),
                        SolveStatus::FeasibleAtLimit => "feasible-at-limit".to_string(),
                        other => format!("{other:?}").to_lowercase(),
                    };
                    record.objective = result.objective;
                    record.bound = built.problem.reported(result.bound_min);
                    record.gap = compute_gap(result.objective_min, result.bound_min);
                    record.iterations = result.cuts.rounds;
                    record.cuts_added = result.cuts.subtour_rows + result.cuts.rlt_rows;
                }
                Err(e) => record.status = format!("error: {e}"),
            }
        }
    }
    record.wall_time_s = started.elapsed().as_secs_f64();
    record
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.9}")
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Fixed, versioned CSV schema.
pub fn to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(
        "schema,instance,method,k,delta,t,status,objective,bound,gap,iterations,cuts,wall_time_s,seed\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{:.3},{}\n",
            r.schema,
            csv_escape(&r.instance),
            csv_escape(&r.method),
            fmt_opt(&r.k),
            fmt_opt(&r.delta),
            fmt_opt(&r.t_max),
            csv_escape(&r.status),
            fmt_num(r.objective),
            fmt_num(r.bound),
            fmt_num(r.gap),
            r.iterations,
            r.cuts_added,
            r.wall_time_s,
            r.seed,
        ));
    }
    out
}

/// Markdown summary grouped per (instance, method, K): solved count, average
/// time over solved runs, average gap over unsolved runs.
pub fn to_markdown(records: &[RunRecord]) -> String {
    use std::collections::BTreeMap;
    #[derive(Default)]
    struct Group {
        total: usize,
        optimal: usize,
        time_sum: f64,
        gap_sum: f64,
        gap_count: usize,
    }
    let mut groups: BTreeMap<(String, String, String), Group> = BTreeMap::new();
    for r in records {
        let key = (r.instance.clone(), r.method.clone(), fmt_opt(&r.k));
        let g = groups.entry(key).or_default();
        g.total += 1;
        if r.status == "optimal" {
            g.optimal += 1;
            g.time_sum += r.wall_time_s;
        } else if r.gap.is_finite() {
            g.gap_sum += r.gap;
            g.gap_count += 1;
        }
    }
    let mut out = String::from("| Instance | Method | K | Opt (#) | Time (s) | Gap |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for ((instance, method, k), g) in &groups {
        let time = if g.optimal > 0 {
            format!("{:.1}", g.time_sum / g.optimal as f64)
        } else {
            "-".to_string()
        };
        let gap = if g.gap_count > 0 {
            format!("{:.1}%", 100.0 * g.gap_sum / g.gap_count as f64)
        } else {
            "-".to_string()
        };
        out.push_str(&format!(
            "| {instance} | {method} | {} | {}/{} | {time} | {gap} |\n",
            if k.is_empty() { "-" } else { k },
            g.optimal,
            g.total,
        ));
    }
    out
}

/// δ-vs-objective series per method (the Fig-4 shape), averaged over
/// instances and T.
pub fn delta_series(records: &[RunRecord]) -> String {
    use std::collections::BTreeMap;
    let mut series: BTreeMap<(String, String, String), (f64, usize)> = BTreeMap::new();
    for r in records {
        if let Some(delta) = r.delta {
            if r.objective.is_finite() {
                let key = (r.method.clone(), fmt_opt(&r.k), format!("{delta}"));
                let entry = series.entry(key).or_insert((0.0, 0));
                entry.0 += r.objective;
                entry.1 += 1;
            }
        }
    }
    let mut out = String::from("method,k,delta,objective\n");
    for ((method, k, delta), (sum, count)) in &series {
        out.push_str(&format!("{method},{k},{delta},{}\n", fmt_num(sum / *count as f64)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_guards() {
        assert_eq!(compute_gap(0.5, 0.5), 0.0);
        assert!((compute_gap(1.05, 1.0) - 0.05).abs() < 1e-12);
        assert!(compute_gap(0.3, 0.0).is_infinite());
        assert_eq!(compute_gap(0.0, 0.0), 0.0);
        assert!(compute_gap(f64::NAN, 1.0).is_infinite());
    }

    #[test]
    fn instance_spec_parsing() {
        assert_eq!(InstanceSpec::parse("example1").unwrap(), InstanceSpec::Example1 { b: 1 });
        assert_eq!(
            InstanceSpec::parse("example1:b=3").unwrap(),
            InstanceSpec::Example1 { b: 3 }
        );
        assert_eq!(
            InstanceSpec::parse("sp:n=10:seed=4:b=3").unwrap(),
            InstanceSpec::ShortestPath { n: 10, seed: 4, budget: 3.0 }
        );
        assert_eq!(
            InstanceSpec::parse("rand-op:seed=2:n=6:u=0.3").unwrap(),
            InstanceSpec::RandomOrienteering { seed: 2, nodes: 6, u: 0.3 }
        );
        assert!(InstanceSpec::parse("wat").is_err());
    }

    #[test]
    fn method_spec_parsing() {
        assert!(matches!(MethodSpec::parse("exact").unwrap(), MethodSpec::Exact { .. }));
        assert!(matches!(
            MethodSpec::parse("kadapt:k=3").unwrap(),
            MethodSpec::Kadapt { k: 3, .. }
        ));
        let plain = MethodSpec::parse("kadapt-plain:k=2").unwrap();
        assert_eq!(plain.label(), "kadapt-plain");
    }

    #[test]
    fn empty_sweep_produces_empty_report() {
        let config = ExperimentConfig::default();
        let (records, report) = run_experiment(&config).unwrap();
        assert!(records.is_empty());
        assert!(report.csv.starts_with("schema,"));
        assert_eq!(report.csv.lines().count(), 1);
    }
}
