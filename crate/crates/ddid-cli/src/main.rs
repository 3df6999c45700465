//! `ddid` — solvers and benchmarks for two-stage robust optimization with
//! decision-dependent information discovery.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ddid::ccg::{evaluate_phi, CcgOptions};
use ddid::exact::{solve_exact, ExactOptions};
use ddid::kadapt::{evaluate_policies, solve_kadapt, BigM, KadaptOptions, StrengthenFlags};
use ddid::milp::SolveParams;
use ddid::recourse::RecoursePoint;
use ddid_cli::config::{parse_config, parse_f64_list, parse_list, resolve_engine, ConfigMap};
use ddid_cli::harness::{run_experiment, ExperimentConfig, InstanceSpec, MethodSpec};

#[derive(Parser)]
#[command(name = "ddid", version, about = "Two-stage robust optimization with decision-dependent information discovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Key-value configuration file (engine path, flags).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Per-solve wall-clock limit in seconds.
    #[arg(long, global = true, default_value_t = 120.0)]
    time_limit: f64,

    /// Engine and generator random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Emit per-iteration JSON lines on stderr.
    #[arg(long, global = true)]
    trace: bool,

    /// Output format for results: text | json.
    #[arg(long, global = true, default_value = "text")]
    out: String,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance source: `example1[:b=N]`, `sp:n=..:seed=..:b=..`,
    /// `rand-op:seed=..:n=..:u=..`, or a .txt/.json file.
    #[arg(long)]
    instance: String,

    /// Maximum route duration (orienteering sources).
    #[arg(long = "T")]
    t: Option<f64>,

    /// Sensor-budget fraction δ (orienteering sources).
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact nested decomposition (Logic-Benders + CCG).
    SolveExact {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Cut families: comma list of `info`, `optimistic`; integer
        /// optimality cuts are the fallback when `info` is absent.
        #[arg(long, default_value = "info")]
        cuts: String,
    },
    /// Strengthened (or plain) K-adaptability.
    SolveKadapt {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long = "K", short = 'K', default_value_t = 2)]
        k: usize,
        /// `all`, `none`, or a comma list of `sym`, `bounds`, `optimistic`, `rlt`.
        #[arg(long, default_value = "all")]
        strengthen: String,
        /// Big-M: `auto` or a number.
        #[arg(long, default_value = "auto")]
        big_m: String,
        /// Fix the observation vector: `e` or a bit string like `101`.
        #[arg(long)]
        fix_w: Option<String>,
    },
    /// Evaluate Φ(w) exactly by column-and-constraint generation.
    EvalPhi {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Observation vector as a bit string, e.g. `101`.
        #[arg(long)]
        w: String,
    },
    /// Worst-case value of fixed policies under an observation vector.
    EvalPolicies {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        w: String,
        /// JSON file: array of {"y": [...], "aux": [...]}.
        #[arg(long)]
        policies: PathBuf,
    },
    /// Generate a shortest-path benchmark instance as JSON.
    GenSp {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 3.0)]
        budget: f64,
        /// Keep self-arcs in the base arc set before removal.
        #[arg(long)]
        include_self_arcs: bool,
        /// Output file (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run an experiment sweep from a config file.
    Bench {
        /// Sweep configuration (key-value format).
        #[arg(long)]
        sweep: PathBuf,
        /// Write the records CSV here.
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// Write the Markdown summary here.
        #[arg(long)]
        out_md: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let file_config: ConfigMap = match &cli.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => ConfigMap::new(),
    };
    let engine = resolve_engine(&file_config);
    let solve = SolveParams {
        time_limit_s: cli.time_limit,
        mip_gap: 1e-9,
        threads: 1,
        seed: cli.seed as u32,
    };

    match &cli.command {
        Command::SolveExact { instance, cuts } => {
            let built =
                InstanceSpec::parse(&instance.instance)?.build(instance.delta, instance.t)?;
            let cut_list = parse_list(cuts);
            let options = ExactOptions {
                time_limit_s: cli.time_limit,
                use_information_cuts: cut_list.iter().any(|c| c == "info"),
                use_optimistic_bound: cut_list.iter().any(|c| c == "optimistic"),
                solve: solve.clone(),
                ..Default::default()
            };
            let result = solve_exact(&built.problem, engine.as_ref(), &options)?;
            if cli.trace {
                for it in &result.state.history {
                    eprintln!("{}", serde_json::to_string(it)?);
                }
            }
            if cli.out == "json" {
                println!(
                    "{}",
                    serde_json::json!({
                        "instance": built.problem.name,
                        "objective": result.objective,
                        "w": result.w_star,
                        "converged": result.converged,
                        "iterations": result.state.iterations,
                        "cuts": result.state.cuts.len(),
                        "gap": result.gap(),
                    })
                );
            } else {
                println!("instance   {}", built.problem.name);
                println!("objective  {:.6}", result.objective);
                println!("w*         {:?}", result.w_star);
                println!("converged  {}", result.converged);
                println!("iterations {}", result.state.iterations);
            }
        }
        Command::SolveKadapt { instance, k, strengthen, big_m, fix_w } => {
            let built =
                InstanceSpec::parse(&instance.instance)?.build(instance.delta, instance.t)?;
            let options = KadaptOptions {
                k: *k,
                strengthen: parse_strengthen(strengthen)?,
                big_m: match big_m.as_str() {
                    "auto" => BigM::Auto,
                    num => BigM::Fixed(num.parse().context("bad --big-m")?),
                },
                fix_w: match fix_w {
                    None => built.fix_w.clone(),
                    Some(spec) => Some(parse_w(spec, built.problem.n_w())?),
                },
            };
            let result = solve_kadapt(&built.problem, &options, engine.as_ref(), &solve)?;
            if cli.out == "json" {
                println!("{}", serde_json::to_string_pretty(&result)?);
            } else {
                println!("instance   {}", built.problem.name);
                println!("objective  {:.6}", result.objective);
                println!("status     {:?}", result.status);
                println!("w          {:?}", result.w);
                for (i, p) in result.policies.iter().enumerate() {
                    println!("policy {i}   y = {:?}  alpha = {:.4}", p.y, result.alpha[i]);
                }
                println!(
                    "cuts       {} subtour, {} rlt, {} rounds",
                    result.cuts.subtour_rows, result.cuts.rlt_rows, result.cuts.rounds
                );
            }
        }
        Command::EvalPhi { instance, w } => {
            let built =
                InstanceSpec::parse(&instance.instance)?.build(instance.delta, instance.t)?;
            let w = parse_w(w, built.problem.n_w())?;
            let options = CcgOptions {
                time_limit_s: cli.time_limit,
                solve: solve.clone(),
                ..Default::default()
            };
            let (phi_min, state) = evaluate_phi(&built.problem, &w, engine.as_ref(), &options)?;
            if cli.trace {
                for it in &state.history {
                    eprintln!("{}", serde_json::to_string(it)?);
                }
            }
            let phi = built.problem.reported(phi_min);
            if cli.out == "json" {
                println!(
                    "{}",
                    serde_json::json!({
                        "instance": built.problem.name,
                        "w": w,
                        "phi": phi,
                        "iterations": state.iterations,
                        "pool": state.pool.len(),
                        "converged": state.converged,
                    })
                );
            } else {
                println!("Phi(w)     {phi:.6}");
                println!("iterations {}", state.iterations);
                println!("pool       {}", state.pool.len());
            }
        }
        Command::EvalPolicies { instance, w, policies } => {
            let built =
                InstanceSpec::parse(&instance.instance)?.build(instance.delta, instance.t)?;
            let w = parse_w(w, built.problem.n_w())?;
            let text = std::fs::read_to_string(policies)?;
            let policies: Vec<RecoursePoint> = serde_json::from_str(&text)
                .context("policies file must be a JSON array of {y, aux}")?;
            let value_min =
                evaluate_policies(&built.problem, &w, &policies, engine.as_ref(), &solve)?;
            let value = built.problem.reported(value_min);
            if cli.out == "json" {
                println!("{}", serde_json::json!({ "value": value }));
            } else {
                println!("worst-case value {value:.6}");
            }
        }
        Command::GenSp { n, budget, include_self_arcs, output } => {
            let inst = ddid::adapters::shortest_path::generate_shortest_path_instance(
                *n,
                cli.seed,
                *budget,
                *include_self_arcs,
            )?;
            let text = serde_json::to_string_pretty(&inst)?;
            match output {
                Some(path) => std::fs::write(path, text)?,
                None => println!("{text}"),
            }
        }
        Command::Bench { sweep, out_csv, out_md } => {
            let sweep_config = parse_config(&std::fs::read_to_string(sweep)?)?;
            let config = experiment_from_config(&sweep_config, cli.time_limit, cli.seed)?;
            let (records, report) = run_experiment(&config)?;
            let csv_path =
                out_csv.clone().or_else(|| sweep_config.get("out_csv").map(PathBuf::from));
            let md_path =
                out_md.clone().or_else(|| sweep_config.get("out_md").map(PathBuf::from));
            match csv_path {
                Some(path) => std::fs::write(&path, &report.csv)?,
                // `--out md` switches what lands on stdout; CSV is default.
                None if cli.out == "md" => print!("{}", report.markdown),
                None if cli.out == "json" => {
                    println!("{}", serde_json::to_string_pretty(&records)?)
                }
                None => print!("{}", report.csv),
            }
            if let Some(path) = md_path {
                std::fs::write(&path, &report.markdown)?;
            } else if cli.out != "md" {
                eprintln!("{}", report.markdown);
            }
            if let Some(series) = &report.delta_series_csv {
                eprintln!("{series}");
            }
            let errors = records.iter().filter(|r| r.status.starts_with("error")).count();
            eprintln!("{} runs, {} errors", records.len(), errors);
        }
    }
    Ok(())
}

fn parse_strengthen(text: &str) -> Result<StrengthenFlags> {
    match text {
        "all" => Ok(StrengthenFlags::all()),
        "none" => Ok(StrengthenFlags::none()),
        list => {
            let mut flags = StrengthenFlags::none();
            for item in parse_list(list) {
                match item.as_str() {
                    "sym" | "symmetry" => flags.symmetry = true,
                    "bounds" => flags.bounds = true,
                    "optimistic" => flags.optimistic = true,
                    "rlt" => flags.rlt = true,
                    other => bail!("unknown strengthen flag {other:?}"),
                }
            }
            Ok(flags)
        }
    }
}

fn parse_w(text: &str, n: usize) -> Result<Vec<u8>> {
    if text == "e" {
        return Ok(vec![1; n]);
    }
    let bits: Vec<u8> = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0u8),
            '1' => Ok(1u8),
            other => bail!("w must be a bit string, found {other:?}"),
        })
        .collect::<Result<_>>()?;
    if bits.len() != n {
        bail!("w has {} bits, the problem needs {n}", bits.len());
    }
    Ok(bits)
}

fn experiment_from_config(
    map: &ConfigMap,
    default_time_limit: f64,
    default_seed: u64,
) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig {
        time_limit_s: default_time_limit,
        seed: default_seed,
        ..Default::default()
    };
    for name in parse_list(map.get("instances").map(String::as_str).unwrap_or("")) {
        config.instances.push(InstanceSpec::parse(&name)?);
    }
    for name in parse_list(map.get("methods").map(String::as_str).unwrap_or("")) {
        config.methods.push(MethodSpec::parse(&name)?);
    }
    if let Some(v) = map.get("deltas") {
        config.deltas = parse_f64_list(v)?.into_iter().map(Some).collect();
    }
    if let Some(v) = map.get("t_values") {
        config.t_values = parse_f64_list(v)?.into_iter().map(Some).collect();
    }
    if let Some(v) = map.get("time_limit") {
        config.time_limit_s = v.parse().context("bad time_limit")?;
    }
    if let Some(v) = map.get("workers") {
        config.workers = v.parse().context("bad workers")?;
    }
    if let Some(v) = map.get("seed") {
        config.seed = v.parse().context("bad seed")?;
    }
    if let Some(v) = map.get("delta_sweep") {
        config.delta_sweep = v == "true";
    }
    Ok(config)
}
