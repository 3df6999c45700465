//! External engine driver: emit an LP file, run a solver binary, parse its
//! solution file.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use crate::error::MilpError;
use crate::milp::engine::{Engine, SolveParams};
use crate::milp::lp_format;
use crate::milp::model::{MilpModel, MilpSolution};

/// Subprocess driver for a command-line MILP engine.
///
/// Arguments are built from a template with `{model}`, `{solution}`,
/// `{time_limit_s}`, `{mip_gap}` and `{threads}` placeholders. When no
/// template is given one is inferred from the binary name (`cbc` and `highs`
/// conventions are known).
#[derive(Debug, Clone)]
pub struct ExternalEngine {
    pub binary: String,
    pub args_template: Vec<String>,
    /// Keep the per-solve temp directory instead of deleting it.
    pub keep_files: bool,
}

impl ExternalEngine {
    pub fn new(binary: impl Into<String>) -> Self {
        let binary = binary.into();
        let args_template = match std::env::var("DDID_ENGINE_ARGS") {
            Ok(t) if !t.trim().is_empty() => t.split_whitespace().map(str::to_string).collect(),
            _ => infer_template(&binary),
        };
        Self { binary, args_template, keep_files: false }
    }

    pub fn with_args(mut self, template: Vec<String>) -> Self {
        self.args_template = template;
        self
    }

    pub fn keep_files(mut self, keep: bool) -> Self {
        self.keep_files = keep;
        self
    }
}

fn infer_template(binary: &str) -> Vec<String> {
    let base = PathBuf::from(binary)
        .file_stem()
        .map(|s| s.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    let template = if base.contains("cbc") {
        "{model} -seconds {time_limit_s} -ratioGap {mip_gap} -threads {threads} solve solution {solution}"
    } else {
        // HiGHS-style command line as the fallback convention.
        "--solution_file {solution} --time_limit {time_limit_s} --mip_rel_gap {mip_gap} {model}"
    };
    template.split_whitespace().map(str::to_string).collect()
}

impl Engine for ExternalEngine {
    fn name(&self) -> &str {
        "external"
    }

    fn solve(&self, model: &MilpModel, params: &SolveParams) -> Result<MilpSolution, MilpError> {
        let start = Instant::now();
        let dir = tempfile::Builder::new().prefix("ddid-milp-").tempdir()?;
        let model_path = dir.path().join("model.lp");
        let solution_path = dir.path().join("model.sol");
        let text = lp_format::emit_model_file(model)?;
        std::fs::write(&model_path, text)?;

        let args: Vec<String> = self
            .args_template
            .iter()
            .map(|a| {
                a.replace("{model}", &model_path.to_string_lossy())
                    .replace("{solution}", &solution_path.to_string_lossy())
                    .replace("{time_limit_s}", &format!("{}", params.time_limit_s))
                    .replace("{mip_gap}", &format!("{}", params.mip_gap))
                    .replace("{threads}", &format!("{}", params.threads))
            })
            .collect();

        let output = Command::new(&self.binary).args(&args).output().map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                MilpError::EngineNotFound(self.binary.clone())
            } else {
                MilpError::Io(e)
            }
        })?;
        if !solution_path.exists() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(MilpError::Engine(format!(
                "{} exited with {:?} and wrote no solution file: {}",
                self.binary,
                output.status.code(),
                stderr.chars().take(400).collect::<String>()
            )));
        }
        let sol_text = std::fs::read_to_string(&solution_path)?;
        let mut solution = lp_format::parse_solution_file(model, &sol_text)?;
        solution.wall_time_s = start.elapsed().as_secs_f64();
        if self.keep_files {
            let kept = dir.keep();
            solution.warnings.push(format!("solver files kept in {}", kept.display()));
        }
        Ok(solution)
    }
}
