//! Engine abstraction: anything that can solve a [`MilpModel`].

use crate::error::MilpError;
use crate::milp::model::{MilpModel, MilpSolution};

/// Engine-facing solve parameters.
#[derive(Debug, Clone)]
pub struct SolveParams {
    /// Wall-clock limit in seconds.
    pub time_limit_s: f64,
    /// Relative MIP gap at which the engine may stop.
    pub mip_gap: f64,
    /// Worker threads inside the engine.
    pub threads: usize,
    /// Engine random seed, pinned for reproducibility.
    pub seed: u32,
}

impl Default for SolveParams {
    fn default() -> Self {
        // 7200 s is the reference time budget; desk runs override it.
        Self { time_limit_s: 7200.0, mip_gap: 1e-6, threads: 1, seed: 0 }
    }
}

impl SolveParams {
    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit_s = seconds;
        self
    }
}

/// A MILP/LP engine. Implementations must be safe to call concurrently on
/// distinct models (each solve owns its private state).
pub trait Engine: Send + Sync {
    fn name(&self) -> &str;

    /// Solve the model. `values` are present whenever the returned status is
    /// `Optimal` or `FeasibleAtLimit`.
    fn solve(&self, model: &MilpModel, params: &SolveParams) -> Result<MilpSolution, MilpError>;
}

/// Engine selected from the environment: `DDID_ENGINE=<path>` configures the
/// external subprocess driver, otherwise the in-process engine is used.
pub fn default_engine() -> Box<dyn Engine> {
    match std::env::var("DDID_ENGINE") {
        Ok(path) if !path.trim().is_empty() => {
            Box::new(crate::milp::external::ExternalEngine::new(path))
        }
        _ => Box::new(crate::milp::highs_engine::HighsEngine),
    }
}
