//! Error types shared across the toolkit.

use thiserror::Error;

/// Errors produced by model construction, validation and the solvers.
#[derive(Debug, Error)]
pub enum DdidError {
    /// Input data violates a structural invariant.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A point failed a feasibility or membership requirement.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Recourse enumeration exceeded its cap.
    #[error("cap exceeded: found more than {cap} feasible recourse points")]
    CapExceeded {
        /// The enumeration cap that was exceeded.
        cap: usize,
    },

    /// The MILP backend failed.
    #[error(transparent)]
    Milp(#[from] MilpError),
}

/// Errors produced by the MILP backend.
#[derive(Debug, Error)]
pub enum MilpError {
    /// The model itself is malformed (duplicate names, bad bounds, ...).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The configured external engine binary could not be found or started.
    #[error("engine not found: {0}")]
    EngineNotFound(String),

    /// Writing the model file or reading the solution file failed.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    /// The engine produced output we could not parse.
    #[error("unparseable solution output: {0}")]
    ParseSolution(String),

    /// The engine ran but reported an internal failure.
    #[error("engine failure: {0}")]
    Engine(String),

    /// The separation loop hit its round limit while cuts were still firing.
    #[error("cut-loop limit reached after {rounds} rounds")]
    CutLoopLimit {
        /// Number of solve rounds performed.
        rounds: usize,
    },
}
