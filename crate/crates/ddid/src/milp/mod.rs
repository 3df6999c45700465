//! Backend-agnostic MILP/LP layer: model IR, engines, LP file format and the
//! lazy-constraint solve loop.

pub mod engine;
pub mod external;
pub mod highs_engine;
pub mod lp_format;
pub mod model;
pub mod separation;

pub use engine::{default_engine, Engine, SolveParams};
pub use external::ExternalEngine;
pub use highs_engine::HighsEngine;
pub use lp_format::{emit_model_file, parse_solution_file, read_lp};
pub use model::{Cmp, MilpModel, MilpSolution, ObjSense, SolveStatus, VarId, VarKind, Variable};
pub use separation::{solve_with_separation, CutRow, NoSeparation, SeparationOutcome, Separator};

/// Default bound on solve–separate rounds.
pub const DEFAULT_MAX_SEPARATION_ROUNDS: usize = 10_000;
