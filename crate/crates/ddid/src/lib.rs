//! Solver toolkit for two-stage robust optimization with decision-dependent
//! information discovery (DDID).
//!
//! A first-stage binary vector `w` selects which components of an uncertain
//! cost vector `ξ ∈ Ξ` are observed before binary recourse decisions `y ∈ Y`
//! are taken; the adversary controls the unobserved components. The toolkit
//! provides:
//!
//! * an exact nested decomposition: a Logic-Benders outer loop over `w`
//!   ([`exact`]) whose subproblem values are computed exactly by
//!   column-and-constraint generation ([`ccg`]),
//! * a strengthened K-adaptability approximation ([`kadapt`]) with symmetry
//!   ordering, tightened McCormick linearization, optimistic inequalities and
//!   RLT cuts,
//! * brute-force oracles ([`oracle`]) used to validate both solvers on
//!   enumerable instances,
//! * concrete problem builders ([`adapters`]): the sensor-placement
//!   orienteering problem and a robust shortest-path benchmark,
//! * a backend-agnostic MILP layer ([`milp`]) with an in-process engine and
//!   an external subprocess driver speaking the LP file format.
//!
//! All internal algebra runs in MIN convention; problems stated as
//! maximizations are stored with negated cost matrices and report objectives
//! negated back (see [`problem::DdidProblem`]).

pub mod adapters;
pub mod ccg;
pub mod error;
pub mod exact;
pub mod kadapt;
pub mod linalg;
pub mod milp;
pub mod oracle;
pub mod polyhedron;
pub mod problem;
pub mod recourse;

pub use error::DdidError;
pub use linalg::Matrix;
pub use polyhedron::Polyhedron;
pub use problem::{DdidProblem, Sense, ValidationReport};
pub use recourse::{LinearRow, RecourseSpec, RowSense};

/// Absolute feasibility tolerance for membership and certificate checks.
pub const FEAS_TOL: f64 = 1e-6;

/// Absolute tolerance for objective comparisons and bound gaps.
pub const OBJ_TOL: f64 = 1e-6;
