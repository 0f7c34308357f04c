//! Small dense solvers used by the preference programs.

mod lp;
mod nelder_mead;

pub use lp::{lp_solve, Constraint, LinearProgram, LpOutcome, LpStatus, Relation};
pub use nelder_mead::{nm_maximize, nm_maximize_until, SimplexSearchConfig};
