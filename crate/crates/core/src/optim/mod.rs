//! Exact small-scale solvers: equality-form simplex and the assignment problem.

mod hungarian;
mod simplex;

pub use hungarian::{hungarian, Assignment};
pub use simplex::{solve_lp, LinearProgram, LpOutcome, FEASIBILITY_TOL, PIVOT_TOL};
