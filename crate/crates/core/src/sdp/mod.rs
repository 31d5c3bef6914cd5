//! Self-contained semidefinite programming: a modeling layer for real and
//! complex Hermitian block programs and a primal–dual interior point solver.

mod herm;
mod program;
mod solver;

#[cfg(test)]
mod tests;

pub use herm::{embed_hermitian, CExpr, HermConstraint, HermExpr};
pub use program::*;
pub use solver::{solve, solve_with, IterationRecord, Solution, SolveOptions, SolveStatus};
