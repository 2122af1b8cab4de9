//! Sparse matrix storage and linear solves.

mod csr;
mod solver;

pub use csr::CsrMatrix;
pub use solver::{relative_residual, solve, SolverReport, DEFAULT_TOL, MIN_TOL};
