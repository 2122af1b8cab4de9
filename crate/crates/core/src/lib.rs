//! Finite-element laboratory for the Stokes problem, the pressure-Poisson
//! problem and the ε-Stokes family that links them.
//!
//! All three problems are discretized with Taylor–Hood elements (continuous
//! P2 velocity, continuous P1 pressure) on conforming triangulations. The
//! [`harness`] module runs ε- and h-sweeps against manufactured solutions and
//! checks the asymptotic relations between the three solutions.

// index loops mirror the element formulas; negated comparisons reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fem;
pub mod harness;
pub mod mesh;
pub mod problems;
pub mod sparse;
pub mod verification;

pub use error::{Error, Result};
pub use mesh::{Mesh, Point};
