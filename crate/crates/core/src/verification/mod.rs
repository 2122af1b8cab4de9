//! Manufactured solutions, error norms and rate fitting.

mod cases;
mod norms;
mod slope;

pub use cases::{find_case, ms1, ms1_mismatch, registry, ManufacturedCase, ScalarFn, TensorFn};
pub use norms::{
    divergence_l2, error_h1, error_h1_seminorm, error_l2, gauss_formula_residual, quotient_norm_l2, trace_mismatch,
    Exact, ExactGrad,
};
pub use slope::{fit_log_slope, saturation_window};
