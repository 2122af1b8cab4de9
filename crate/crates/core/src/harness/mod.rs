//! Experiment runner: configuration, ε- and h-sweeps, output tables, VTK
//! export and the acceptance suite.

mod acceptance;
mod config;
mod sweep;
mod table;
mod vtk;

pub use acceptance::{exit_code, run_acceptance, AcceptanceReport, CriterionResult, CONTRACT_RESIDUAL};
pub use config::{default_eps_grid, Format, ProblemSelection, RunConfig};
pub use sweep::{
    gradient_distance, h1_distance, h_rates, quotient_distance, run_solve, run_sweep_eps, run_sweep_h, Experiment,
};
pub use table::{ErrorRow, ErrorTable, RateRecord, COLUMNS, TABLE_HEADER};
pub use vtk::{export_vtk, vtk_string};
