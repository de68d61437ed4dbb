//! First-order finite-volume solver for the compressible Euler system on a
//! periodic grid, with conservation, entropy and a priori monitors.

mod field;
mod flux;
mod grid;
mod monitors;
mod scheme;

pub use field::{CellState, ConservedField};
pub use flux::FluxKind;
pub use grid::Grid;
pub use monitors::{
    apriori_bounds, apriori_functionals, min_entropy_monitor, AprioriFunctionals, Diagnostics,
    EntropyMonitor, ENTROPY_TOLERANCE,
};
pub use scheme::{
    entropy_residual, entropy_residual_with, run, run_with, step, step_detailed, RunOutput,
    SchemeConfig, StepOutcome,
};

use thiserror::Error;

use crate::thermo::ThermoError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("instability at t = {t}: dt = {dt:e}, max wave speed = {max_speed:e}")]
    Instability { t: f64, dt: f64, max_speed: f64 },
    #[error("positivity lost at t = {t} in cell {cell}: rho = {rho:e}, internal energy = {internal:e}")]
    PositivityLost { t: f64, cell: usize, rho: f64, internal: f64 },
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

pub type Result<T> = std::result::Result<T, SolverError>;
