//! Empirical parameterized measures built by space-time block averaging of
//! solver output.

mod ensemble;
mod measure;

pub use ensemble::{
    build_young_measure, run_ensemble, snapshot_times, EnsembleMember, EnsembleSpec, InitialData,
    Perturbation,
};
pub use measure::{
    support_check, Atom, AtomRef, BlockMeasure, SupportReport, TimeSlice, YoungMeasureField,
    DEFAULT_MERGE_TOLERANCE,
};

use thiserror::Error;

use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum YoungError {
    #[error("invalid ensemble: {0}")]
    InvalidSpec(String),
    #[error("snapshot alignment: {0}")]
    Alignment(String),
    #[error("observable is not finite on slice {slice}, block {block}")]
    Observable { slice: usize, block: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

pub type Result<T> = std::result::Result<T, YoungError>;
