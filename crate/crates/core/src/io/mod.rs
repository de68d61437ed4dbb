//! Configuration parsing and the on-disk formats: binary snapshots, CSV
//! time series and JSON reports.

mod config;
mod snapshot;
mod tables;

pub use config::{
    load_config, parse_config, EnsembleSection, GridSection, RunConfig, SolutionChoice, StudySection,
    ThermoSection, SCHEMA_VERSION,
};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, MAGIC, VERSION};
pub use tables::{
    write_defect_csv, write_json, write_series_csv, write_study_json, write_study_trace_csv, DEFECT_COLUMNS,
    STUDY_COLUMNS,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read configuration: {0}")]
    Io(String),
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("malformed snapshot: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = SnapshotError> = std::result::Result<T, E>;
