//! Convergence studies for `fracfem-core`: configuration, output formats and
//! the experiment driver behind the `fracfem` binary.

pub mod config;
pub mod harness;
pub mod io;

use fracfem_core::{AssemblyError, InterpError, MeshError, OracleError, SolverError};
use thiserror::Error;

pub use config::{Experiment, ExperimentConfig};
pub use harness::{fit_rate, run_experiment, ConvergenceTable, ExperimentOutput, Fit, LevelInfo};
pub use io::Row;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Linalg(#[from] fracfem_core::LinalgError),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error("format: {0}")]
    Format(String),
    #[error("rate fit: {0}")]
    Fit(String),
    #[error("s = {s}, h = {h}: {source}")]
    Level { s: f64, h: f64, source: CoreError },
}
