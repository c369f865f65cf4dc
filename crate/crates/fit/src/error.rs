use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("start point and bounds must have the same non-zero length")]
    Dimension,
    #[error("bounds of variable {0} are not finite with lower < upper")]
    Bounds(usize),
    #[error("start point lies outside the bounds in variable {0}")]
    StartOutside(usize),
    #[error("budget of {budget} evaluations is below the {needed} needed for a first model")]
    Budget { budget: usize, needed: usize },
    #[error("residual vector changed length from {expected} to {got}")]
    ResidualLength { expected: usize, got: usize },
    #[error("interpolation set degenerate with no budget left to rebuild it")]
    DegenerateAtBudget,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("{path}: csv: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("stage1 requires calendar data")]
    NoCalendarData,
    #[error("stage2 requires cycling data")]
    NoCyclingData,
    #[error("{stage}: {source}")]
    Solver {
        stage: &'static str,
        #[source]
        source: SolverError,
    },
    #[error("{stage}: verification simulation failed: {reason}")]
    Verification { stage: &'static str, reason: String },
    #[error("{stage}: {reason}")]
    Setup { stage: &'static str, reason: String },
}
