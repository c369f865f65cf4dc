//! Command implementations behind the `cellwear` binary.

use std::path::Path;

use cellwear_core::params::CellParameters;

pub mod fit;
pub mod fixtures;
pub mod simulate;
pub mod tvd;
pub mod validate;

/// Exit status for bad arguments or unreadable configuration.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status when the work itself failed.
pub const EXIT_RUNTIME: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

/// A bundled cell name, or a path to a cell TOML file.
pub fn load_cell(spec: &str) -> Result<CellParameters, CliError> {
    if let Ok(cell) = CellParameters::bundled(spec) {
        return Ok(cell);
    }
    let path = Path::new(spec);
    if path.is_file() {
        return CellParameters::load(path).map_err(|e| CliError::Config(format!("{spec}: {e}")));
    }
    Err(CliError::Config(format!(
        "`{spec}` is neither a bundled cell (nmc111, nmc622_25c, nmc622_45c) nor a readable file"
    )))
}

/// Split comma-separated list arguments and drop empty items.
pub fn split_list(raw: &[String]) -> Vec<String> {
    raw.iter()
        .flat_map(|s| s.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

pub(crate) fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}
