use std::path::PathBuf;

use thiserror::Error;

use crate::state::Electrode;

/// Problems with cell descriptions, OCP tables or drive profiles.
#[derive(Debug, Error)]
pub enum ParamError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed cell file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("parameter `{field}` = {value} is invalid: {reason}")]
    Invalid {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("OCP table: {0}")]
    OcpTable(String),
    #[error("unknown bundled {kind} `{name}`")]
    UnknownBundled { kind: &'static str, name: String },
}

/// Problems with a current profile.
#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("profile needs at least two samples")]
    TooShort,
    #[error("time must start at 0 and increase strictly (line {line})")]
    NonMonotonicTime { line: usize },
    #[error("net charge over the profile is negative ({net_ah_per_ah:.4} Ah per Ah of capacity)")]
    NetCharging { net_ah_per_ah: f64 },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Numerical or physical failures during time integration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{electrode:?} electrode concentration left [0, c_max] (stoichiometry {stoichiometry:.6})")]
    Saturation { electrode: Electrode, stoichiometry: f64 },
    #[error("{electrode:?} exchange current is zero while current is demanded")]
    KineticStarvation { electrode: Electrode },
    #[error("electrode capacity collapsed ({electrode:?})")]
    CapacityCollapse { electrode: Electrode },
    #[error("no stoichiometry window satisfies the voltage limits: {0}")]
    Window(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Schedule construction failures.
#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("charge of {needed_s:.0} s does not fit the {available_s:.0} s window before {before}")]
    Infeasible {
        needed_s: f64,
        available_s: f64,
        before: &'static str,
    },
    #[error("segments do not tile the day: {0}")]
    Tiling(String),
    #[error("could not match the reference average SOC: {0}")]
    Calibration(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Raised when an extrapolated state would violate a physical bound.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtrapolationError {
    #[error("extrapolated {0} left its physical range")]
    OutOfRange(&'static str),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Failures while reducing simulation results to metrics.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("mechanism ledger sums to {ledger:.6} but LLI is {lli:.6}")]
    LedgerMismatch { ledger: f64, lli: f64 },
    #[error("run has no end-of-life record")]
    NoEol,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("no baseline run for {0}")]
    MissingBaseline(String),
    #[error("cannot compare runs: {0}")]
    Mismatch(String),
    #[error("lithium inventory grew: LLI {0:.3e}")]
    NegativeLoss(f64),
    #[error("no V2G runs found")]
    NoV2gRuns,
    #[error("no V2G run could be paired with a baseline")]
    NoPairs,
}

/// Output writing and reading failures.
#[derive(Debug, Error)]
pub enum OutputError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}
