//! Plot-ready files: per-run trajectory and summary, pairwise TvD report and trend table.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::OutputError;
use crate::lifetime::{DayLog, LifetimeResult};
use crate::metrics::{RunSummary, TrendPoint, TvdReport};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TVD_REPORT_FILE: &str = "tvd_report.json";
pub const TREND_FILE: &str = "trend.csv";

/// One line of `trajectory.csv`. Capacities in Ah, LLI as fractions of the initial inventory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub day: u32,
    /// Capacity relative to the fresh cell.
    pub capacity_frac: f64,
    #[serde(rename = "C_p")]
    pub c_p: f64,
    #[serde(rename = "C_n")]
    pub c_n: f64,
    #[serde(rename = "LLI")]
    pub lli: f64,
    #[serde(rename = "LLI_sei")]
    pub lli_sei: f64,
    #[serde(rename = "LLI_plating")]
    pub lli_plating: f64,
    #[serde(rename = "LLI_diss")]
    pub lli_diss: f64,
    #[serde(rename = "LLI_crack")]
    pub lli_crack: f64,
    #[serde(rename = "cum_Ah_norm")]
    pub cum_ah_norm: f64,
    #[serde(rename = "SOC_min")]
    pub soc_min: f64,
    #[serde(rename = "SOC_avg")]
    pub soc_avg: f64,
    #[serde(rename = "SOC_max")]
    pub soc_max: f64,
}

impl TrajectoryRow {
    fn new(log: &DayLog, result: &LifetimeResult) -> Self {
        let n0 = result.initial_lithium;
        Self {
            day: log.day,
            capacity_frac: log.esoh.capacity_ah / result.initial.esoh.capacity_ah,
            c_p: log.esoh.positive_ah,
            c_n: log.esoh.negative_ah,
            lli: (n0 - log.lithium) / n0,
            lli_sei: log.lli.sei / n0,
            lli_plating: log.lli.plating / n0,
            lli_diss: log.lli.dissolution / n0,
            lli_crack: log.lli.crack / n0,
            cum_ah_norm: log.throughput_ah / result.nominal_capacity_ah,
            soc_min: log.soc_min,
            soc_avg: log.soc_mean,
            soc_max: log.soc_max,
        }
    }
}

pub fn trajectory_rows(result: &LifetimeResult) -> Vec<TrajectoryRow> {
    std::iter::once(&result.initial)
        .chain(&result.logs)
        .map(|l| TrajectoryRow::new(l, result))
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn ensure_parent(path: &Path) -> Result<(), OutputError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(io_err(dir)),
        _ => Ok(()),
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), OutputError> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OutputError> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value).map_err(|source| OutputError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, OutputError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| OutputError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_trajectory(path: &Path, result: &LifetimeResult) -> Result<(), OutputError> {
    write_csv(path, trajectory_rows(result))
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>, OutputError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(OutputError::from)).collect()
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<(), OutputError> {
    write_json(path, summary)
}

pub fn read_summary(path: &Path) -> Result<RunSummary, OutputError> {
    read_json(path)
}

/// Write both per-run files into `dir`.
pub fn write_run(dir: &Path, result: &LifetimeResult, summary: &RunSummary) -> Result<(), OutputError> {
    write_trajectory(&dir.join(TRAJECTORY_FILE), result)?;
    write_summary(&dir.join(SUMMARY_FILE), summary)
}

/// Every `summary.json` below `dir`, sorted by path.
pub fn find_summaries(dir: &Path) -> Result<Vec<(PathBuf, RunSummary)>, OutputError> {
    let mut paths = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            OutputError::Io {
                source: e
                    .into_io_error()
                    .unwrap_or_else(|| std::io::Error::other("directory loop")),
                path,
            }
        })?;
        if entry.file_type().is_file() && entry.file_name() == SUMMARY_FILE {
            paths.push(entry.into_path());
        }
    }
    paths.into_iter().map(|p| read_summary(&p).map(|s| (p, s))).collect()
}

pub fn write_tvd_report(path: &Path, report: &TvdReport) -> Result<(), OutputError> {
    write_json(path, report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub family: String,
    pub scenario: String,
    pub variant: String,
    pub cal_fraction: f64,
    /// Empty for an infinite ratio.
    pub tvd: Option<f64>,
    pub log10_tvd: Option<f64>,
}

impl From<&TrendPoint> for TrendRow {
    fn from(p: &TrendPoint) -> Self {
        let v = p.tvd.value();
        Self {
            family: p.cell.clone(),
            scenario: p.scenario.clone(),
            variant: p.drive.clone(),
            cal_fraction: p.cal_fraction,
            tvd: v.is_finite().then_some(v),
            log10_tvd: (v.is_finite() && v > 0.0).then(|| v.log10()),
        }
    }
}

pub fn write_trend(path: &Path, points: &[TrendPoint]) -> Result<(), OutputError> {
    write_csv(path, points.iter().map(TrendRow::from))
}

pub fn read_trend(path: &Path) -> Result<Vec<TrendRow>, OutputError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(OutputError::from)).collect()
}
