//! Pair stored run summaries and write the TvD report and trend table.

use std::path::Path;

use cellwear_core::error::MetricsError;
use cellwear_core::metrics::{compare_runs, trend_report, RunSummary, TvdReport};
use cellwear_core::output::{find_summaries, write_trend, write_tvd_report, TREND_FILE, TVD_REPORT_FILE};

use crate::simulate::BASELINE;
use crate::CliError;

/// Build the report from summaries; no matched pair is an error.
pub fn report(summaries: &[RunSummary]) -> Result<TvdReport, CliError> {
    compare_runs(summaries, BASELINE).map_err(|e| match e {
        MetricsError::NoPairs => CliError::Runtime("no V2G run could be paired with a baseline".into()),
        e => CliError::Runtime(e.to_string()),
    })
}

pub fn format_report(report: &TvdReport) -> String {
    let mut s = format!(
        "{:<12} {:<6} {:<13} {:>9} {:>9} {:>8} {:>9}\n",
        "cell", "drive", "scenario", "gain", "loss", "TvD", "cal_frac"
    );
    for e in &report.entries {
        s += &format!(
            "{:<12} {:<6} {:<13} {:>9.4} {:>9.4} {:>8} {:>9.3}\n",
            e.cell, e.drive, e.scenario, e.charge.gain, e.charge.loss, e.charge.tvd, e.cal_fraction
        );
    }
    for (run, why) in &report.unmatched {
        s += &format!("unmatched {run}: {why}\n");
    }
    s
}

pub fn cmd_tvd(results: &Path, out: Option<&Path>) -> Result<(), CliError> {
    if !results.is_dir() {
        return Err(CliError::Config(format!("{} is not a directory", results.display())));
    }
    let summaries: Vec<RunSummary> = find_summaries(results)
        .map_err(|e| CliError::Runtime(e.to_string()))?
        .into_iter()
        .map(|(_, s)| s)
        .collect();
    if summaries.is_empty() {
        return Err(CliError::Runtime(format!(
            "no run summaries under {}",
            results.display()
        )));
    }
    let report = report(&summaries)?;
    print!("{}", format_report(&report));
    let out = out.unwrap_or(results);
    let write = |r: Result<(), _>| r.map_err(|e: cellwear_core::error::OutputError| CliError::Runtime(e.to_string()));
    write(write_tvd_report(&out.join(TVD_REPORT_FILE), &report))?;
    let points = report.trend_points();
    write(write_trend(&out.join(TREND_FILE), &points))?;
    match trend_report(points) {
        Ok(t) => {
            if let Some(f) = t.fit {
                println!("log10 TvD = {:.3} + {:.3} cal_fraction", f.intercept, f.slope);
            }
            if let Some(rho) = t.spearman {
                println!("spearman(cal_fraction, log10 TvD) = {rho:.3}");
            }
        }
        Err(e) => log::warn!("no trend: {e}"),
    }
    Ok(())
}
