//! The (cell × scenario × drive) lifetime grid.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cellwear_core::duty::{build_schedule, DriveVariant, Scenario};
use cellwear_core::lifetime::{run_lifetime, JumpPolicy, LifetimeOptions, SimulationMode, DEFAULT_DAY_CAP};
use cellwear_core::metrics::{compare_runs, RunSummary, Tvd};
use cellwear_core::output::write_run;
use cellwear_core::params::CellParameters;
use rayon::prelude::*;

use crate::{load_cell, thread_pool, CliError};

pub const BASELINE: &str = "no_v2g";

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub cells: Vec<CellParameters>,
    pub scenarios: Vec<Scenario>,
    pub drives: Vec<DriveVariant>,
    pub mode: SimulationMode,
    pub out: PathBuf,
    pub jobs: usize,
    pub max_days: u32,
}

/// Raw command-line values before validation.
#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub cells: Vec<String>,
    pub scenarios: Vec<String>,
    pub drives: Vec<String>,
    pub mode: String,
    pub tol_jump: f64,
    pub out: PathBuf,
    pub jobs: usize,
    pub max_days: Option<u32>,
}

fn parse_all<T: std::str::FromStr<Err = String>>(items: &[String], what: &str) -> Result<Vec<T>, CliError> {
    if items.is_empty() {
        return Err(CliError::Config(format!("no {what} given")));
    }
    let mut out: Vec<T> = Vec::new();
    for s in items {
        out.push(s.parse().map_err(CliError::Config)?);
    }
    Ok(out)
}

pub fn parse_mode(mode: &str, tol_jump: f64) -> Result<SimulationMode, CliError> {
    match mode {
        "exhaustive" => Ok(SimulationMode::Exhaustive),
        "accelerated" if tol_jump > 0.0 && tol_jump.is_finite() => {
            Ok(SimulationMode::Accelerated(JumpPolicy::Adaptive {
                tolerance: tol_jump,
            }))
        }
        "accelerated" => Err(CliError::Config(format!("--tol-jump must be positive, got {tol_jump}"))),
        _ => Err(CliError::Config(format!(
            "unknown mode `{mode}` (expected accelerated or exhaustive)"
        ))),
    }
}

impl SimulateConfig {
    pub fn from_args(args: &SimulateArgs) -> Result<Self, CliError> {
        let cells = crate::split_list(&args.cells);
        if cells.is_empty() {
            return Err(CliError::Config("no cells given".into()));
        }
        let cells = cells.iter().map(|c| load_cell(c)).collect::<Result<Vec<_>, _>>()?;
        let mut scenarios: Vec<Scenario> = parse_all(&crate::split_list(&args.scenarios), "scenarios")?;
        scenarios.dedup();
        let drives = parse_all(&crate::split_list(&args.drives), "drive variants")?;
        if args.jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        if args.out.is_file() {
            return Err(CliError::Config(format!(
                "output path {} is a file",
                args.out.display()
            )));
        }
        Ok(Self {
            cells,
            scenarios,
            drives,
            mode: parse_mode(&args.mode, args.tol_jump)?,
            out: args.out.clone(),
            jobs: args.jobs,
            max_days: args.max_days.unwrap_or(DEFAULT_DAY_CAP),
        })
    }
}

/// Directory holding the files of one run.
pub fn run_dir(out: &Path, cell: &str, drive: DriveVariant, scenario: Scenario) -> PathBuf {
    out.join(cell).join(drive.name()).join(scenario.name())
}

pub struct RunOutcome {
    pub cell: String,
    pub drive: DriveVariant,
    pub scenario: Scenario,
    pub result: Result<RunSummary, String>,
}

fn run_one(
    cell: &CellParameters,
    drive: DriveVariant,
    scenario: Scenario,
    opts: &LifetimeOptions,
    out: &Path,
) -> Result<RunSummary, String> {
    let schedule = build_schedule(scenario, drive.profile(), cell).map_err(|e| format!("schedule: {e}"))?;
    let result = run_lifetime(cell, &schedule, opts).map_err(|e| format!("simulation: {e}"))?;
    let summary = RunSummary::from_result(&result, drive.name(), opts.mode.name()).map_err(|e| e.to_string())?;
    write_run(&run_dir(out, &cell.name, drive, scenario), &result, &summary).map_err(|e| e.to_string())?;
    Ok(summary)
}

/// Run every combination. Failed runs are reported, not fatal to the others.
pub fn run_grid(cfg: &SimulateConfig) -> Result<Vec<RunOutcome>, CliError> {
    let opts = LifetimeOptions {
        mode: cfg.mode,
        max_days: cfg.max_days,
        ..LifetimeOptions::default()
    };
    let mut jobs = Vec::new();
    for cell in &cfg.cells {
        for &drive in &cfg.drives {
            for &scenario in &cfg.scenarios {
                jobs.push((cell, drive, scenario));
            }
        }
    }
    let pool = thread_pool(cfg.jobs)?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|&(cell, drive, scenario)| {
                log::info!("{} {} {}: start", cell.name, drive, scenario);
                let result = run_one(cell, drive, scenario, &opts, &cfg.out);
                match &result {
                    Ok(s) => log::info!("{} {} {}: {:.1} days", cell.name, drive, scenario, s.days),
                    Err(e) => log::error!("{} {} {}: {e}", cell.name, drive, scenario),
                }
                RunOutcome {
                    cell: cell.name.clone(),
                    drive,
                    scenario,
                    result,
                }
            })
            .collect()
    }))
}

/// Console table with one row per run, plus the TvD against the baseline where one exists.
pub fn format_table(outcomes: &[RunOutcome]) -> String {
    let ok: Vec<RunSummary> = outcomes
        .iter()
        .filter_map(|o| o.result.as_ref().ok().cloned())
        .collect();
    let mut ratios: BTreeMap<(String, String, String), Tvd> = BTreeMap::new();
    if let Ok(report) = compare_runs(&ok, BASELINE) {
        for e in report.entries {
            ratios.insert((e.cell, e.drive, e.scenario), e.charge.tvd);
        }
    }
    let mut s = format!(
        "{:<12} {:<6} {:<13} {:>8} {:>9} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}  {}\n",
        "cell", "drive", "scenario", "days", "Ah/Ah", "LLI%", "SEI%", "pl%", "diss%", "crack%", "TvD", "status"
    );
    for o in outcomes {
        match &o.result {
            Ok(r) => {
                let b = &r.breakdown;
                let tvd = ratios
                    .get(&(r.cell.clone(), r.drive.clone(), r.scenario.clone()))
                    .map_or_else(|| "-".to_string(), |t| t.to_string());
                let status = if r.reached_eol() { "eol" } else { "censored" };
                s += &format!(
                    "{:<12} {:<6} {:<13} {:>8.1} {:>9.1} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>7}  {}\n",
                    o.cell,
                    o.drive,
                    o.scenario,
                    r.days,
                    r.normalized_throughput,
                    100.0 * b.lli_total,
                    100.0 * b.lli_sei,
                    100.0 * b.lli_plating,
                    100.0 * b.lli_diss,
                    100.0 * b.lli_crack,
                    tvd,
                    status
                );
            }
            Err(e) => s += &format!("{:<12} {:<6} {:<13} failed: {e}\n", o.cell, o.drive, o.scenario),
        }
    }
    s
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let cfg = SimulateConfig::from_args(args)?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", cfg.out.display())))?;
    let outcomes = run_grid(&cfg)?;
    print!("{}", format_table(&outcomes));
    let failed = outcomes.iter().filter(|o| o.result.is_err()).count();
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} of {} runs failed", outcomes.len())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> SimulateArgs {
        SimulateArgs {
            cells: vec!["nmc111".into()],
            scenarios: vec!["no_v2g,v2g_late".into()],
            drives: vec!["long".into()],
            mode: "accelerated".into(),
            tol_jump: 0.02,
            out: PathBuf::from("unused"),
            jobs: 1,
            max_days: None,
        }
    }

    #[test]
    fn config_parses_lists() {
        let cfg = SimulateConfig::from_args(&args()).unwrap();
        assert_eq!(cfg.scenarios, vec![Scenario::NoV2g, Scenario::V2gLate]);
        assert_eq!(cfg.max_days, DEFAULT_DAY_CAP);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let cases: [fn(&mut SimulateArgs); 5] = [
            |a| a.scenarios = vec![String::new()],
            |a| a.scenarios = vec!["v2g_sometimes".into()],
            |a| a.mode = "fast".into(),
            |a| a.tol_jump = 0.0,
            |a| a.jobs = 0,
        ];
        for f in cases {
            let mut a = args();
            f(&mut a);
            assert!(matches!(SimulateConfig::from_args(&a), Err(CliError::Config(_))));
        }
    }
}
