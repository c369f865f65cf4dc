//! Quick self-checks on the bundled cells and reference fixtures.

use cellwear_core::constants::thermal_voltage;
use cellwear_core::degradation::Mechanisms;
use cellwear_core::duty::{build_schedule, DriveVariant, Scenario};
use cellwear_core::kinetics::overpotential;
use cellwear_core::lifetime::{run_lifetime, LifetimeOptions, LifetimeResult, SimulationMode};
use cellwear_core::metrics::{compare_runs, LliBreakdown, Tvd, TvdResult};
use cellwear_core::params::CellParameters;
use cellwear_core::state::Electrode;

use crate::fixtures::{reference_summaries, REFERENCE_LIVES};
use crate::CliError;

pub const BUNDLED_CELLS: [&str; 3] = ["nmc111", "nmc622_25c", "nmc622_45c"];
const CHECK_DAYS: u32 = 10;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn failed(name: impl Into<String>, detail: impl ToString) -> Self {
        Self::new(name, false, detail.to_string())
    }
}

fn short_run(cell: &CellParameters, scenario: Scenario, mechanisms: Mechanisms) -> Result<LifetimeResult, String> {
    let schedule = build_schedule(scenario, DriveVariant::Long.profile(), cell).map_err(|e| e.to_string())?;
    let opts = LifetimeOptions {
        mode: SimulationMode::Exhaustive,
        stop_day: Some(CHECK_DAYS),
        mechanisms,
        ..LifetimeOptions::default()
    };
    run_lifetime(cell, &schedule, &opts).map_err(|e| e.to_string())
}

fn conservation(cell: &CellParameters) -> Check {
    let name = format!("{}: lithium conserved with mechanisms off", cell.name);
    match short_run(cell, Scenario::V2gModerate, Mechanisms::none()) {
        Ok(r) => {
            let drift = r
                .logs
                .iter()
                .map(|l| (l.lithium - r.initial_lithium).abs() / r.initial_lithium)
                .fold(0.0, f64::max);
            Check::new(
                name,
                drift < 1e-8,
                format!("max relative drift {drift:.2e} over {CHECK_DAYS} days"),
            )
        }
        Err(e) => Check::failed(name, e),
    }
}

fn closure(cell: &CellParameters) -> Check {
    let name = format!("{}: lithium ledger closes", cell.name);
    match short_run(cell, Scenario::V2gLate, Mechanisms::all()) {
        Ok(r) => {
            let n0 = r.initial_lithium;
            let gap = r
                .logs
                .iter()
                .map(|l| ((n0 - l.lithium) - l.lli.total()).abs() / n0)
                .fold(0.0, f64::max);
            Check::new(name, gap < 1e-6, format!("max gap {gap:.2e}"))
        }
        Err(e) => Check::failed(name, e),
    }
}

fn reference_ratios() -> Check {
    let name = "reference lives give the published TvD values";
    let report = match compare_runs(&reference_summaries(), "no_v2g") {
        Ok(r) => r,
        Err(e) => return Check::failed(name, e),
    };
    let mut detail = Vec::new();
    let mut ok = report.entries.len() == REFERENCE_LIVES.len();
    for (cell, .., expected) in REFERENCE_LIVES {
        let got = report
            .entries
            .iter()
            .find(|e| e.cell == cell)
            .map(|e| e.charge.tvd.value());
        match got {
            Some(v) => {
                ok &= (v / expected - 1.0).abs() < 0.01;
                detail.push(format!("{cell} {v:.3}"));
            }
            None => ok = false,
        }
    }
    Check::new(name, ok, detail.join(", "))
}

fn special_ratios() -> Check {
    let ok = TvdResult::new(-0.1, 0.2).tvd == Tvd::Zero
        && TvdResult::new(0.1, -0.2).tvd == Tvd::Infinite
        && TvdResult::new(0.1, 0.2).tvd == Tvd::Finite(0.5);
    Check::new("TvD special cases", ok, "gain<0 -> 0, loss<0 -> inf")
}

fn breakdown_sum() -> Check {
    let name = "LLI breakdown sum check";
    match LliBreakdown::from_components(23.2, 0.6, 4.4, 1.7, 29.9) {
        Ok(b) => Check::new(
            name,
            (b.lli_cal - 27.6).abs() < 1e-9,
            format!("SEI+diss {:.1}, diss+crack {:.1}", b.lli_cal, b.lli_lam),
        ),
        Err(e) => Check::failed(name, e),
    }
}

fn linear_kinetics() -> Check {
    let t = 298.15;
    let (j, i0) = (0.01, 1.0);
    let name = "Butler-Volmer small-signal linearization";
    match overpotential(j, i0, t, Electrode::Negative) {
        Ok(eta) => {
            let linear = thermal_voltage(t) * j / i0;
            let err = (eta / linear - 1.0).abs();
            Check::new(name, err < 0.01, format!("relative error {err:.2e}"))
        }
        Err(e) => Check::failed(name, e),
    }
}

pub fn run_checks() -> Vec<Check> {
    let mut checks = Vec::new();
    for name in BUNDLED_CELLS {
        match CellParameters::bundled(name) {
            Ok(cell) => {
                checks.push(Check::new(format!("{name}: parameters load"), true, ""));
                checks.push(conservation(&cell));
                checks.push(closure(&cell));
            }
            Err(e) => checks.push(Check::failed(format!("{name}: parameters load"), e)),
        }
    }
    checks.extend([reference_ratios(), special_ratios(), breakdown_sum(), linear_kinetics()]);
    checks
}

pub fn cmd_validate() -> Result<(), CliError> {
    let checks = run_checks();
    for c in &checks {
        println!("{} {}  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}
