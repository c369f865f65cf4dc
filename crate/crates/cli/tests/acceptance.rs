//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use cellwear_cli::fixtures::{reference_summaries, REFERENCE_LIVES};
use cellwear_core::constants::{thermal_voltage, FARADAY};
use cellwear_core::degradation::Mechanisms;
use cellwear_core::duty::{bol_day, build_schedule, DriveVariant, Scenario};
use cellwear_core::kinetics::overpotential;
use cellwear_core::lifetime::{run_lifetime, LifetimeOptions, LifetimeResult, SimulationMode};
use cellwear_core::metrics::{compare_runs, trend_report, LliBreakdown, RunSummary, Tvd, TvdResult};
use cellwear_core::params::CellParameters;
use cellwear_core::particle::{DiffusionScratch, ShellGrid};
use cellwear_core::state::Electrode;
use cellwear_fit::parameter::{FitParameter, Scale};
use cellwear_fit::pipeline::{fit_pipeline, reference_protocols, synthesize, FitOptions};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

const CELLS: [&str; 3] = ["nmc111", "nmc622_25c", "nmc622_45c"];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

struct Run {
    drive: DriveVariant,
    scenario: Scenario,
    result: Result<LifetimeResult, String>,
}

impl Run {
    fn summary(&self) -> Option<RunSummary> {
        let r = self.result.as_ref().ok()?;
        RunSummary::from_result(r, self.drive.name(), "accelerated").ok()
    }
}

struct Grid {
    runs: Vec<Run>,
    elapsed: Duration,
}

fn cell(name: &str) -> CellParameters {
    CellParameters::bundled(name).expect("bundled cell")
}

fn lifetime(
    cell: &CellParameters,
    drive: DriveVariant,
    scenario: Scenario,
    opts: &LifetimeOptions,
) -> Result<LifetimeResult, String> {
    let schedule = build_schedule(scenario, drive.profile(), cell).map_err(|e| e.to_string())?;
    run_lifetime(cell, &schedule, opts).map_err(|e| e.to_string())
}

fn run_grid() -> Grid {
    let start = Instant::now();
    let mut jobs = Vec::new();
    for name in CELLS {
        for drive in DriveVariant::ALL {
            for scenario in Scenario::ALL {
                jobs.push((name, drive, scenario));
            }
        }
    }
    let runs = jobs
        .par_iter()
        .map(|&(name, drive, scenario)| Run {
            drive,
            scenario,
            result: lifetime(&cell(name), drive, scenario, &LifetimeOptions::default()),
        })
        .collect();
    Grid {
        runs,
        elapsed: start.elapsed(),
    }
}

fn ledger_closure(grid: &Grid) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut days = 0;
    for run in &grid.runs {
        match &run.result {
            Ok(r) => {
                let n0 = r.initial_lithium;
                for log in &r.logs {
                    let gap = ((n0 - log.lithium) - log.lli.total()).abs() / n0;
                    worst = worst.max(gap);
                    days += 1;
                }
            }
            Err(e) => failures.push(format!("{} {}: {e}", run.drive, run.scenario)),
        }
    }
    let in_time = grid.elapsed < Duration::from_secs(15 * 60);
    outcome(
        failures.is_empty() && worst < 1e-6 && in_time,
        format!(
            "{} runs, {days} logged days, max |LLI - sum| = {worst:.2e}, {} failed, grid time {:.0} s",
            grid.runs.len(),
            failures.len(),
            grid.elapsed.as_secs_f64()
        ),
    )
}

fn conservation() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in CELLS {
        let opts = LifetimeOptions {
            mode: SimulationMode::Exhaustive,
            mechanisms: Mechanisms::none(),
            stop_day: Some(100),
            ..LifetimeOptions::default()
        };
        match lifetime(&cell(name), DriveVariant::Long, Scenario::V2gModerate, &opts) {
            Ok(r) if r.final_day() == 100 => {
                for log in &r.logs {
                    worst = worst.max((log.lithium - r.initial_lithium).abs() / r.initial_lithium);
                }
            }
            Ok(r) => return outcome(false, format!("{name} stopped at day {}", r.final_day())),
            Err(e) => return outcome(false, format!("{name}: {e}")),
        }
    }
    outcome(
        worst < 1e-8,
        format!("max relative n_Li drift over 100 days {worst:.2e}"),
    )
}

fn tvd_oracle() -> Outcome {
    let report = match compare_runs(&reference_summaries(), "no_v2g") {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, bd, bt, vd, vt, expected) in REFERENCE_LIVES {
        // independent arithmetic: relative throughput gained over relative days lost
        let oracle = ((vt - bt) / bt) / ((bd - vd) / bd);
        let got = report
            .entries
            .iter()
            .find(|e| e.cell == name)
            .map(|e| e.charge.tvd.value());
        let within = got.is_some_and(|v| (v / expected - 1.0).abs() < 0.01 && (v / oracle - 1.0).abs() < 1e-12);
        ok &= within;
        parts.push(format!("{name} {:.3}", got.unwrap_or(f64::NAN)));
    }
    let special = TvdResult::new(-0.05, 0.3).tvd == Tvd::Zero && TvdResult::new(0.2, -0.1).tvd == Tvd::Infinite;
    parts.push(format!("special cases {}", if special { "exact" } else { "wrong" }));
    outcome(ok && special, parts.join(", "))
}

/// TvD and calendar share keyed by (cell, drive, scenario).
type Ratios = BTreeMap<(String, String, String), (Tvd, f64)>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn grid_ratios(grid: &Grid) -> Result<Ratios, String> {
    let summaries: Vec<RunSummary> = grid.runs.iter().filter_map(Run::summary).collect();
    let report = compare_runs(&summaries, "no_v2g").map_err(|e| e.to_string())?;
    Ok(report
        .entries
        .into_iter()
        .map(|e| ((e.cell, e.drive, e.scenario), (e.charge.tvd, e.cal_fraction)))
        .collect())
}

fn family_name(name: &str) -> String {
    cell(name).name
}

fn orderings(grid: &Grid) -> Outcome {
    let ratios = match grid_ratios(grid) {
        Ok(r) => r,
        Err(e) => return outcome(false, e),
    };
    let get = |c: &str, s: Scenario| {
        ratios
            .get(&(family_name(c), "long".to_string(), s.name().to_string()))
            .map_or(f64::NAN, |(t, _)| t.value())
    };
    let moderate: Vec<f64> = CELLS.iter().map(|c| get(c, Scenario::V2gModerate)).collect();
    let mut ok = moderate[2] > moderate[1] && moderate[1] > moderate[0];
    let mut parts = vec![format!(
        "moderate 45C {:.3} > 25C {:.3} > 111 {:.3}",
        moderate[2], moderate[1], moderate[0]
    )];
    for c in CELLS {
        let (late, mid, early) = (
            get(c, Scenario::V2gLate),
            get(c, Scenario::V2gModerate),
            get(c, Scenario::V2gEarly),
        );
        ok &= late > mid && mid > early;
        parts.push(format!("{c} late {late:.3} > moderate {mid:.3} > early {early:.3}"));
    }
    // reported against the published days and throughput, not gated
    let summaries: Vec<RunSummary> = grid.runs.iter().filter_map(Run::summary).collect();
    for (c, bd, bt, vd, vt, _) in REFERENCE_LIVES {
        for (scenario, days, thr) in [("no_v2g", bd, bt), ("v2g_moderate", vd, vt)] {
            if let Some(s) = summaries
                .iter()
                .find(|s| s.cell == c && s.drive == "long" && s.scenario == scenario)
            {
                parts.push(format!(
                    "{c} {scenario} days {:+.0}% throughput {:+.0}%",
                    100.0 * (s.days / days - 1.0),
                    100.0 * (s.normalized_throughput / thr - 1.0)
                ));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

fn trend(grid: &Grid) -> Outcome {
    let ratios = match grid_ratios(grid) {
        Ok(r) => r,
        Err(e) => return outcome(false, e),
    };
    let mut points = Vec::new();
    for c in CELLS {
        let keys = [
            ("long", Scenario::V2gModerate),
            ("long", Scenario::V2gEarly),
            ("long", Scenario::V2gLate),
            ("short", Scenario::V2gModerate),
        ];
        for (drive, s) in keys {
            if let Some(&(tvd, cal)) = ratios.get(&(family_name(c), drive.to_string(), s.name().to_string())) {
                points.push(cellwear_core::metrics::TrendPoint {
                    cell: family_name(c),
                    scenario: s.name().into(),
                    drive: drive.into(),
                    cal_fraction: cal,
                    tvd,
                });
            }
        }
    }
    let n = points.len();
    match trend_report(points) {
        Ok(t) => {
            let rho = t.spearman.unwrap_or(f64::NAN);
            outcome(
                n == 12 && rho > 0.8,
                format!("{n} points ({} finite), spearman {rho:.3}", t.points.len()),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn anchors() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in CELLS {
        let c = cell(name);
        let profile = DriveVariant::Long.profile();
        let day = |s: Scenario| {
            build_schedule(s, profile.clone(), &c)
                .map_err(|e| e.to_string())
                .and_then(|sch| bol_day(&c, &sch).map_err(|e| e.to_string()))
        };
        let checks = [
            (Scenario::NoV2g, "avg", 0.79),
            (Scenario::NoV2g, "min", 0.73),
            (Scenario::V2gModerate, "avg", 0.79),
            (Scenario::V2gModerate, "min", 0.49),
            (Scenario::V2gEarly, "avg", 0.88),
            (Scenario::V2gLate, "avg", 0.61),
        ];
        let mut line = Vec::new();
        for (s, what, target) in checks {
            match day(s) {
                Ok(rec) => {
                    let v = if what == "avg" { rec.soc_mean } else { rec.soc_min };
                    let hit = (v - target).abs() <= 0.01;
                    ok &= hit;
                    line.push(format!("{} {what} {v:.3}{}", s.name(), if hit { "" } else { "(!)" }));
                }
                Err(e) => {
                    ok = false;
                    line.push(format!("{}: {e}", s.name()));
                }
            }
        }
        parts.push(format!("{name}: {}", line.join(" ")));
    }
    outcome(ok, parts.join("; "))
}

fn acceleration() -> Outcome {
    let cases = [("nmc111", Scenario::V2gModerate), ("nmc622_45c", Scenario::NoV2g)];
    let results: Vec<Result<String, String>> = cases
        .par_iter()
        .map(|&(name, scenario)| {
            let c = cell(name);
            let exhaustive = LifetimeOptions {
                mode: SimulationMode::Exhaustive,
                ..LifetimeOptions::default()
            };
            let ex = lifetime(&c, DriveVariant::Long, scenario, &exhaustive)?;
            let ac = lifetime(&c, DriveVariant::Long, scenario, &LifetimeOptions::default())?;
            let (Some(e1), Some(e2)) = (ex.eol, ac.eol) else {
                return Err(format!("{name} {scenario}: no end of life"));
            };
            let eol_err = (e2.day / e1.day - 1.0).abs();
            let traj_err = ex
                .logs
                .iter()
                .filter(|l| l.day <= ac.final_day())
                .map(|l| (ac.capacity_at(l.day as f64) - l.esoh.capacity_ah).abs())
                .fold(0.0, f64::max)
                / c.nominal_capacity_ah;
            let speedup = ex.simulated_days as f64 / ac.simulated_days as f64;
            let detail = format!(
                "{name} {scenario}: EOL {:.1} vs {:.1} ({:.2}%), trajectory {:.3}% C_nom, {speedup:.1}x fewer days",
                e1.day,
                e2.day,
                100.0 * eol_err,
                100.0 * traj_err
            );
            if eol_err < 0.02 && traj_err < 0.005 && speedup >= 10.0 {
                Ok(detail)
            } else {
                Err(detail)
            }
        })
        .collect();
    let ok = results.iter().all(Result::is_ok);
    let detail: Vec<String> = results.into_iter().map(|r| r.unwrap_or_else(|e| e)).collect();
    outcome(ok, detail.join("; "))
}

fn fit_round_trip() -> Outcome {
    let start = Instant::now();
    let truth = cell("nmc622_25c");
    let data = match synthesize(&truth.name, &truth, &reference_protocols(truth.temperature), 0.01, 11) {
        Ok(d) => d,
        Err(e) => return outcome(false, e),
    };
    // starts within a factor 1.5 either way for rates, +-50% for linear parameters
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut opts = FitOptions::default();
    for p in FitParameter::ALL {
        let v = p.get(&truth);
        if v == 0.0 {
            continue;
        }
        let f = match p.scale() {
            Scale::Log10 => 1.5f64.powf(rng.gen_range(-1.0..=1.0)),
            Scale::Linear(_) => 1.0 + rng.gen_range(-0.5..=0.5),
        };
        let (lo, hi) = p.default_bounds();
        opts.start.insert(p, (v * f).clamp(lo, hi));
    }
    let mut base = truth.clone();
    base.dissolution.exchange_current = FitParameter::DissolutionCurrent.magnitude();
    let (_, report) = match fit_pipeline(&base, &data, &opts) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let fitted = report.fitted();
    let mut ok = !report.dissolution_fitted && fitted.get(&FitParameter::DissolutionCurrent) == Some(&0.0);
    let mut parts = vec![format!(
        "i0_diss pinned at {:?}",
        fitted.get(&FitParameter::DissolutionCurrent)
    )];
    for p in FitParameter::ALL
        .into_iter()
        .filter(|&p| p != FitParameter::DissolutionCurrent)
    {
        let err = fitted.get(&p).map_or(f64::NAN, |v| v / p.get(&truth) - 1.0);
        ok &= err.abs() < 0.10;
        parts.push(format!("{p} {:+.1}%", 100.0 * err));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(20 * 60);
    parts.push(format!("{:.0} s", elapsed.as_secs_f64()));
    outcome(ok, parts.join(", "))
}

/// Surface concentration once a minute over 30 min of 1C flux.
fn surface_trace(shells: usize, dt: f64, radius: f64, d: f64, flux: f64, c0: f64) -> Vec<f64> {
    let grid = ShellGrid::new(radius, shells);
    let mut c = vec![c0; shells];
    let mut s = DiffusionScratch::default();
    let per_sample = (60.0 / dt).round() as usize;
    (0..30)
        .map(|_| {
            for _ in 0..per_sample {
                grid.advance(&mut c, d, flux, dt, &mut s);
            }
            grid.surface_concentration(&c, d, flux)
        })
        .collect()
}

fn numerical_order() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in CELLS {
        let p = cell(name);
        for (e, sign, fill) in [(&p.negative, 1.0, 0.8), (&p.positive, -1.0, 0.4)] {
            let area = e.specific_area(e.active_fraction);
            let flux = sign * p.one_c() / (FARADAY * p.area * e.thickness * area);
            let c0 = fill * e.max_concentration;
            let coarse = surface_trace(20, 1.0, e.particle_radius, e.diffusivity, flux, c0);
            let fine = surface_trace(40, 0.5, e.particle_radius, e.diffusivity, flux, c0);
            for (a, b) in coarse.iter().zip(&fine) {
                worst = worst.max((a - b).abs() / b);
            }
        }
    }
    let t = 298.15;
    let mut bv: f64 = 0.0;
    for (j, i0) in [(0.01, 1.0), (0.001, 0.5), (-0.02, 3.0)] {
        let eta = overpotential(j, i0, t, Electrode::Negative).unwrap_or(f64::NAN);
        bv = bv.max((eta / (thermal_voltage(t) * j / i0) - 1.0).abs());
    }
    outcome(
        worst < 1e-3 && bv < 0.01,
        format!(
            "refinement change {:.3}%, Butler-Volmer linearization error {:.4}%",
            100.0 * worst,
            100.0 * bv
        ),
    )
}

fn breakdown_fixture() -> Outcome {
    match LliBreakdown::from_components(23.2, 0.6, 4.4, 1.7, 29.9) {
        Ok(b) => {
            let ok = (b.lli_cal - 27.6).abs() < 1e-12 && (b.lli_lam - 6.1).abs() < 1e-12 && b.lli_total == 29.9;
            outcome(
                ok,
                format!(
                    "SEI+diss {:.1}, diss+crack {:.1}, total {:.1}",
                    b.lli_cal, b.lli_lam, b.lli_total
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn main() {
    let grid = run_grid();
    let criteria: Vec<Criterion> = vec![
        ("ledger closure on the full grid", Box::new(|| ledger_closure(&grid))),
        ("lithium conservation with mechanisms off", Box::new(conservation)),
        ("TvD arithmetic oracle", Box::new(tvd_oracle)),
        (
            "TvD orderings across families and charge timing",
            Box::new(|| orderings(&grid)),
        ),
        ("calendar share versus log TvD trend", Box::new(|| trend(&grid))),
        ("beginning-of-life SOC anchors", Box::new(anchors)),
        ("accelerated lifetime agrees with exhaustive", Box::new(acceleration)),
        ("fitting round trip", Box::new(fit_round_trip)),
        ("numerical order checks", Box::new(numerical_order)),
        ("LLI breakdown sum check", Box::new(breakdown_fixture)),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2}: {} {title}: {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
