//! Residuals against aging data and the two-stage calendar-then-cycling calibration.

use std::collections::BTreeMap;

use cellwear_core::esoh::fresh_state;
use cellwear_core::lifetime::{run_lifetime_from, DayLog, JumpPolicy, LifetimeOptions, LifetimeResult, SimulationMode};
use cellwear_core::params::CellParameters;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{AgingDataset, Condition, Observation, TimeAxis};
use crate::error::FitError;
use crate::parameter::FitParameter;
use crate::solver::{solve, DfoOptions, SolverStatus};

/// Weights on (C_p, C_n, LLI) residuals.
pub const DEFAULT_WEIGHTS: [f64; 3] = [1.0, 1.0, 0.25];
/// Residual entry used when a candidate cannot be simulated.
pub const PENALTY_RESIDUAL: f64 = 10.0;
/// Relative cathode capacity fade in storage data above which dissolution is fitted.
pub const DISSOLUTION_FADE_THRESHOLD: f64 = 0.03;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub weights: [f64; 3],
    /// Fixed extrapolation stride used inside the solver loop; adaptive strides would make the
    /// objective jump as the parameters move.
    pub calendar_stride: u32,
    pub cycling_stride: u32,
    pub dissolution_threshold: f64,
    pub solver: DfoOptions,
    /// Starting values; parameters not listed start at the geometric midpoint of their bounds.
    pub start: BTreeMap<FitParameter, f64>,
    pub bounds: BTreeMap<FitParameter, (f64, f64)>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            weights: DEFAULT_WEIGHTS,
            calendar_stride: 4,
            cycling_stride: 1,
            dissolution_threshold: DISSOLUTION_FADE_THRESHOLD,
            solver: DfoOptions::default(),
            start: BTreeMap::new(),
            bounds: BTreeMap::new(),
        }
    }
}

impl FitOptions {
    fn bounds_of(&self, p: FitParameter) -> (f64, f64) {
        self.bounds.get(&p).copied().unwrap_or_else(|| p.default_bounds())
    }

    fn mode_for(&self, c: &Condition) -> SimulationMode {
        let stride = if c.is_calendar() {
            self.calendar_stride
        } else {
            self.cycling_stride
        };
        if stride == 0 {
            SimulationMode::Exhaustive
        } else {
            SimulationMode::Accelerated(JumpPolicy::Fixed(stride))
        }
    }
}

fn interpolate(logs: &[DayLog], at: f64, key: impl Fn(&DayLog) -> f64) -> Option<DayLog> {
    let i = logs.partition_point(|l| key(l) < at);
    if i == 0 {
        return logs.first().copied();
    }
    let b = logs.get(i)?;
    let a = &logs[i - 1];
    let span = key(b) - key(a);
    let w = if span > 0.0 { (at - key(a)) / span } else { 1.0 };
    let f = |x: f64, y: f64| x + w * (y - x);
    let mut out = *b;
    out.esoh.positive_ah = f(a.esoh.positive_ah, b.esoh.positive_ah);
    out.esoh.negative_ah = f(a.esoh.negative_ah, b.esoh.negative_ah);
    out.lithium = f(a.lithium, b.lithium);
    Some(out)
}

/// Simulate the test condition of `data` with `cell` long enough to cover every observation.
pub fn simulate_dataset(
    cell: &CellParameters,
    data: &AgingDataset,
    mode: SimulationMode,
) -> Result<LifetimeResult, String> {
    let mut p = cell.clone();
    p.temperature = data.condition.temperature();
    let schedule = data.condition.schedule().map_err(|e| e.to_string())?;
    let start = fresh_state(&p, data.condition.start_soc()).map_err(|e| e.to_string())?;
    let last = data.observations.last().map_or(0.0, |o| o.time);
    let days = match data.axis {
        TimeAxis::Days => last.ceil() as u32,
        TimeAxis::CumAh => {
            let probe = LifetimeOptions {
                mode: SimulationMode::Exhaustive,
                stop_day: Some(1),
                eol_fraction: 0.0,
                ..LifetimeOptions::default()
            };
            let one = run_lifetime_from(&p, &schedule, start.clone(), &probe).map_err(|e| e.to_string())?;
            let per_day = one.logs.last().map_or(0.0, |l| l.throughput_ah);
            if !(per_day > 0.0) {
                return Err("protocol moves no charge".into());
            }
            (1.1 * last / per_day).ceil() as u32 + 1
        }
    };
    let opts = LifetimeOptions {
        mode,
        stop_day: Some(days.max(1)),
        eol_fraction: 0.0,
        ..LifetimeOptions::default()
    };
    run_lifetime_from(&p, &schedule, start, &opts).map_err(|e| e.to_string())
}

/// Simulated (C_p, C_n, LLI) at each observation of `data`.
pub fn predict(result: &LifetimeResult, data: &AgingDataset) -> Result<Vec<Observation>, String> {
    let all: Vec<DayLog> = std::iter::once(result.initial)
        .chain(result.logs.iter().copied())
        .collect();
    data.observations
        .iter()
        .map(|o| {
            let log = match data.axis {
                TimeAxis::Days => interpolate(&all, o.time, |l| l.day as f64),
                TimeAxis::CumAh => interpolate(&all, o.time, |l| l.throughput_ah),
            }
            .ok_or_else(|| format!("simulation ended before observation at {}", o.time))?;
            Ok(Observation {
                time: o.time,
                c_p_ah: log.esoh.positive_ah,
                c_n_ah: log.esoh.negative_ah,
                lli: (result.initial_lithium - log.lithium) / result.initial_lithium,
            })
        })
        .collect()
}

/// Weighted residuals `sqrt(w) (observed - simulated)` with capacities over nominal capacity.
pub fn weighted_residuals(
    observed: &[Observation],
    simulated: &[Observation],
    nominal_ah: f64,
    w: [f64; 3],
) -> Vec<f64> {
    let s = w.map(f64::sqrt);
    observed
        .iter()
        .zip(simulated)
        .flat_map(|(o, m)| {
            [
                s[0] * (o.c_p_ah - m.c_p_ah) / nominal_ah,
                s[1] * (o.c_n_ah - m.c_n_ah) / nominal_ah,
                s[2] * (o.lli - m.lli),
            ]
        })
        .collect()
}

fn dataset_residuals(cell: &CellParameters, data: &AgingDataset, mode: SimulationMode, w: [f64; 3]) -> Vec<f64> {
    let sim = simulate_dataset(cell, data, mode).and_then(|r| predict(&r, data));
    match sim {
        Ok(pred) => weighted_residuals(&data.observations, &pred, cell.nominal_capacity_ah, w),
        Err(e) => {
            log::warn!("simulation failed for {}: {e}", data.file_name());
            vec![PENALTY_RESIDUAL; 3 * data.observations.len()]
        }
    }
}

/// Residual vector over all datasets, evaluated in parallel but assembled in dataset order.
pub fn residuals(cell: &CellParameters, datasets: &[AgingDataset], opts: &FitOptions, exhaustive: bool) -> Vec<f64> {
    datasets
        .par_iter()
        .map(|d| {
            let mode = if exhaustive {
                SimulationMode::Exhaustive
            } else {
                opts.mode_for(&d.condition)
            };
            dataset_residuals(cell, d, mode, opts.weights)
        })
        .collect::<Vec<_>>()
        .concat()
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// Residual norm of the optimum with the fixed-stride simulation used by the solver.
    pub accelerated_norm: f64,
    pub exhaustive_norm: f64,
    /// Largest difference between the two residual vectors.
    pub max_residual_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub datasets: usize,
    pub parameters: BTreeMap<FitParameter, f64>,
    pub start: BTreeMap<FitParameter, f64>,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub evaluations: usize,
    pub status: SolverStatus,
    pub verification: Verification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub cell: String,
    /// Largest relative cathode capacity fade seen in storage data.
    pub calendar_cathode_fade: f64,
    pub dissolution_fitted: bool,
    pub stages: Vec<StageReport>,
}

impl FitReport {
    pub fn fitted(&self) -> BTreeMap<FitParameter, f64> {
        self.stages.iter().flat_map(|s| s.parameters.clone()).collect()
    }
}

/// Largest relative drop of C_p between first and last observation across storage datasets.
pub fn calendar_cathode_fade(datasets: &[AgingDataset]) -> f64 {
    datasets
        .iter()
        .filter(|d| d.condition.is_calendar())
        .filter_map(|d| {
            let first = d.observations.first()?;
            let last = d.observations.last()?;
            Some((first.c_p_ah - last.c_p_ah) / first.c_p_ah)
        })
        .fold(0.0, f64::max)
}

/// Fit `free` against `datasets`, all other parameters taken from `cell`.
pub fn fit_stage(
    stage: &'static str,
    cell: &CellParameters,
    datasets: &[AgingDataset],
    free: &[FitParameter],
    opts: &FitOptions,
) -> Result<(CellParameters, StageReport), FitError> {
    let bounds: Vec<(f64, f64)> = free
        .iter()
        .map(|&p| {
            let (lo, hi) = opts.bounds_of(p);
            (p.to_solver(lo), p.to_solver(hi))
        })
        .collect();
    if let Some((i, _)) = bounds
        .iter()
        .enumerate()
        .find(|(_, (lo, hi))| !(lo.is_finite() && hi.is_finite() && lo < hi))
    {
        return Err(FitError::Setup {
            stage,
            reason: format!("invalid bounds for {}", free[i]),
        });
    }
    let start: BTreeMap<FitParameter, f64> = free
        .iter()
        .map(|&p| (p, opts.start.get(&p).copied().unwrap_or_else(|| p.midpoint())))
        .collect();
    let x0: Vec<f64> = free
        .iter()
        .zip(&bounds)
        .map(|(p, &(lo, hi))| p.to_solver(start[p]).clamp(lo, hi))
        .collect();
    let apply = |u: &[f64]| {
        let mut c = cell.clone();
        for (p, &v) in free.iter().zip(u) {
            p.set(&mut c, p.from_solver(v));
        }
        c
    };
    let (lower, upper): (Vec<f64>, Vec<f64>) = bounds.iter().copied().unzip();
    let mut initial_norm = None;
    let result = solve(
        |u: &[f64]| {
            let r = residuals(&apply(u), datasets, opts, false);
            initial_norm.get_or_insert(norm(&r));
            log::debug!("{stage}: {:?} -> {:.6e}", u, norm(&r));
            r
        },
        &x0,
        &lower,
        &upper,
        &opts.solver,
    )
    .map_err(|source| FitError::Solver { stage, source })?;
    if result.status == SolverStatus::MaxEvals {
        log::warn!("{stage}: evaluation budget exhausted before the trust region converged");
    }
    let fitted = apply(&result.x);
    let exhaustive = residuals(&fitted, datasets, opts, true);
    if exhaustive.iter().all(|&v| v == PENALTY_RESIDUAL) {
        return Err(FitError::Verification {
            stage,
            reason: "exhaustive simulation of the optimum failed".into(),
        });
    }
    let verification = Verification {
        accelerated_norm: result.residual_norm(),
        exhaustive_norm: norm(&exhaustive),
        max_residual_delta: exhaustive
            .iter()
            .zip(&result.residuals)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
    };
    let report = StageReport {
        stage: stage.to_string(),
        datasets: datasets.len(),
        parameters: free.iter().map(|&p| (p, p.get(&fitted))).collect(),
        start,
        initial_norm: initial_norm.unwrap_or(f64::NAN),
        final_norm: result.residual_norm(),
        evaluations: result.evals,
        status: result.status,
        verification,
    };
    Ok((fitted, report))
}

/// Stage 1 fits SEI (and dissolution when storage data shows cathode fade) on calendar data;
/// stage 2 fixes those and fits plating and cracking on cycling data.
pub fn fit_pipeline(
    base: &CellParameters,
    datasets: &[AgingDataset],
    opts: &FitOptions,
) -> Result<(CellParameters, FitReport), FitError> {
    let (calendar, cycling): (Vec<AgingDataset>, Vec<AgingDataset>) =
        datasets.iter().cloned().partition(|d| d.condition.is_calendar());
    if calendar.is_empty() {
        return Err(FitError::NoCalendarData);
    }
    if cycling.is_empty() {
        return Err(FitError::NoCyclingData);
    }
    let fade = calendar_cathode_fade(&calendar);
    let dissolution = fade > opts.dissolution_threshold;
    let mut cell = base.clone();
    let mut stage1: Vec<FitParameter> = vec![FitParameter::SeiRate, FitParameter::SeiDiffusivity];
    if dissolution {
        stage1.push(FitParameter::DissolutionCurrent);
    } else {
        cell.dissolution.exchange_current = 0.0;
    }
    let (cell, s1) = fit_stage("stage1", &cell, &calendar, &stage1, opts)?;
    let (cell, s2) = fit_stage("stage2", &cell, &cycling, &FitParameter::CYCLING, opts)?;
    let mut s1 = s1;
    if !dissolution {
        s1.parameters.insert(FitParameter::DissolutionCurrent, 0.0);
    }
    Ok((
        cell,
        FitReport {
            cell: base.name.clone(),
            calendar_cathode_fade: fade,
            dissolution_fitted: dissolution,
            stages: vec![s1, s2],
        },
    ))
}

/// A test condition with its duration and reference-test spacing, in days.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    pub condition: Condition,
    pub days: u32,
    pub rpt_every: u32,
}

/// Two years of storage at full and half charge with monthly checkups, plus three 80-day
/// cycling protocols with daily checkups that separate plating, the two crack coefficients and
/// the crack exponent. Sparser cycling checkups leave the crack parameters trading off
/// against each other inside 1% measurement noise.
pub fn reference_protocols(temperature_k: f64) -> Vec<Protocol> {
    let cal = |soc| Protocol {
        condition: Condition::Calendar { soc, temperature_k },
        days: 720,
        rpt_every: 30,
    };
    let cyc = |c, d, dod| Protocol {
        condition: Condition::Cycling {
            charge_c_rate: c,
            discharge_c_rate: d,
            dod,
            temperature_k,
        },
        days: 80,
        rpt_every: 1,
    };
    vec![
        cal(1.0),
        cal(0.5),
        cyc(0.5, 1.0, 0.8),
        cyc(1.0, 0.5, 0.8),
        cyc(0.5, 2.0, 0.5),
    ]
}

/// Observations simulated exhaustively from `truth` with relative Gaussian noise of size `noise`.
pub fn synthesize(
    cell_name: &str,
    truth: &CellParameters,
    protocols: &[Protocol],
    noise: f64,
    seed: u64,
) -> Result<Vec<AgingDataset>, String> {
    let clean: Vec<AgingDataset> = protocols
        .par_iter()
        .map(|pr| {
            let times: Vec<f64> = (0..=pr.days / pr.rpt_every)
                .map(|i| (i * pr.rpt_every) as f64)
                .collect();
            let mut d = AgingDataset {
                cell: cell_name.to_string(),
                condition: pr.condition,
                axis: TimeAxis::Days,
                observations: times
                    .iter()
                    .map(|&t| Observation {
                        time: t,
                        c_p_ah: 1.0,
                        c_n_ah: 1.0,
                        lli: 0.0,
                    })
                    .collect(),
            };
            let r = simulate_dataset(truth, &d, SimulationMode::Exhaustive)?;
            d.observations = predict(&r, &d)?;
            Ok(d)
        })
        .collect::<Result<_, String>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, noise).map_err(|e| e.to_string())?;
    Ok(clean
        .into_iter()
        .map(|mut d| {
            for o in &mut d.observations {
                o.c_p_ah *= 1.0 + z.sample(&mut rng);
                o.c_n_ah *= 1.0 + z.sample(&mut rng);
                o.lli = (o.lli * (1.0 + z.sample(&mut rng))).clamp(0.0, 1.0);
            }
            d
        })
        .collect())
}
