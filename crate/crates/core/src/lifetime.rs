//! Day-by-day lifetime simulation with optional linear extrapolation of slow states.

use serde::{Deserialize, Serialize};

use crate::cell::CellModel;
use crate::cycler::{Cycler, DayRecord, StepSizes};
use crate::degradation::Mechanisms;
use crate::duty::DutySchedule;
use crate::error::{ExtrapolationError, SimError};
use crate::esoh::{esoh, fresh_state, relax_to_soc, Esoh};
use crate::params::CellParameters;
use crate::state::{CellState, LamLedger, LliLedger};

/// Default capacity-change budget per extrapolation jump, as a fraction of nominal capacity.
pub const DEFAULT_JUMP_TOLERANCE: f64 = 0.02;
pub const MAX_JUMP_DAYS: u32 = 20;
pub const DEFAULT_DAY_CAP: u32 = 3000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpPolicy {
    /// Jump length chosen from the recent capacity fade rate.
    Adaptive { tolerance: f64 },
    /// Always extrapolate this many days after each simulated day.
    Fixed(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimulationMode {
    Exhaustive,
    Accelerated(JumpPolicy),
}

impl SimulationMode {
    pub fn accelerated() -> Self {
        Self::Accelerated(JumpPolicy::Adaptive {
            tolerance: DEFAULT_JUMP_TOLERANCE,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Exhaustive => "exhaustive",
            Self::Accelerated(_) => "accelerated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeOptions {
    pub mode: SimulationMode,
    /// End of life when capacity falls below this fraction of the initial capacity.
    pub eol_fraction: f64,
    pub max_days: u32,
    /// Stop once this day is reached even before end of life.
    pub stop_day: Option<u32>,
    pub steps: StepSizes,
    pub mechanisms: Mechanisms,
}

impl Default for LifetimeOptions {
    fn default() -> Self {
        Self {
            mode: SimulationMode::accelerated(),
            eol_fraction: 0.7,
            max_days: DEFAULT_DAY_CAP,
            stop_day: None,
            steps: StepSizes::default(),
            mechanisms: Mechanisms::all(),
        }
    }
}

/// Cell condition at the end of a day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayLog {
    pub day: u32,
    /// False for days reached by extrapolation (and for day 0).
    pub simulated: bool,
    pub esoh: Esoh,
    /// Cumulative lithium lost per mechanism, mol.
    pub lli: LliLedger,
    pub lam: LamLedger,
    /// Cyclable lithium, mol.
    pub lithium: f64,
    pub throughput_ah: f64,
    pub throughput_wh: f64,
    pub soc_min: f64,
    pub soc_mean: f64,
    pub soc_max: f64,
}

impl DayLog {
    fn with_soc_stats(self, from: &DayLog) -> DayLog {
        DayLog {
            soc_min: from.soc_min,
            soc_mean: from.soc_mean,
            soc_max: from.soc_max,
            ..self
        }
    }

    fn lerp(a: &DayLog, b: &DayLog, w: f64) -> DayLog {
        let f = |x: f64, y: f64| x + w * (y - x);
        DayLog {
            day: b.day,
            simulated: false,
            esoh: Esoh {
                negative_ah: f(a.esoh.negative_ah, b.esoh.negative_ah),
                positive_ah: f(a.esoh.positive_ah, b.esoh.positive_ah),
                lithium_ah: f(a.esoh.lithium_ah, b.esoh.lithium_ah),
                window: b.esoh.window,
                capacity_ah: f(a.esoh.capacity_ah, b.esoh.capacity_ah),
            },
            lli: a.lli + (b.lli - a.lli) * w,
            lam: a.lam + (b.lam - a.lam) * w,
            lithium: f(a.lithium, b.lithium),
            throughput_ah: f(a.throughput_ah, b.throughput_ah),
            throughput_wh: f(a.throughput_wh, b.throughput_wh),
            soc_min: b.soc_min,
            soc_mean: b.soc_mean,
            soc_max: b.soc_max,
        }
    }
}

/// Condition at the (interpolated) end-of-life crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EolRecord {
    pub day: f64,
    pub state: DayLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    EndOfLife,
    /// Day cap reached before end of life.
    Censored,
    /// Requested stop day reached.
    StopDay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeResult {
    pub cell: String,
    pub label: String,
    pub nominal_capacity_ah: f64,
    pub initial_lithium: f64,
    pub initial: DayLog,
    pub logs: Vec<DayLog>,
    pub eol: Option<EolRecord>,
    pub termination: Termination,
    pub simulated_days: u32,
}

impl LifetimeResult {
    pub fn final_day(&self) -> u32 {
        self.logs.last().map_or(0, |l| l.day)
    }

    /// Capacity (Ah) at fractional day `t`, interpolated linearly between logs.
    pub fn capacity_at(&self, t: f64) -> f64 {
        self.sample(t, |l| l.esoh.capacity_ah)
    }

    /// Linear interpolation of a logged quantity at fractional day `t`.
    pub fn sample(&self, t: f64, f: impl Fn(&DayLog) -> f64) -> f64 {
        let i = self.logs.partition_point(|l| (l.day as f64) < t);
        if i == 0 {
            return f(&self.logs[0]);
        }
        if i >= self.logs.len() {
            return f(&self.logs[self.logs.len() - 1]);
        }
        let (a, b) = (&self.logs[i - 1], &self.logs[i]);
        let w = (t - a.day as f64) / (b.day - a.day) as f64;
        f(a) + w * (f(b) - f(a))
    }
}

/// Per-day change of the slow states over the last simulated day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DaySlopes {
    pub sei_thickness: f64,
    pub plated_thickness: f64,
    pub negative_fraction: f64,
    pub positive_fraction: f64,
    pub lli: LliLedger,
    pub lam: LamLedger,
    pub throughput_ah: f64,
    pub throughput_wh: f64,
}

impl DaySlopes {
    pub fn between(before: &CellState, after: &CellState) -> Self {
        Self {
            sei_thickness: after.sei_thickness - before.sei_thickness,
            plated_thickness: after.plated_thickness - before.plated_thickness,
            negative_fraction: after.negative.active_fraction - before.negative.active_fraction,
            positive_fraction: after.positive.active_fraction - before.positive.active_fraction,
            lli: after.lli - before.lli,
            lam: after.lam - before.lam,
            throughput_ah: after.throughput_ah - before.throughput_ah,
            throughput_wh: after.throughput_wh - before.throughput_wh,
        }
    }

    fn combine(&self, other: &Self, a: f64, b: f64) -> Self {
        Self {
            sei_thickness: a * self.sei_thickness + b * other.sei_thickness,
            plated_thickness: a * self.plated_thickness + b * other.plated_thickness,
            negative_fraction: a * self.negative_fraction + b * other.negative_fraction,
            positive_fraction: a * self.positive_fraction + b * other.positive_fraction,
            lli: self.lli * a + other.lli * b,
            lam: self.lam * a + other.lam * b,
            throughput_ah: a * self.throughput_ah + b * other.throughput_ah,
            throughput_wh: a * self.throughput_wh + b * other.throughput_wh,
        }
    }
}

/// Number of days to extrapolate so the capacity moves by at most `tolerance * nominal`,
/// judged from the fade rate between the last two logs; clamped to [1, 20].
pub fn choose_jump(logs: &[DayLog], tolerance: f64, nominal_capacity_ah: f64) -> u32 {
    let [.., a, b] = logs else {
        return 1;
    };
    let span = b.day.saturating_sub(a.day).max(1) as f64;
    let rate = (b.esoh.capacity_ah - a.esoh.capacity_ah).abs() / span;
    let budget = tolerance * nominal_capacity_ah;
    if rate <= budget / MAX_JUMP_DAYS as f64 {
        return MAX_JUMP_DAYS;
    }
    ((budget / rate).floor() as u32).clamp(1, MAX_JUMP_DAYS)
}

/// Advance slow states by `days` times the per-day slopes and re-seat the particles uniformly at
/// `soc`, with lithium set by the ledger so that closure holds exactly.
pub fn extrapolate(
    state: &CellState,
    p: &CellParameters,
    slopes: &DaySlopes,
    days: u32,
    soc: f64,
) -> Result<CellState, ExtrapolationError> {
    shift(state, p, slopes, days as f64, soc)
}

fn shift(
    state: &CellState,
    p: &CellParameters,
    slopes: &DaySlopes,
    k: f64,
    soc: f64,
) -> Result<CellState, ExtrapolationError> {
    let mut s = state.clone();
    s.sei_thickness += k * slopes.sei_thickness;
    s.plated_thickness += k * slopes.plated_thickness;
    s.negative.active_fraction += k * slopes.negative_fraction;
    s.positive.active_fraction += k * slopes.positive_fraction;
    s.lli += slopes.lli * k;
    s.lam = s.lam + slopes.lam * k;
    s.throughput_ah += k * slopes.throughput_ah;
    s.throughput_wh += k * slopes.throughput_wh;
    if !(s.negative.active_fraction > 0.0 && s.negative.active_fraction <= p.negative.active_fraction) {
        return Err(ExtrapolationError::OutOfRange("negative active fraction"));
    }
    if !(s.positive.active_fraction > 0.0 && s.positive.active_fraction <= p.positive.active_fraction) {
        return Err(ExtrapolationError::OutOfRange("positive active fraction"));
    }
    if !(s.sei_thickness > 0.0 && s.plated_thickness >= 0.0) {
        return Err(ExtrapolationError::OutOfRange("film thickness"));
    }
    let l = &s.lli;
    if l.sei < 0.0 || l.plating < 0.0 || l.dissolution < 0.0 || l.crack < 0.0 {
        return Err(ExtrapolationError::OutOfRange("lithium ledger"));
    }
    let lithium = s.initial_lithium - s.lli.total();
    if !(lithium > 0.0) {
        return Err(ExtrapolationError::OutOfRange("cyclable lithium"));
    }
    relax_to_soc(&mut s, p, lithium, soc.clamp(0.0, 1.0))?;
    Ok(s)
}

fn negative_stoichiometry(state: &CellState, p: &CellParameters) -> f64 {
    state.negative.average_stoichiometry(&p.negative)
}

fn log_state(
    day: u32,
    simulated: bool,
    state: &CellState,
    p: &CellParameters,
    rec: Option<&DayRecord>,
) -> Result<DayLog, SimError> {
    let e = esoh(state, p)?;
    let (lo, mean, hi) = rec.map_or((f64::NAN, f64::NAN, f64::NAN), |r| (r.soc_min, r.soc_mean, r.soc_max));
    Ok(DayLog {
        day,
        simulated,
        esoh: e,
        lli: state.lli,
        lam: state.lam,
        lithium: state.cyclable_lithium(p),
        throughput_ah: state.throughput_ah,
        throughput_wh: state.throughput_wh,
        soc_min: lo,
        soc_mean: mean,
        soc_max: hi,
    })
}

/// Run a fresh cell, fully charged at the start of day 1, through `schedule` until end of life.
pub fn run_lifetime(
    cell: &CellParameters,
    schedule: &DutySchedule,
    opts: &LifetimeOptions,
) -> Result<LifetimeResult, SimError> {
    let state = fresh_state(cell, 1.0)?;
    run_lifetime_from(cell, schedule, state, opts)
}

pub fn run_lifetime_from(
    cell: &CellParameters,
    schedule: &DutySchedule,
    mut state: CellState,
    opts: &LifetimeOptions,
) -> Result<LifetimeResult, SimError> {
    let mut model = CellModel::new(cell.clone(), opts.mechanisms);
    let initial = log_state(0, false, &state, cell, None)?;
    let eol_capacity = opts.eol_fraction * initial.esoh.capacity_ah;
    let mut logs = vec![initial];
    let mut day = 0u32;
    let mut simulated_days = 0u32;
    let limit = opts.stop_day.map_or(opts.max_days, |s| s.min(opts.max_days));
    let mut eol = None;

    let crossing = |logs: &[DayLog]| -> Option<EolRecord> {
        let [.., a, b] = logs else { return None };
        if b.esoh.capacity_ah >= eol_capacity {
            return None;
        }
        let w = (a.esoh.capacity_ah - eol_capacity) / (a.esoh.capacity_ah - b.esoh.capacity_ah);
        Some(EolRecord {
            day: a.day as f64 + w * (b.day - a.day) as f64,
            state: DayLog::lerp(a, b, w),
        })
    };

    // slopes and length of the last jump, awaiting the trapezoidal correction
    let mut pending: Option<(DaySlopes, u32)> = None;

    while day < limit {
        let before = state.clone();
        let rec = Cycler::new(&mut model, opts.steps).run_day(&mut state, schedule, false)?;
        day += 1;
        simulated_days += 1;
        let slopes = DaySlopes::between(&before, &state);
        let x_rate = negative_stoichiometry(&state, cell) - negative_stoichiometry(&before, cell);
        if let Some((jump_slopes, k)) = pending.take() {
            // the jump used the slope at its start; average it with the slope found at its end
            let half = 0.5 * k as f64;
            let corr = slopes.combine(&jump_slopes, half, -half);
            let fixed = shift(&before, cell, &corr, 1.0, rec.start_soc)
                .and_then(|b| Ok((b, shift(&state, cell, &corr, 1.0, rec.end_soc)?)));
            match fixed {
                Ok((b, s)) => {
                    let prev = logs.len() - 1;
                    logs[prev] = DayLog {
                        simulated: false,
                        ..log_state(logs[prev].day, false, &b, cell, None)?
                    }
                    .with_soc_stats(&logs[prev]);
                    state = s;
                }
                Err(e) => log::debug!("jump correction skipped: {e}"),
            }
        }
        logs.push(log_state(day, true, &state, cell, Some(&rec))?);
        if let Some(e) = crossing(&logs) {
            eol = Some(e);
            break;
        }
        let SimulationMode::Accelerated(policy) = opts.mode else {
            continue;
        };
        let mut k = match policy {
            JumpPolicy::Adaptive { tolerance } => choose_jump(&logs, tolerance, cell.nominal_capacity_ah),
            JumpPolicy::Fixed(k) => k,
        };
        k = k.min(limit - day);
        // stay short of the end-of-life crossing so it is resolved by simulated days
        let last = &logs[logs.len() - 1];
        let fade = logs[logs.len() - 2].esoh.capacity_ah - last.esoh.capacity_ah;
        if fade > 0.0 {
            let days_left = ((last.esoh.capacity_ah - eol_capacity) / fade).floor();
            k = k.min(days_left.max(0.0) as u32);
        }
        if matches!(policy, JumpPolicy::Adaptive { .. }) && k < 2 {
            continue;
        }
        while k >= 1 {
            // the negative electrode keeps the lithiation drift it had over the simulated day
            let x_target = negative_stoichiometry(&state, cell) + k as f64 * x_rate;
            let jumped = extrapolate(&state, cell, &slopes, k, rec.end_soc).and_then(|mut s| {
                let w = esoh(&s, cell)?.window;
                let soc = ((x_target - w.x0) / (w.x100 - w.x0)).clamp(0.0, 1.0);
                let lithium = s.cyclable_lithium(cell);
                relax_to_soc(&mut s, cell, lithium, soc)?;
                Ok(s)
            });
            match jumped {
                Ok(s) => {
                    state = s;
                    day += k;
                    pending = Some((slopes, k));
                    logs.push(DayLog {
                        soc_min: rec.soc_min,
                        soc_mean: rec.soc_mean,
                        soc_max: rec.soc_max,
                        ..log_state(day, false, &state, cell, None)?
                    });
                    break;
                }
                Err(e) => {
                    log::debug!("extrapolation by {k} days rejected: {e}");
                    k /= 2;
                }
            }
        }
        if let Some(e) = crossing(&logs) {
            eol = Some(e);
            break;
        }
    }
    let termination = if eol.is_some() {
        Termination::EndOfLife
    } else if opts.stop_day.is_some_and(|s| day >= s) {
        Termination::StopDay
    } else {
        Termination::Censored
    };
    Ok(LifetimeResult {
        cell: cell.name.clone(),
        label: schedule.label.clone(),
        nominal_capacity_ah: cell.nominal_capacity_ah,
        initial_lithium: logs[0].lithium,
        initial: logs[0],
        logs,
        eol,
        termination,
        simulated_days,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duty::{build_schedule, DriveVariant, Scenario};
    use crate::esoh::fresh_state;

    fn log(day: u32, cap: f64) -> DayLog {
        let p = CellParameters::bundled("nmc111").unwrap();
        let s = fresh_state(&p, 1.0).unwrap();
        let mut l = log_state(day, true, &s, &p, None).unwrap();
        l.esoh.capacity_ah = cap;
        l
    }

    #[test]
    fn jump_from_fade_rate() {
        // 0.1 % of nominal per day with a 0.25 % budget: two days
        let logs = [log(10, 5.0), log(11, 4.995)];
        assert_eq!(choose_jump(&logs, 0.0025, 5.0), 2);
        let flat = [log(10, 5.0), log(11, 5.0)];
        assert_eq!(choose_jump(&flat, 0.0025, 5.0), MAX_JUMP_DAYS);
        let steep = [log(10, 5.0), log(11, 4.9)];
        assert_eq!(choose_jump(&steep, 0.0025, 5.0), 1);
        assert_eq!(choose_jump(&logs[..1], 0.0025, 5.0), 1);
        let boundary = [log(10, 5.0), log(11, 4.9875)];
        assert_eq!(choose_jump(&boundary, 0.0025, 5.0), 1);
    }

    fn zero_slopes() -> DaySlopes {
        DaySlopes {
            sei_thickness: 0.0,
            plated_thickness: 0.0,
            negative_fraction: 0.0,
            positive_fraction: 0.0,
            lli: LliLedger::default(),
            lam: LamLedger::default(),
            throughput_ah: 0.0,
            throughput_wh: 0.0,
        }
    }

    #[test]
    fn zero_slope_extrapolation_is_identity() {
        let p = CellParameters::bundled("nmc111").unwrap();
        let s = fresh_state(&p, 0.6).unwrap();
        let e = extrapolate(&s, &p, &zero_slopes(), 7, 0.6).unwrap();
        for (a, b) in s.negative.concentration.iter().zip(&e.negative.concentration) {
            assert!((a - b).abs() <= 1e-9 * a);
        }
        assert_eq!(e.lli, s.lli);
        assert_eq!(e.sei_thickness, s.sei_thickness);
    }

    #[test]
    fn extrapolation_is_linear_in_days() {
        let p = CellParameters::bundled("nmc622_25c").unwrap();
        let s = fresh_state(&p, 0.7).unwrap();
        let slopes = DaySlopes {
            sei_thickness: 2e-11,
            negative_fraction: -1e-5,
            positive_fraction: -3e-5,
            lli: LliLedger {
                sei: 2e-5,
                crack: 1e-6,
                ..LliLedger::default()
            },
            throughput_ah: 2.0,
            ..zero_slopes()
        };
        let twice = extrapolate(&extrapolate(&s, &p, &slopes, 1, 0.7).unwrap(), &p, &slopes, 1, 0.7).unwrap();
        let once = extrapolate(&s, &p, &slopes, 2, 0.7).unwrap();
        assert!((twice.sei_thickness - once.sei_thickness).abs() < 1e-20);
        assert!((twice.lli.total() - once.lli.total()).abs() < 1e-15);
        assert!((twice.positive.active_fraction - once.positive.active_fraction).abs() < 1e-15);
        assert!((twice.cyclable_lithium(&p) - once.cyclable_lithium(&p)).abs() < 1e-12 * once.initial_lithium);
    }

    fn schedule(p: &CellParameters, scenario: Scenario) -> DutySchedule {
        build_schedule(scenario, DriveVariant::Long.profile(), p).unwrap()
    }

    #[test]
    fn full_eol_fraction_ends_at_once() {
        let p = CellParameters::bundled("nmc111").unwrap();
        let opts = LifetimeOptions {
            eol_fraction: 1.0,
            ..LifetimeOptions::default()
        };
        let r = run_lifetime(&p, &schedule(&p, Scenario::NoV2g), &opts).unwrap();
        assert_eq!(r.termination, Termination::EndOfLife);
        assert!(r.eol.unwrap().day <= 1.0);
    }

    #[test]
    fn v2g_adds_grid_throughput() {
        // two 1 h C/4 discharges plus the charge that replaces them: 1 C h per day
        let p = CellParameters::bundled("nmc622_25c").unwrap();
        let day_ah = |scenario| {
            let opts = LifetimeOptions {
                mode: SimulationMode::Exhaustive,
                stop_day: Some(1),
                ..LifetimeOptions::default()
            };
            let r = run_lifetime(&p, &schedule(&p, scenario), &opts).unwrap();
            r.logs[1].throughput_ah / p.nominal_capacity_ah
        };
        let extra = day_ah(Scenario::V2gModerate) - day_ah(Scenario::NoV2g);
        assert!((extra - 1.0).abs() < 0.03, "{extra}");
    }

    #[test]
    fn rest_only_days_age_by_calendar_mechanisms() {
        let p = CellParameters::bundled("nmc622_45c").unwrap();
        let rest = DutySchedule::from_events("rest", Vec::new()).unwrap();
        let opts = LifetimeOptions {
            mode: SimulationMode::Exhaustive,
            stop_day: Some(3),
            ..LifetimeOptions::default()
        };
        let r = run_lifetime(&p, &rest, &opts).unwrap();
        let last = r.logs.last().unwrap();
        assert_eq!(r.termination, Termination::StopDay);
        assert!(last.lli.sei > 0.0);
        assert!(last.lli.dissolution > 0.0);
        assert_eq!(last.lli.plating, 0.0);
        assert_eq!(
            last.lli.crack, 0.0,
            "sei {} diss {}",
            last.lli.sei, last.lli.dissolution
        );
        assert_eq!(last.throughput_ah, 0.0);
    }

    #[test]
    fn diffusion_limited_sei_grows_as_root_time() {
        let mut p = CellParameters::bundled("nmc622_25c").unwrap();
        p.sei.rate_constant *= 1e4;
        let rest = DutySchedule::from_events("rest", Vec::new()).unwrap();
        let opts = LifetimeOptions {
            mode: SimulationMode::Exhaustive,
            stop_day: Some(730),
            mechanisms: Mechanisms {
                sei: true,
                ..Mechanisms::none()
            },
            ..LifetimeOptions::default()
        };
        let start = fresh_state(&p, 1.0).unwrap();
        let r = run_lifetime_from(&p, &rest, start, &opts).unwrap();
        // SEI lithium loss is proportional to film growth when the electrode area is fixed
        let pts: Vec<(f64, f64)> = r
            .logs
            .iter()
            .filter(|l| l.day >= 365)
            .map(|l| ((l.day as f64).ln(), l.lli.sei.ln()))
            .collect();
        let n = pts.len() as f64;
        let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        let slope = sxy / sxx;
        assert!((0.45..=0.6).contains(&slope), "{slope}");
    }

    #[test]
    fn extrapolation_keeps_ledger_closed() {
        let p = CellParameters::bundled("nmc622_45c").unwrap();
        let s = fresh_state(&p, 0.8).unwrap();
        let slopes = DaySlopes {
            sei_thickness: 1e-10,
            plated_thickness: 0.0,
            negative_fraction: -1e-4,
            positive_fraction: -2e-4,
            lli: LliLedger {
                sei: 1e-4,
                plating: 1e-6,
                dissolution: 2e-6,
                crack: 3e-6,
            },
            lam: LamLedger::default(),
            throughput_ah: 3.0,
            throughput_wh: 11.0,
        };
        let e = extrapolate(&s, &p, &slopes, 10, 0.8).unwrap();
        assert!(e.ledger_closure_error(&p) < 1e-12);
        assert!((e.negative.active_fraction - (p.negative.active_fraction - 1e-3)).abs() < 1e-12);
        assert_eq!(e.throughput_ah, 30.0);
    }

    #[test]
    fn extrapolation_rejects_collapse() {
        let p = CellParameters::bundled("nmc622_45c").unwrap();
        let s = fresh_state(&p, 0.8).unwrap();
        let slopes = DaySlopes {
            sei_thickness: 0.0,
            plated_thickness: 0.0,
            negative_fraction: -0.1,
            positive_fraction: 0.0,
            lli: LliLedger::default(),
            lam: LamLedger::default(),
            throughput_ah: 0.0,
            throughput_wh: 0.0,
        };
        assert!(extrapolate(&s, &p, &slopes, 20, 0.8).is_err());
    }
}
