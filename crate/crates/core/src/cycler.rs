//! Executes a day of current-controlled segments on a cell.

use crate::cell::CellModel;
use crate::duty::{DutySchedule, Segment, SegmentKind};
use crate::error::SimError;
use crate::esoh::{esoh, StoichWindow};
use crate::state::CellState;

/// Constant-voltage phases end when the current falls below this C-rate.
pub const CV_CUTOFF_C_RATE: f64 = 1.0 / 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes {
    /// Upper bound on the step during drive segments, s.
    pub drive: f64,
    /// Upper bound on the step elsewhere, s.
    pub other: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        Self {
            drive: 1.0,
            other: 10.0,
        }
    }
}

/// SOC statistics and optional trace for one simulated day.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRecord {
    pub window: StoichWindow,
    pub start_soc: f64,
    pub end_soc: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub soc_mean: f64,
    /// Time-stamped SOC samples, present when tracing was requested.
    pub trace: Option<Vec<(f64, f64)>>,
    /// Number of times a voltage or SOC guard cut the requested current.
    pub guard_events: u32,
}

struct Tracker {
    window: StoichWindow,
    neg_sites_per_conc: f64,
    t: f64,
    soc: f64,
    min: f64,
    max: f64,
    integral: f64,
    trace: Option<Vec<(f64, f64)>>,
    guard_events: u32,
}

impl Tracker {
    fn soc_of(&self, state: &CellState) -> f64 {
        let x = state.negative.average_concentration() * self.neg_sites_per_conc;
        (x - self.window.x0) / (self.window.x100 - self.window.x0)
    }

    fn advance(&mut self, dt: f64, soc: f64) {
        self.integral += 0.5 * (self.soc + soc) * dt;
        self.t += dt;
        self.soc = soc;
        self.min = self.min.min(soc);
        self.max = self.max.max(soc);
        if let Some(tr) = &mut self.trace {
            tr.push((self.t, soc));
        }
    }
}

/// Runs segments with step-size limits and operating guards.
pub struct Cycler<'a> {
    pub model: &'a mut CellModel,
    pub steps: StepSizes,
}

impl<'a> Cycler<'a> {
    pub fn new(model: &'a mut CellModel, steps: StepSizes) -> Self {
        Self { model, steps }
    }

    /// Simulate the whole schedule once. The SOC window is fixed at its value at the start of the day.
    pub fn run_day(
        &mut self,
        state: &mut CellState,
        schedule: &DutySchedule,
        trace: bool,
    ) -> Result<DayRecord, SimError> {
        self.run_segments(state, &schedule.segments, trace)
    }

    fn tracker(&self, state: &CellState, trace: bool) -> Result<Tracker, SimError> {
        let window = esoh(state, &self.model.params)?.window;
        let mut tr = Tracker {
            window,
            neg_sites_per_conc: 1.0 / self.model.params.negative.max_concentration,
            t: 0.0,
            soc: 0.0,
            min: 0.0,
            max: 0.0,
            integral: 0.0,
            trace: trace.then(Vec::new),
            guard_events: 0,
        };
        tr.soc = tr.soc_of(state);
        tr.min = tr.soc;
        tr.max = tr.soc;
        if let Some(t) = &mut tr.trace {
            t.push((0.0, tr.soc));
        }
        Ok(tr)
    }

    pub fn run_segments(
        &mut self,
        state: &mut CellState,
        segments: &[Segment],
        trace: bool,
    ) -> Result<DayRecord, SimError> {
        let mut tr = self.tracker(state, trace)?;
        let start_soc = tr.soc;
        for seg in segments {
            let active = self.run_active(state, seg, &mut tr)?;
            self.rest(state, seg.duration - active, &mut tr)?;
        }
        Ok(DayRecord {
            window: tr.window,
            start_soc,
            end_soc: tr.soc,
            soc_min: tr.min,
            soc_max: tr.max,
            soc_mean: if tr.t > 0.0 { tr.integral / tr.t } else { tr.soc },
            trace: tr.trace,
            guard_events: tr.guard_events,
        })
    }

    fn rest(&mut self, state: &mut CellState, mut remaining: f64, tr: &mut Tracker) -> Result<(), SimError> {
        while remaining > 1e-9 {
            let dt = remaining.min(self.steps.other);
            self.model.step(state, 0.0, dt)?;
            remaining -= dt;
            tr.advance(dt, tr.soc_of(state));
        }
        Ok(())
    }

    /// Charge at `c_rate` (CC then CV) until `target_soc` or the CV cutoff; returns the seconds taken.
    pub fn charge_to(&mut self, state: &mut CellState, c_rate: f64, target_soc: f64) -> Result<f64, SimError> {
        let seg = Segment {
            start: 0.0,
            duration: 2.0 * crate::constants::SECONDS_PER_DAY,
            kind: SegmentKind::ChargeCc { c_rate, target_soc },
        };
        let mut tr = self.tracker(state, false)?;
        self.run_active(state, &seg, &mut tr)
    }

    /// Current that holds the terminal voltage at `target` while charging, between `max_charge` (< 0) and 0.
    fn voltage_limited_current(&self, state: &CellState, max_charge: f64, target: f64) -> Result<f64, SimError> {
        let v = |i: f64| self.model.terminal_voltage(state, i);
        if v(max_charge)? <= target {
            return Ok(max_charge);
        }
        if v(0.0)? >= target {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (max_charge, 0.0);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if v(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-7 * max_charge.abs() {
                break;
            }
        }
        Ok(hi)
    }

    /// Seconds at current `i` to move SOC by `d_soc` in the day's window.
    fn seconds_for(&self, state: &CellState, window: &StoichWindow, d_soc: f64, i: f64) -> f64 {
        let p = &self.model.params;
        let sites = p.negative.site_moles(state.negative.active_fraction, p.area);
        d_soc.abs() * (window.x100 - window.x0) * sites * crate::constants::FARADAY / i.abs()
    }

    /// Runs the current-carrying part of a segment and returns its length in seconds;
    /// the caller rests the cell for the remainder.
    fn run_active(&mut self, state: &mut CellState, seg: &Segment, tr: &mut Tracker) -> Result<f64, SimError> {
        let one_c = self.model.params.one_c();
        let v_max = self.model.params.upper_voltage;
        let v_min = self.model.params.lower_voltage;
        let mut tau = 0.0;
        match &seg.kind {
            SegmentKind::Rest => Ok(0.0),
            SegmentKind::Drive { profile, min_soc } => {
                let mut last_v = f64::INFINITY;
                while seg.duration - tau > 1e-9 {
                    let local = tau % profile.duration();
                    let dt = (profile.next_change(local) - local)
                        .min(self.steps.drive)
                        .min(seg.duration - tau)
                        .max(1e-9);
                    let mut i = profile.rate_at(local) * one_c;
                    if i > 0.0 && (tr.soc <= *min_soc || last_v < v_min) {
                        // out of charge: the vehicle stops drawing current
                        tr.guard_events += 1;
                        i = 0.0;
                    } else if i < 0.0 && tr.soc > 0.8 {
                        let limited = self.voltage_limited_current(state, i, v_max)?;
                        if limited != i {
                            tr.guard_events += 1;
                            i = limited;
                        }
                    }
                    let r = self.model.step(state, i, dt)?;
                    last_v = if i > 0.0 { r.voltage } else { f64::INFINITY };
                    tau += dt;
                    tr.advance(dt, tr.soc_of(state));
                }
                Ok(tau)
            }
            SegmentKind::ChargeCc { c_rate, target_soc } => {
                let cc = -c_rate * one_c;
                let mut cv = false;
                while seg.duration - tau > 1e-9 {
                    if tr.soc >= *target_soc - 1e-12 {
                        break;
                    }
                    let mut i = cc;
                    if !cv && self.model.terminal_voltage(state, cc)? > v_max {
                        cv = true;
                    }
                    if cv {
                        i = self.voltage_limited_current(state, cc, v_max)?;
                        if i.abs() < CV_CUTOFF_C_RATE * one_c {
                            break;
                        }
                    }
                    let mut dt = self.steps.other.min(seg.duration - tau);
                    let to_target = self.seconds_for(state, &tr.window, target_soc - tr.soc, i);
                    if to_target < dt {
                        dt = to_target.max(1e-6);
                    }
                    self.model.step(state, i, dt)?;
                    tau += dt;
                    tr.advance(dt, tr.soc_of(state));
                }
                Ok(tau)
            }
            SegmentKind::DischargeCc { c_rate, min_soc } => {
                let i = c_rate * one_c;
                while seg.duration - tau > 1e-9 {
                    if tr.soc <= *min_soc + 1e-12 {
                        tr.guard_events += 1;
                        break;
                    }
                    let mut dt = self.steps.other.min(seg.duration - tau);
                    let to_floor = self.seconds_for(state, &tr.window, tr.soc - min_soc, i);
                    if to_floor < dt {
                        dt = to_floor.max(1e-6);
                    }
                    let r = self.model.step(state, i, dt)?;
                    tau += dt;
                    tr.advance(dt, tr.soc_of(state));
                    if r.voltage < v_min {
                        tr.guard_events += 1;
                        break;
                    }
                }
                Ok(tau)
            }
        }
    }
}
