//! Daily duty cycles: commuting with optional vehicle-to-grid discharge.
//!
//! A day starts when the morning drive begins (t = 0). The afternoon drive starts
//! 9.5 h later. Charging happens at work (C/4) and at home overnight (C/8); in V2G
//! scenarios the car also discharges at C/4 for one hour after each drive.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cell::CellModel;
use crate::constants::{SECONDS_PER_DAY, SECONDS_PER_HOUR};
use crate::cycler::{Cycler, DayRecord, StepSizes};
use crate::degradation::Mechanisms;
use crate::error::{ScheduleError, SimError};
use crate::esoh::fresh_state;
use crate::params::CellParameters;
use crate::profile::CurrentProfile;

pub const AFTERNOON_DRIVE_START: f64 = 9.5 * SECONDS_PER_HOUR;
pub const V2G_DURATION: f64 = SECONDS_PER_HOUR;
pub const V2G_C_RATE: f64 = 0.25;
pub const WORK_CHARGE_C_RATE: f64 = 0.25;
pub const HOME_CHARGE_C_RATE: f64 = 0.125;
/// Grid discharge never takes the battery below this SOC.
pub const V2G_MIN_SOC: f64 = 0.1;
/// Fresh-cell average SOC the moderate V2G schedule is tuned to, i.e. the reference commute
/// without grid discharge.
pub const MODERATE_SOC_AVERAGE: f64 = 0.79;

#[derive(Debug, Clone, PartialEq)]
pub enum SegmentKind {
    /// Follow a C-rate profile (repeating it if the segment is longer). Discharge stops at `min_soc`
    /// or the lower voltage limit; regenerative charge is curtailed at the upper voltage limit.
    Drive {
        profile: Arc<CurrentProfile>,
        min_soc: f64,
    },
    Rest,
    /// Constant current to `target_soc`, switching to constant voltage at the upper limit until
    /// the current falls to C/50.
    ChargeCc {
        c_rate: f64,
        target_soc: f64,
    },
    /// Constant-current discharge, stopping at `min_soc` or the lower voltage limit.
    DischargeCc {
        c_rate: f64,
        min_soc: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Seconds from the start of the day.
    pub start: f64,
    pub duration: f64,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// One day of segments tiling [0, 86400 s) without gaps or overlaps.
#[derive(Debug, Clone, PartialEq)]
pub struct DutySchedule {
    pub label: String,
    pub segments: Vec<Segment>,
}

impl DutySchedule {
    /// Build a day from current-carrying events; gaps become rests.
    pub fn from_events(label: impl Into<String>, mut events: Vec<Segment>) -> Result<Self, ScheduleError> {
        events.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut segments = Vec::with_capacity(2 * events.len() + 1);
        let mut t = 0.0;
        for e in events {
            if !(e.duration > 0.0) {
                continue;
            }
            if e.start < t - 1e-6 {
                return Err(ScheduleError::Tiling(format!(
                    "event at {:.0} s overlaps previous ending {t:.0} s",
                    e.start
                )));
            }
            if e.start > t + 1e-9 {
                segments.push(Segment {
                    start: t,
                    duration: e.start - t,
                    kind: SegmentKind::Rest,
                });
            }
            t = e.end();
            segments.push(Segment {
                start: e.start.max(segments.last().map_or(0.0, Segment::end)),
                ..e
            });
        }
        if t > SECONDS_PER_DAY + 1e-6 {
            return Err(ScheduleError::Tiling(format!(
                "events run to {t:.0} s, past the end of the day"
            )));
        }
        if t < SECONDS_PER_DAY {
            segments.push(Segment {
                start: t,
                duration: SECONDS_PER_DAY - t,
                kind: SegmentKind::Rest,
            });
        }
        let s = Self {
            label: label.into(),
            segments,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        let mut t = 0.0;
        for s in &self.segments {
            if (s.start - t).abs() > 1e-6 || !(s.duration > 0.0) {
                return Err(ScheduleError::Tiling(format!("gap or overlap at {t:.1} s")));
            }
            t = s.end();
        }
        if (t - SECONDS_PER_DAY).abs() > 1e-6 {
            return Err(ScheduleError::Tiling(format!("day ends at {t:.1} s")));
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    NoV2g,
    V2gModerate,
    V2gEarly,
    V2gLate,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Self::NoV2g, Self::V2gModerate, Self::V2gEarly, Self::V2gLate];

    pub fn name(self) -> &'static str {
        match self {
            Self::NoV2g => "no_v2g",
            Self::V2gModerate => "v2g_moderate",
            Self::V2gEarly => "v2g_early",
            Self::V2gLate => "v2g_late",
        }
    }

    pub fn is_v2g(self) -> bool {
        self != Self::NoV2g
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}` (expected no_v2g, v2g_moderate, v2g_early or v2g_late)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveVariant {
    Long,
    Short,
}

impl DriveVariant {
    pub const ALL: [DriveVariant; 2] = [Self::Long, Self::Short];

    pub fn name(self) -> &'static str {
        match self {
            Self::Long => "long",
            Self::Short => "short",
        }
    }

    pub fn profile(self) -> Arc<CurrentProfile> {
        Arc::new(CurrentProfile::bundled(self.name()).expect("bundled drive exists"))
    }
}

impl fmt::Display for DriveVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DriveVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown drive variant `{s}` (expected long or short)"))
    }
}

/// Time-weighted average of SOC samples `(t, soc)` with trapezoidal weighting.
pub fn soc_average(trace: &[(f64, f64)]) -> f64 {
    match trace {
        [] => f64::NAN,
        [(_, s)] => *s,
        _ => {
            let span = trace[trace.len() - 1].0 - trace[0].0;
            let area: f64 = trace
                .windows(2)
                .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
                .sum();
            area / span
        }
    }
}

/// Charge durations needed at beginning of life, s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeSizing {
    pub work: f64,
    pub home: f64,
}

/// Timing of a commute day; `charge_shift` in [0, 1] slides both charges from right after
/// the trip (0) to right before the next drive (1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommuteLayout {
    pub drive: f64,
    pub v2g: bool,
    pub sizing: ChargeSizing,
    pub charge_shift: f64,
}

impl CommuteLayout {
    fn away(&self) -> f64 {
        self.drive + if self.v2g { V2G_DURATION } else { 0.0 }
    }

    fn check(&self) -> Result<(), ScheduleError> {
        let slack_work = AFTERNOON_DRIVE_START - self.away();
        if self.sizing.work > slack_work {
            return Err(ScheduleError::Infeasible {
                needed_s: self.sizing.work,
                available_s: slack_work,
                before: "the afternoon drive",
            });
        }
        let slack_home = SECONDS_PER_DAY - AFTERNOON_DRIVE_START - self.away();
        if self.sizing.home > slack_home {
            return Err(ScheduleError::Infeasible {
                needed_s: self.sizing.home,
                available_s: slack_home,
                before: "the morning drive",
            });
        }
        Ok(())
    }

    pub fn schedule(&self, label: &str, profile: &Arc<CurrentProfile>) -> Result<DutySchedule, ScheduleError> {
        self.check()?;
        let mut events = Vec::new();
        for (trip, next, charge, rate) in [
            (0.0, AFTERNOON_DRIVE_START, self.sizing.work, WORK_CHARGE_C_RATE),
            (
                AFTERNOON_DRIVE_START,
                SECONDS_PER_DAY,
                self.sizing.home,
                HOME_CHARGE_C_RATE,
            ),
        ] {
            events.push(Segment {
                start: trip,
                duration: self.drive,
                kind: SegmentKind::Drive {
                    profile: profile.clone(),
                    min_soc: 0.0,
                },
            });
            if self.v2g {
                events.push(Segment {
                    start: trip + self.drive,
                    duration: V2G_DURATION,
                    kind: SegmentKind::DischargeCc {
                        c_rate: V2G_C_RATE,
                        min_soc: V2G_MIN_SOC,
                    },
                });
            }
            let earliest = trip + self.away();
            let latest = next - charge;
            events.push(Segment {
                start: earliest + self.charge_shift * (latest - earliest),
                duration: charge,
                kind: SegmentKind::ChargeCc {
                    c_rate: rate,
                    target_soc: 1.0,
                },
            });
        }
        DutySchedule::from_events(label, events)
    }
}

fn dry_run_model(cell: &CellParameters) -> CellModel {
    CellModel::new(cell.clone(), Mechanisms::none())
}

/// Size the work and home charges for a fresh cell by simulating them to completion.
pub fn size_charges(cell: &CellParameters, profile: &Arc<CurrentProfile>, v2g: bool) -> Result<ChargeSizing, SimError> {
    let mut model = dry_run_model(cell);
    let mut cycler = Cycler::new(&mut model, StepSizes::default());
    let mut state = fresh_state(cell, 1.0)?;
    let trip = |cycler: &mut Cycler, state: &mut crate::state::CellState| -> Result<(), SimError> {
        let mut segs = vec![Segment {
            start: 0.0,
            duration: profile.duration(),
            kind: SegmentKind::Drive {
                profile: profile.clone(),
                min_soc: 0.0,
            },
        }];
        if v2g {
            segs.push(Segment {
                start: profile.duration(),
                duration: V2G_DURATION,
                kind: SegmentKind::DischargeCc {
                    c_rate: V2G_C_RATE,
                    min_soc: V2G_MIN_SOC,
                },
            });
        }
        cycler.run_segments(state, &segs, false)?;
        Ok(())
    };
    trip(&mut cycler, &mut state)?;
    let work = cycler.charge_to(&mut state, WORK_CHARGE_C_RATE, 1.0)?;
    trip(&mut cycler, &mut state)?;
    let home = cycler.charge_to(&mut state, HOME_CHARGE_C_RATE, 1.0)?;
    // whole seconds keep schedules readable; the charge stops on its own targets anyway
    Ok(ChargeSizing {
        work: work.ceil(),
        home: home.ceil(),
    })
}

/// Simulate one day on a fresh cell without degradation.
pub fn bol_day(cell: &CellParameters, schedule: &DutySchedule) -> Result<DayRecord, SimError> {
    let mut model = dry_run_model(cell);
    let mut state = fresh_state(cell, 1.0)?;
    Cycler::new(&mut model, StepSizes::default()).run_day(&mut state, schedule, false)
}

pub fn bol_average_soc(cell: &CellParameters, schedule: &DutySchedule) -> Result<f64, SimError> {
    Ok(bol_day(cell, schedule)?.soc_mean)
}

/// Build the daily schedule for a scenario. The moderate V2G case shifts its charges until the
/// fresh-cell average SOC equals [`MODERATE_SOC_AVERAGE`].
pub fn build_schedule(
    scenario: Scenario,
    profile: Arc<CurrentProfile>,
    cell: &CellParameters,
) -> Result<DutySchedule, ScheduleError> {
    let v2g = scenario.is_v2g();
    let sizing = size_charges(cell, &profile, v2g)?;
    let layout = |shift: f64| CommuteLayout {
        drive: profile.duration(),
        v2g,
        sizing,
        charge_shift: shift,
    };
    let label = scenario.name();
    match scenario {
        Scenario::NoV2g | Scenario::V2gLate => layout(1.0).schedule(label, &profile),
        Scenario::V2gEarly => layout(0.0).schedule(label, &profile),
        Scenario::V2gModerate => {
            let target = MODERATE_SOC_AVERAGE;
            let avg = |shift: f64| -> Result<f64, ScheduleError> {
                Ok(bol_average_soc(cell, &layout(shift).schedule(label, &profile)?)?)
            };
            let (mut lo, mut hi) = (0.0, 1.0);
            let (a_lo, a_hi) = (avg(lo)?, avg(hi)?);
            if !(a_hi <= target && target <= a_lo) {
                return Err(ScheduleError::Calibration(format!(
                    "target {target:.4} outside [{a_hi:.4}, {a_lo:.4}]"
                )));
            }
            for _ in 0..30 {
                let mid = 0.5 * (lo + hi);
                let a = avg(mid)?;
                if (a - target).abs() < 1e-5 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if a > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            layout(0.5 * (lo + hi)).schedule(label, &profile)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_average() {
        let tr: Vec<(f64, f64)> = (0..=100)
            .map(|i| {
                let t = i as f64;
                (t, if t <= 50.0 { 0.5 + t / 100.0 } else { 1.5 - t / 100.0 })
            })
            .collect();
        assert!((soc_average(&tr) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn events_are_tiled_with_rests() {
        let s = DutySchedule::from_events(
            "t",
            vec![Segment {
                start: 100.0,
                duration: 50.0,
                kind: SegmentKind::ChargeCc {
                    c_rate: 0.5,
                    target_soc: 1.0,
                },
            }],
        )
        .unwrap();
        assert_eq!(s.segments.len(), 3);
        assert!((s.total_duration() - SECONDS_PER_DAY).abs() < 1e-9);
    }

    #[test]
    fn overlapping_events_are_rejected() {
        let seg = |start| Segment {
            start,
            duration: 100.0,
            kind: SegmentKind::Rest,
        };
        assert!(matches!(
            DutySchedule::from_events("t", vec![seg(0.0), seg(50.0)]),
            Err(ScheduleError::Tiling(_))
        ));
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!("v2g".parse::<Scenario>().is_err());
    }

    #[test]
    fn oversized_charge_is_infeasible() {
        let layout = CommuteLayout {
            drive: 3600.0,
            v2g: true,
            sizing: ChargeSizing {
                work: 9.0 * 3600.0,
                home: 3600.0,
            },
            charge_shift: 0.0,
        };
        let p = DriveVariant::Long.profile();
        assert!(matches!(
            layout.schedule("x", &p),
            Err(ScheduleError::Infeasible { .. })
        ));
    }

    #[test]
    fn charge_timing_orders_average_soc() {
        let cell = CellParameters::bundled("nmc622_25c").unwrap();
        let p = DriveVariant::Long.profile();
        let avg = |sc| bol_average_soc(&cell, &build_schedule(sc, p.clone(), &cell).unwrap()).unwrap();
        let (late, moderate, early) = (
            avg(Scenario::V2gLate),
            avg(Scenario::V2gModerate),
            avg(Scenario::V2gEarly),
        );
        assert!(late < moderate && moderate < early, "{late} {moderate} {early}");
        assert!((moderate - MODERATE_SOC_AVERAGE).abs() < 1e-3);
    }
}
