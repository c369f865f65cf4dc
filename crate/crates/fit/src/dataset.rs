//! Aging datasets: test condition plus periodic electrode state-of-health observations.
//!
//! File layout: `#`-prefixed `key = value` header lines, then a CSV table
//!
//! ```text
//! # cell = nmc622_25c
//! # condition = calendar
//! # soc = 1.0
//! # temperature_k = 298.15
//! time_days,C_p_ah,C_n_ah,LLI_frac
//! 0,3.96,4.39,0
//! 30,3.96,4.37,0.012
//! ```
//!
//! Cycling files use `condition = cycling` with `charge_c_rate`, `discharge_c_rate` and `dod`.
//! The first column may be `cum_ah` instead of `time_days`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cellwear_core::constants::SECONDS_PER_DAY;
use cellwear_core::duty::{DutySchedule, Segment, SegmentKind};
use cellwear_core::error::ScheduleError;
use serde::{Deserialize, Serialize};

use crate::error::DatasetError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    /// Storage at a fixed state of charge.
    Calendar { soc: f64, temperature_k: f64 },
    /// Back-to-back CC-CV charge to full and CC discharge through `dod`.
    Cycling {
        charge_c_rate: f64,
        discharge_c_rate: f64,
        dod: f64,
        temperature_k: f64,
    },
}

impl Condition {
    pub fn is_calendar(&self) -> bool {
        matches!(self, Condition::Calendar { .. })
    }

    pub fn temperature(&self) -> f64 {
        match *self {
            Condition::Calendar { temperature_k, .. } | Condition::Cycling { temperature_k, .. } => temperature_k,
        }
    }

    /// SOC at which the test starts.
    pub fn start_soc(&self) -> f64 {
        match *self {
            Condition::Calendar { soc, .. } => soc,
            Condition::Cycling { .. } => 1.0,
        }
    }

    /// One day of the test protocol.
    pub fn schedule(&self) -> Result<DutySchedule, ScheduleError> {
        match *self {
            Condition::Calendar { soc, .. } => DutySchedule::from_events(format!("calendar_soc{soc}"), Vec::new()),
            Condition::Cycling {
                charge_c_rate,
                discharge_c_rate,
                dod,
                ..
            } => {
                // generous windows: CV tail and the rest after each half cycle
                let discharge = 3600.0 * dod / discharge_c_rate + 600.0;
                let charge = 3600.0 * dod / charge_c_rate + 3600.0;
                let cycles = (SECONDS_PER_DAY / (discharge + charge)).floor().max(1.0) as usize;
                let period = SECONDS_PER_DAY / cycles as f64;
                let scale = period / (discharge + charge);
                let mut events = Vec::with_capacity(2 * cycles);
                for c in 0..cycles {
                    let t = c as f64 * period;
                    events.push(Segment {
                        start: t,
                        duration: discharge * scale,
                        kind: SegmentKind::DischargeCc {
                            c_rate: discharge_c_rate,
                            min_soc: 1.0 - dod,
                        },
                    });
                    events.push(Segment {
                        start: t + discharge * scale,
                        duration: period - discharge * scale,
                        kind: SegmentKind::ChargeCc {
                            c_rate: charge_c_rate,
                            target_soc: 1.0,
                        },
                    });
                }
                DutySchedule::from_events(format!("cycling_{charge_c_rate}c_{discharge_c_rate}d_dod{dod}"), events)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeAxis {
    Days,
    /// Cumulative charge throughput, Ah.
    CumAh,
}

impl TimeAxis {
    fn column(self) -> &'static str {
        match self {
            TimeAxis::Days => "time_days",
            TimeAxis::CumAh => "cum_ah",
        }
    }
}

/// One reference performance test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub time: f64,
    pub c_p_ah: f64,
    pub c_n_ah: f64,
    pub lli: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgingDataset {
    pub cell: String,
    pub condition: Condition,
    pub axis: TimeAxis,
    pub observations: Vec<Observation>,
}

#[derive(Deserialize)]
struct Row {
    #[serde(alias = "time_days", alias = "cum_ah")]
    time: f64,
    #[serde(rename = "C_p_ah")]
    c_p_ah: f64,
    #[serde(rename = "C_n_ah")]
    c_n_ah: f64,
    #[serde(rename = "LLI_frac")]
    lli: f64,
}

impl AgingDataset {
    pub fn validate(&self) -> Result<(), String> {
        if self.observations.is_empty() {
            return Err("no observations".into());
        }
        for w in self.observations.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(format!(
                    "observation times must increase ({} then {})",
                    w[0].time, w[1].time
                ));
            }
        }
        for o in &self.observations {
            if !(o.c_p_ah > 0.0 && o.c_n_ah > 0.0 && o.time >= 0.0) {
                return Err(format!("non-positive value at time {}", o.time));
            }
            if !(0.0..=1.0).contains(&o.lli) {
                return Err(format!("LLI {} outside [0, 1] at time {}", o.lli, o.time));
            }
        }
        let ok = match self.condition {
            Condition::Calendar { soc, .. } => (0.0..=1.0).contains(&soc),
            Condition::Cycling {
                charge_c_rate,
                discharge_c_rate,
                dod,
                ..
            } => charge_c_rate > 0.0 && discharge_c_rate > 0.0 && dod > 0.0 && dod <= 1.0,
        };
        if !ok || !(self.condition.temperature() > 0.0) {
            return Err("condition values out of range".into());
        }
        Ok(())
    }

    /// Last observation time in days, when the axis is days.
    pub fn last_day(&self) -> Option<f64> {
        match self.axis {
            TimeAxis::Days => self.observations.last().map(|o| o.time),
            TimeAxis::CumAh => None,
        }
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, DatasetError> {
        let fail = |reason: String| DatasetError::Format {
            path: path.to_path_buf(),
            reason,
        };
        let mut meta = BTreeMap::new();
        let mut body = String::new();
        for line in text.lines() {
            let trimmed = line.trim();
            if let Some(rest) = trimmed.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
            } else if !trimmed.is_empty() {
                body.push_str(trimmed);
                body.push('\n');
            }
        }
        let text_of = |k: &str| {
            meta.get(k)
                .cloned()
                .ok_or_else(|| fail(format!("missing header `{k}`")))
        };
        let num = |k: &str| -> Result<f64, DatasetError> {
            text_of(k)?
                .parse::<f64>()
                .map_err(|e| fail(format!("header `{k}`: {e}")))
        };
        let temperature_k = num("temperature_k")?;
        let condition = match text_of("condition")?.as_str() {
            "calendar" => Condition::Calendar {
                soc: num("soc")?,
                temperature_k,
            },
            "cycling" => Condition::Cycling {
                charge_c_rate: num("charge_c_rate")?,
                discharge_c_rate: num("discharge_c_rate")?,
                dod: num("dod")?,
                temperature_k,
            },
            other => return Err(fail(format!("unknown condition `{other}`"))),
        };
        let header = body.lines().next().unwrap_or_default();
        let axis = match header.split(',').next().map(str::trim) {
            Some("time_days") => TimeAxis::Days,
            Some("cum_ah") => TimeAxis::CumAh,
            _ => return Err(fail("first column must be time_days or cum_ah".into())),
        };
        let csv_err = |source| DatasetError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let observations = csv::Reader::from_reader(body.as_bytes())
            .deserialize::<Row>()
            .map(|r| {
                r.map(|r| Observation {
                    time: r.time,
                    c_p_ah: r.c_p_ah,
                    c_n_ah: r.c_n_ah,
                    lli: r.lli,
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(csv_err)?;
        let d = Self {
            cell: text_of("cell")?,
            condition,
            axis,
            observations,
        };
        d.validate().map_err(fail)?;
        Ok(d)
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# cell = {}", self.cell);
        match self.condition {
            Condition::Calendar { soc, temperature_k } => {
                let _ = writeln!(
                    s,
                    "# condition = calendar\n# soc = {soc}\n# temperature_k = {temperature_k}"
                );
            }
            Condition::Cycling {
                charge_c_rate,
                discharge_c_rate,
                dod,
                temperature_k,
            } => {
                let _ = writeln!(
                    s,
                    "# condition = cycling\n# charge_c_rate = {charge_c_rate}\n# discharge_c_rate = {discharge_c_rate}\n# dod = {dod}\n# temperature_k = {temperature_k}"
                );
            }
        }
        let _ = writeln!(s, "{},C_p_ah,C_n_ah,LLI_frac", self.axis.column());
        for o in &self.observations {
            let _ = writeln!(s, "{},{},{},{}", o.time, o.c_p_ah, o.c_n_ah, o.lli);
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        fs::write(path, self.to_text()).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// File name that identifies the cell and condition.
    pub fn file_name(&self) -> String {
        let c = match self.condition {
            Condition::Calendar { soc, .. } => format!("calendar_soc{soc}"),
            Condition::Cycling {
                charge_c_rate,
                discharge_c_rate,
                dod,
                ..
            } => format!("cycling_c{charge_c_rate}_d{discharge_c_rate}_dod{dod}"),
        };
        format!("{}_{c}.csv", self.cell)
    }
}

/// Every `.csv` dataset in `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<(PathBuf, AgingDataset)>, DatasetError> {
    let io = |source| DatasetError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "csv"));
    paths.sort();
    paths
        .into_iter()
        .map(|p| AgingDataset::load(&p).map(|d| (p, d)))
        .collect()
}
