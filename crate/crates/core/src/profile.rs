//! Drive-cycle current profiles as C-rate time series (discharge positive).

use std::path::Path;

use crate::error::ProfileError;

const LONG: &str = include_str!("../data/drive/long.txt");
const SHORT: &str = include_str!("../data/drive/short.txt");
const AGGRESSIVE: &str = include_str!("../data/drive/aggressive.txt");

/// Piecewise-constant C-rate profile. Sample `i` holds from `times[i]` until `times[i + 1]`;
/// the last time stamp marks the end of the profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentProfile {
    times: Vec<f64>,
    rates: Vec<f64>,
    distance_mi: Option<f64>,
}

impl CurrentProfile {
    pub fn new(times: Vec<f64>, rates: Vec<f64>, distance_mi: Option<f64>) -> Result<Self, ProfileError> {
        if times.len() < 2 || times.len() != rates.len() {
            return Err(ProfileError::TooShort);
        }
        if times[0] != 0.0 {
            return Err(ProfileError::NonMonotonicTime { line: 1 });
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(ProfileError::NonMonotonicTime { line: i + 2 });
        }
        let p = Self {
            times,
            rates,
            distance_mi,
        };
        let net = p.net_charge();
        if net < 0.0 {
            return Err(ProfileError::NetCharging { net_ah_per_ah: net });
        }
        Ok(p)
    }

    /// Parse two whitespace-separated columns `time_s c_rate`. Comment lines start with `#`;
    /// a comment of the form `# distance_mi = 34.1` records the trip distance.
    pub fn parse(text: &str) -> Result<Self, ProfileError> {
        let mut times = Vec::new();
        let mut rates = Vec::new();
        let mut distance = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.split_once('=') {
                    if k.trim() == "distance_mi" {
                        distance = v.trim().parse::<f64>().ok();
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut cols = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty());
            let mut next = || -> Result<f64, ProfileError> {
                let s = cols.next().ok_or_else(|| ProfileError::Parse {
                    line: n + 1,
                    reason: "expected two columns".into(),
                })?;
                let v = s.parse::<f64>().map_err(|e| ProfileError::Parse {
                    line: n + 1,
                    reason: e.to_string(),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(ProfileError::Parse {
                        line: n + 1,
                        reason: "non-finite value".into(),
                    })
                }
            };
            times.push(next()?);
            rates.push(next()?);
        }
        Self::new(times, rates, distance)
    }

    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Bundled profiles: `long` (1 h commute), `short` (30 min commute) and `aggressive`.
    pub fn bundled(name: &str) -> Option<Self> {
        let text = match name {
            "long" => LONG,
            "short" => SHORT,
            "aggressive" => AGGRESSIVE,
            _ => return None,
        };
        Some(Self::parse(text).expect("bundled profile is valid"))
    }

    /// Constant-rate profile lasting `duration` seconds.
    pub fn constant(c_rate: f64, duration: f64) -> Result<Self, ProfileError> {
        Self::new(vec![0.0, duration], vec![c_rate, c_rate], None)
    }

    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn distance_mi(&self) -> Option<f64> {
        self.distance_mi
    }

    fn index(&self, t: f64) -> usize {
        self.times
            .partition_point(|&s| s <= t)
            .saturating_sub(1)
            .min(self.times.len() - 2)
    }

    /// C-rate at time `t` within the profile.
    pub fn rate_at(&self, t: f64) -> f64 {
        self.rates[self.index(t)]
    }

    /// Time of the next change after `t`.
    pub fn next_change(&self, t: f64) -> f64 {
        self.times[self.index(t) + 1]
    }

    /// Net discharged charge over the profile in units of nominal capacity.
    pub fn net_charge(&self) -> f64 {
        self.times
            .windows(2)
            .zip(&self.rates)
            .map(|(w, r)| r * (w[1] - w[0]))
            .sum::<f64>()
            / 3600.0
    }

    pub fn min_rate(&self) -> f64 {
        self.rates[..self.rates.len() - 1]
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_rate(&self) -> f64 {
        self.rates[..self.rates.len() - 1]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
