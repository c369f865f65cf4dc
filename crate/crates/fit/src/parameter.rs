//! The degradation parameters that can be fitted and how the solver sees them.

use std::fmt;
use std::str::FromStr;

use cellwear_core::params::CellParameters;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitParameter {
    SeiRate,
    SeiDiffusivity,
    DissolutionCurrent,
    PlatingRate,
    CrackPositive,
    CrackNegative,
    CrackExponent,
}

/// Mapping between a physical value and the solver coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Log10,
    /// Value divided by a unit of the parameter's typical size.
    Linear(f64),
}

impl FitParameter {
    pub const ALL: [Self; 7] = [
        Self::SeiRate,
        Self::SeiDiffusivity,
        Self::DissolutionCurrent,
        Self::PlatingRate,
        Self::CrackPositive,
        Self::CrackNegative,
        Self::CrackExponent,
    ];
    /// Fitted against storage data.
    pub const CALENDAR: [Self; 3] = [Self::SeiRate, Self::SeiDiffusivity, Self::DissolutionCurrent];
    /// Fitted against cycling data with the calendar set held fixed.
    pub const CYCLING: [Self; 4] = [
        Self::PlatingRate,
        Self::CrackPositive,
        Self::CrackNegative,
        Self::CrackExponent,
    ];

    /// Key used in reports and in cell files.
    pub fn key(self) -> &'static str {
        match self {
            Self::SeiRate => "k_sei_m_per_s",
            Self::SeiDiffusivity => "d_sei_m2_per_s",
            Self::DissolutionCurrent => "i0_diss_a_per_m2",
            Self::PlatingRate => "k_pl_m_per_s",
            Self::CrackPositive => "beta_pos_per_s",
            Self::CrackNegative => "beta_neg_per_s",
            Self::CrackExponent => "m_crack",
        }
    }

    /// Section and key of the parameter in a cell TOML file.
    pub fn cell_file_key(self) -> (&'static str, &'static str) {
        match self {
            Self::SeiRate => ("sei", "rate_constant_m_per_s"),
            Self::SeiDiffusivity => ("sei", "solvent_diffusivity_m2_per_s"),
            Self::DissolutionCurrent => ("dissolution", "exchange_current_a_per_m2"),
            Self::PlatingRate => ("plating", "rate_constant_m_per_s"),
            Self::CrackPositive => ("positive", "crack_rate_per_s"),
            Self::CrackNegative => ("negative", "crack_rate_per_s"),
            Self::CrackExponent => ("cracking", "exponent"),
        }
    }

    pub fn get(self, p: &CellParameters) -> f64 {
        match self {
            Self::SeiRate => p.sei.rate_constant,
            Self::SeiDiffusivity => p.sei.solvent_diffusivity,
            Self::DissolutionCurrent => p.dissolution.exchange_current,
            Self::PlatingRate => p.plating.rate_constant,
            Self::CrackPositive => p.positive.crack_rate,
            Self::CrackNegative => p.negative.crack_rate,
            Self::CrackExponent => p.crack_exponent,
        }
    }

    pub fn set(self, p: &mut CellParameters, v: f64) {
        match self {
            Self::SeiRate => p.sei.rate_constant = v,
            Self::SeiDiffusivity => p.sei.solvent_diffusivity = v,
            Self::DissolutionCurrent => p.dissolution.exchange_current = v,
            Self::PlatingRate => p.plating.rate_constant = v,
            Self::CrackPositive => p.positive.crack_rate = v,
            Self::CrackNegative => p.negative.crack_rate = v,
            Self::CrackExponent => p.crack_exponent = v,
        }
    }

    /// Typical size of the parameter across the fitted cell families.
    pub fn magnitude(self) -> f64 {
        match self {
            Self::SeiRate => 3e-16,
            Self::SeiDiffusivity => 2e-19,
            Self::DissolutionCurrent => 6e-4,
            Self::PlatingRate => 5e-10,
            Self::CrackPositive | Self::CrackNegative => 3e-7,
            Self::CrackExponent => 1.0,
        }
    }

    pub fn scale(self) -> Scale {
        match self {
            Self::CrackPositive | Self::CrackNegative => Scale::Linear(1e-7),
            Self::CrackExponent => Scale::Linear(1.0),
            _ => Scale::Log10,
        }
    }

    /// Two decades either side of the typical size; the crack exponent stays in [1, 3].
    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            Self::CrackExponent => (1.0, 3.0),
            _ => (self.magnitude() / 100.0, self.magnitude() * 100.0),
        }
    }

    pub fn to_solver(self, v: f64) -> f64 {
        match self.scale() {
            Scale::Log10 => v.log10(),
            Scale::Linear(unit) => v / unit,
        }
    }

    pub fn from_solver(self, u: f64) -> f64 {
        match self.scale() {
            Scale::Log10 => 10f64.powf(u),
            Scale::Linear(unit) => u * unit,
        }
    }

    /// Midpoint of the bounds in solver coordinates, mapped back.
    pub fn midpoint(self) -> f64 {
        let (lo, hi) = self.default_bounds();
        self.from_solver(0.5 * (self.to_solver(lo) + self.to_solver(hi)))
    }
}

impl fmt::Display for FitParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for FitParameter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|p| p.key() == s)
            .ok_or_else(|| format!("unknown parameter `{s}`"))
    }
}

/// Overwrite the fitted values in a cell TOML text, leaving everything else untouched.
pub fn patch_cell_file(text: &str, values: &[(FitParameter, f64)]) -> Result<String, toml::de::Error> {
    let mut doc: toml::Table = text.parse()?;
    for &(p, v) in values {
        let (section, key) = p.cell_file_key();
        let table = doc
            .entry(section)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        if let toml::Value::Table(t) = table {
            t.insert(key.to_string(), toml::Value::Float(v));
        }
    }
    Ok(toml::to_string(&doc).expect("TOML table serializes"))
}
