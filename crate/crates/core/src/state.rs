//! Dynamic cell state and the lithium-loss ledger.

use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::constants::SHELLS;
use crate::params::{CellParameters, ElectrodeParameters};
use crate::particle::average;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Electrode {
    Negative,
    Positive,
}

/// Shell concentrations and active-material fraction of one electrode.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectrodeState {
    /// mol/m^3, innermost shell first.
    pub concentration: Vec<f64>,
    pub active_fraction: f64,
}

impl ElectrodeState {
    pub fn uniform(concentration: f64, active_fraction: f64) -> Self {
        Self {
            concentration: vec![concentration; SHELLS],
            active_fraction,
        }
    }

    pub fn average_concentration(&self) -> f64 {
        average(&self.concentration)
    }

    pub fn average_stoichiometry(&self, p: &ElectrodeParameters) -> f64 {
        self.average_concentration() / p.max_concentration
    }

    /// Moles of lithium held in this electrode's particles.
    pub fn lithium(&self, p: &ElectrodeParameters, area: f64) -> f64 {
        self.active_fraction * p.thickness * area * self.average_concentration()
    }
}

/// Cumulative lithium lost to each mechanism, mol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LliLedger {
    pub sei: f64,
    pub plating: f64,
    pub dissolution: f64,
    pub crack: f64,
}

impl LliLedger {
    pub fn total(&self) -> f64 {
        self.sei + self.plating + self.dissolution + self.crack
    }
}

impl Add for LliLedger {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            sei: self.sei + o.sei,
            plating: self.plating + o.plating,
            dissolution: self.dissolution + o.dissolution,
            crack: self.crack + o.crack,
        }
    }
}

impl AddAssign for LliLedger {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for LliLedger {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            sei: self.sei - o.sei,
            plating: self.plating - o.plating,
            dissolution: self.dissolution - o.dissolution,
            crack: self.crack - o.crack,
        }
    }
}

impl Mul<f64> for LliLedger {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self {
            sei: self.sei * k,
            plating: self.plating * k,
            dissolution: self.dissolution * k,
            crack: self.crack * k,
        }
    }
}

/// Active-material volume fraction lost, split by cause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LamLedger {
    pub negative_crack: f64,
    pub positive_crack: f64,
    pub positive_dissolution: f64,
}

impl Add for LamLedger {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            negative_crack: self.negative_crack + o.negative_crack,
            positive_crack: self.positive_crack + o.positive_crack,
            positive_dissolution: self.positive_dissolution + o.positive_dissolution,
        }
    }
}

impl Sub for LamLedger {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            negative_crack: self.negative_crack - o.negative_crack,
            positive_crack: self.positive_crack - o.positive_crack,
            positive_dissolution: self.positive_dissolution - o.positive_dissolution,
        }
    }
}

impl Mul<f64> for LamLedger {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self {
            negative_crack: self.negative_crack * k,
            positive_crack: self.positive_crack * k,
            positive_dissolution: self.positive_dissolution * k,
        }
    }
}

/// Complete dynamic state of a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub negative: ElectrodeState,
    pub positive: ElectrodeState,
    /// m
    pub sei_thickness: f64,
    /// m
    pub plated_thickness: f64,
    /// Cyclable lithium of the fresh cell, mol.
    pub initial_lithium: f64,
    pub lli: LliLedger,
    pub lam: LamLedger,
    /// Cumulative charge throughput |I| dt, Ah.
    pub throughput_ah: f64,
    /// Cumulative energy throughput |I V| dt, Wh.
    pub throughput_wh: f64,
}

impl CellState {
    /// Cyclable lithium currently held in both electrodes, mol.
    pub fn cyclable_lithium(&self, p: &CellParameters) -> f64 {
        self.negative.lithium(&p.negative, p.area) + self.positive.lithium(&p.positive, p.area)
    }

    /// Relative mismatch between the ledger and the lithium actually missing.
    pub fn ledger_closure_error(&self, p: &CellParameters) -> f64 {
        let missing = self.initial_lithium - self.cyclable_lithium(p);
        (missing - self.lli.total()).abs() / self.initial_lithium
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_arithmetic() {
        let a = LliLedger {
            sei: 1.0,
            plating: 2.0,
            dissolution: 3.0,
            crack: 4.0,
        };
        assert_eq!(a.total(), 10.0);
        assert_eq!((a + a * 0.5 - a).total(), 5.0);
    }

    #[test]
    fn uniform_electrode_lithium() {
        let p = CellParameters::bundled("nmc111").unwrap();
        let e = ElectrodeState::uniform(1000.0, 0.5);
        let expect = 0.5 * p.negative.thickness * p.area * 1000.0;
        assert!((e.lithium(&p.negative, p.area) - expect).abs() < 1e-15);
    }
}
