//! Side reactions and mechanical damage: SEI growth, lithium plating,
//! transition-metal dissolution and stress-driven particle cracking.

use crate::constants::{thermal_voltage, FARADAY};
use crate::params::{CellParameters, DissolutionParameters, ElectrodeParameters, PlatingParameters, SeiParameters};

/// Which mechanisms are integrated. All are on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mechanisms {
    pub sei: bool,
    pub plating: bool,
    pub dissolution: bool,
    pub cracking: bool,
}

impl Default for Mechanisms {
    fn default() -> Self {
        Self::all()
    }
}

impl Mechanisms {
    pub const fn all() -> Self {
        Self {
            sei: true,
            plating: true,
            dissolution: true,
            cracking: true,
        }
    }

    pub const fn none() -> Self {
        Self {
            sei: false,
            plating: false,
            dissolution: false,
            cracking: false,
        }
    }
}

/// SEI side-reaction current density (A/m^2, non-positive) with solvent transport through the
/// film and reaction kinetics in series.
///
/// `film_drop` is the potential drop across the surface film caused by the intercalation current.
pub fn sei_flux(sei: &SeiParameters, thickness: f64, negative_potential: f64, film_drop: f64, temperature: f64) -> f64 {
    let eta = negative_potential - sei.reaction_potential - film_drop;
    let k_eff = sei.rate_constant * (-sei.transfer_coefficient * eta / thermal_voltage(temperature)).exp();
    -FARADAY * sei.solvent_concentration * k_eff / (1.0 + k_eff * thickness / sei.solvent_diffusivity)
}

/// SEI thickness increment (m) for current density `j` over `dt`; two electrons per product molecule.
pub fn sei_thickness_increment(sei: &SeiParameters, j: f64, dt: f64) -> f64 {
    j.abs() * sei.partial_molar_volume * dt / (2.0 * FARADAY)
}

/// Irreversible plating current density (A/m^2, non-positive). Active only while the plating
/// overpotential is negative. The interfacial electrolyte concentration is raised by
/// `electrolyte_rate_factor` per unit C-rate to account for electrolyte polarization.
pub fn plating_flux(
    plating: &PlatingParameters,
    plating_overpotential: f64,
    electrolyte_conc: f64,
    c_rate: f64,
    temperature: f64,
) -> f64 {
    if plating_overpotential >= 0.0 || plating.rate_constant == 0.0 {
        return 0.0;
    }
    let ce = electrolyte_conc * (1.0 + plating.electrolyte_rate_factor * c_rate.abs());
    -FARADAY * plating.rate_constant * ce * (-0.5 * plating_overpotential / thermal_voltage(temperature)).exp()
}

/// Plated-lithium thickness increment (m).
pub fn plated_thickness_increment(plating: &PlatingParameters, j: f64, dt: f64) -> f64 {
    j.abs() * plating.partial_molar_volume * dt / FARADAY
}

/// Dissolution current density (A/m^2, non-negative), gated to potentials above equilibrium.
pub fn dissolution_current(diss: &DissolutionParameters, positive_potential: f64, temperature: f64) -> f64 {
    let eta = positive_potential - diss.equilibrium_potential;
    if eta <= 0.0 || diss.exchange_current == 0.0 {
        return 0.0;
    }
    diss.exchange_current * (eta / (2.0 * thermal_voltage(temperature))).exp()
}

/// Rate of change of the positive active-material fraction due to dissolution (1/s, non-positive).
pub fn dissolution_rate(
    diss: &DissolutionParameters,
    positive: &ElectrodeParameters,
    active_fraction: f64,
    positive_potential: f64,
    temperature: f64,
) -> f64 {
    let j = dissolution_current(diss, positive_potential, temperature);
    -positive.specific_area(active_fraction) * j * diss.host_molar_volume / FARADAY
}

/// Hydrostatic stress at the particle surface (Pa); positive is tensile.
pub fn surface_hydrostatic_stress(e: &ElectrodeParameters, average_conc: f64, surface_conc: f64) -> f64 {
    2.0 * e.partial_molar_volume * e.youngs_modulus / (9.0 * (1.0 - e.poisson_ratio)) * (average_conc - surface_conc)
}

/// Rate of change of active-material fraction from cracking (1/s, non-positive).
pub fn crack_rate(e: &ElectrodeParameters, exponent: f64, stress: f64) -> f64 {
    if e.crack_rate == 0.0 || stress == 0.0 {
        return 0.0;
    }
    -e.crack_rate * (stress.abs() / e.critical_stress).powf(exponent)
}

/// Film resistance (Ohm) of SEI and plated lithium over the negative electrode's interfacial area.
pub fn film_resistance(p: &CellParameters, negative_fraction: f64, sei_thickness: f64, plated_thickness: f64) -> f64 {
    let area = p.negative.specific_area(negative_fraction) * p.negative.thickness * p.area;
    (sei_thickness / p.sei.conductivity + plated_thickness / p.plating.conductivity) / area
}
