//! Symmetric Butler-Volmer intercalation kinetics.

use crate::constants::{thermal_voltage, FARADAY};
use crate::error::SimError;
use crate::params::ElectrodeParameters;
use crate::state::Electrode;

/// Exchange current density, A/m^2, for a symmetric (alpha = 0.5) reaction.
pub fn exchange_current(p: &ElectrodeParameters, surface_conc: f64, electrolyte_conc: f64) -> f64 {
    let cs = surface_conc.clamp(0.0, p.max_concentration);
    p.rate_constant * FARADAY * (electrolyte_conc * cs * (p.max_concentration - cs)).sqrt()
}

/// Overpotential that drives interfacial current density `j` (A/m^2, positive for
/// delithiation) through exchange current `i0`.
pub fn overpotential(j: f64, i0: f64, temperature: f64, electrode: Electrode) -> Result<f64, SimError> {
    if i0 <= 0.0 {
        if j == 0.0 {
            return Ok(0.0);
        }
        return Err(SimError::KineticStarvation { electrode });
    }
    Ok(2.0 * thermal_voltage(temperature) * (j / (2.0 * i0)).asinh())
}

/// Butler-Volmer current for a given overpotential; inverse of [`overpotential`].
pub fn current_density(eta: f64, i0: f64, temperature: f64) -> f64 {
    2.0 * i0 * (eta / (2.0 * thermal_voltage(temperature))).sinh()
}
