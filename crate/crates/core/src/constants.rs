//! Physical constants and fixed numerical settings.

/// Faraday constant [C/mol].
pub const FARADAY: f64 = 96485.33212;
/// Molar gas constant [J/(mol K)].
pub const GAS_CONSTANT: f64 = 8.314462618;
pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const SECONDS_PER_DAY: f64 = 86400.0;

/// Number of equal-volume shells per particle.
pub const SHELLS: usize = 20;

/// Thermal voltage RT/F.
pub fn thermal_voltage(temperature_k: f64) -> f64 {
    GAS_CONSTANT * temperature_k / FARADAY
}
