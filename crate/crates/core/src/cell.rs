//! Coupled single-particle electrochemistry with degradation, advanced one time step at a time.
//!
//! Discharge current is positive.

use crate::constants::{FARADAY, SECONDS_PER_HOUR};
use crate::degradation::{
    crack_rate, dissolution_rate, film_resistance, plated_thickness_increment, plating_flux, sei_flux,
    sei_thickness_increment, surface_hydrostatic_stress, Mechanisms,
};
use crate::error::SimError;
use crate::kinetics::{exchange_current, overpotential};
use crate::params::{CellParameters, ElectrodeParameters};
use crate::particle::{DiffusionScratch, ShellGrid};
use crate::state::{CellState, Electrode, ElectrodeState, LamLedger, LliLedger};

/// Instantaneous electrochemical quantities for a state and applied current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub voltage: f64,
    /// Open-circuit voltage from the surface stoichiometries.
    pub surface_ocv: f64,
    /// Solid-phase potential of the negative electrode vs Li/Li+.
    pub negative_potential: f64,
    /// Solid-phase potential of the positive electrode vs Li/Li+.
    pub positive_potential: f64,
    pub negative_surface: f64,
    pub positive_surface: f64,
    /// Interfacial current densities, A/m^2.
    pub intercalation_negative: f64,
    pub intercalation_positive: f64,
    pub sei: f64,
    pub plating: f64,
    /// Active-fraction loss rates, 1/s (non-positive).
    pub crack_negative: f64,
    pub crack_positive: f64,
    pub dissolution: f64,
}

/// Bookkeeping from one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub voltage: f64,
    pub lli: LliLedger,
}

/// Cell parameters with precomputed particle grids and the set of active mechanisms.
#[derive(Debug, Clone)]
pub struct CellModel {
    pub params: CellParameters,
    pub mechanisms: Mechanisms,
    negative_grid: ShellGrid,
    positive_grid: ShellGrid,
    scratch: DiffusionScratch,
}

fn surface_stoich(
    grid: &ShellGrid,
    e: &ElectrodeParameters,
    s: &ElectrodeState,
    flux: f64,
    electrode: Electrode,
) -> Result<f64, SimError> {
    let cs = grid.surface_concentration(&s.concentration, e.diffusivity, flux);
    let x = cs / e.max_concentration;
    if !(x > 0.0 && x < 1.0) {
        return Err(SimError::Saturation {
            electrode,
            stoichiometry: x,
        });
    }
    Ok(x)
}

impl CellModel {
    pub fn new(params: CellParameters, mechanisms: Mechanisms) -> Self {
        let negative_grid = ShellGrid::with_default_shells(params.negative.particle_radius);
        let positive_grid = ShellGrid::with_default_shells(params.positive.particle_radius);
        Self {
            params,
            mechanisms,
            negative_grid,
            positive_grid,
            scratch: DiffusionScratch::default(),
        }
    }

    /// Interfacial area of an electrode, m^2.
    fn interface_area(&self, e: &ElectrodeParameters, eps: f64) -> f64 {
        e.specific_area(eps) * e.thickness * self.params.area
    }

    pub fn evaluate(&self, state: &CellState, current: f64) -> Result<Evaluation, SimError> {
        let p = &self.params;
        let t = p.temperature;
        let ce = p.electrolyte_concentration;
        let neg_area = self.interface_area(&p.negative, state.negative.active_fraction);
        let pos_area = self.interface_area(&p.positive, state.positive.active_fraction);
        let j_total = current / neg_area;
        let j_pos = -current / pos_area;

        let r_film_area = state.sei_thickness / p.sei.conductivity + state.plated_thickness / p.plating.conductivity;
        let sei_drop = j_total * state.sei_thickness / p.sei.conductivity;
        let film_drop = j_total * r_film_area;

        // side reactions from the potential at the total current
        let (mut j_sei, mut j_pl) = (0.0, 0.0);
        if self.mechanisms.sei || self.mechanisms.plating {
            let x_s = surface_stoich(
                &self.negative_grid,
                &p.negative,
                &state.negative,
                j_total / FARADAY,
                Electrode::Negative,
            )?;
            let i0 = exchange_current(&p.negative, x_s * p.negative.max_concentration, ce);
            let phi = p.negative.ocp.value(x_s) + overpotential(j_total, i0, t, Electrode::Negative)?;
            if self.mechanisms.sei {
                j_sei = sei_flux(&p.sei, state.sei_thickness, phi, sei_drop, t);
            }
            if self.mechanisms.plating {
                j_pl = plating_flux(&p.plating, phi - film_drop, ce, current / p.one_c(), t);
            }
        }
        let j_int = j_total - j_sei - j_pl;

        let x_s = surface_stoich(
            &self.negative_grid,
            &p.negative,
            &state.negative,
            j_int / FARADAY,
            Electrode::Negative,
        )?;
        let y_s = surface_stoich(
            &self.positive_grid,
            &p.positive,
            &state.positive,
            j_pos / FARADAY,
            Electrode::Positive,
        )?;
        let i0n = exchange_current(&p.negative, x_s * p.negative.max_concentration, ce);
        let i0p = exchange_current(&p.positive, y_s * p.positive.max_concentration, ce);
        let un = p.negative.ocp.value(x_s);
        let up = p.positive.ocp.value(y_s);
        let phi_n = un + overpotential(j_int, i0n, t, Electrode::Negative)?;
        let phi_p = up + overpotential(j_pos, i0p, t, Electrode::Positive)?;
        let r_film = film_resistance(
            p,
            state.negative.active_fraction,
            state.sei_thickness,
            state.plated_thickness,
        );
        let voltage = phi_p - phi_n - current * (p.ohmic_resistance + r_film);

        // cracking is fatigue from cycling: no damage accrues while the cell is idle
        let (mut crack_n, mut crack_p) = (0.0, 0.0);
        if self.mechanisms.cracking && current != 0.0 {
            let sn = surface_hydrostatic_stress(
                &p.negative,
                state.negative.average_concentration(),
                x_s * p.negative.max_concentration,
            );
            let sp = surface_hydrostatic_stress(
                &p.positive,
                state.positive.average_concentration(),
                y_s * p.positive.max_concentration,
            );
            crack_n = crack_rate(&p.negative, p.crack_exponent, sn);
            crack_p = crack_rate(&p.positive, p.crack_exponent, sp);
        }
        let diss = if self.mechanisms.dissolution {
            dissolution_rate(&p.dissolution, &p.positive, state.positive.active_fraction, phi_p, t)
        } else {
            0.0
        };

        if !voltage.is_finite() {
            return Err(SimError::NonFinite("terminal voltage"));
        }
        Ok(Evaluation {
            voltage,
            surface_ocv: up - un,
            negative_potential: phi_n,
            positive_potential: phi_p,
            negative_surface: x_s,
            positive_surface: y_s,
            intercalation_negative: j_int,
            intercalation_positive: j_pos,
            sei: j_sei,
            plating: j_pl,
            crack_negative: crack_n,
            crack_positive: crack_p,
            dissolution: diss,
        })
    }

    pub fn terminal_voltage(&self, state: &CellState, current: f64) -> Result<f64, SimError> {
        Ok(self.evaluate(state, current)?.voltage)
    }

    /// Advance `state` by `dt` seconds at constant `current`.
    ///
    /// Particle diffusion runs first with the current active fractions; active material lost
    /// during the step then traps the lithium it holds, so the ledger closes exactly.
    pub fn step(&mut self, state: &mut CellState, current: f64, dt: f64) -> Result<StepReport, SimError> {
        let ev = self.evaluate(state, current)?;
        let p = &self.params;
        let neg_area = self.interface_area(&p.negative, state.negative.active_fraction);

        self.negative_grid.advance(
            &mut state.negative.concentration,
            p.negative.diffusivity,
            ev.intercalation_negative / FARADAY,
            dt,
            &mut self.scratch,
        );
        self.positive_grid.advance(
            &mut state.positive.concentration,
            p.positive.diffusivity,
            ev.intercalation_positive / FARADAY,
            dt,
            &mut self.scratch,
        );
        check_bounds(&state.negative, &p.negative, Electrode::Negative)?;
        check_bounds(&state.positive, &p.positive, Electrode::Positive)?;

        let mut lli = LliLedger {
            sei: -ev.sei * neg_area * dt / FARADAY,
            plating: -ev.plating * neg_area * dt / FARADAY,
            ..LliLedger::default()
        };
        let lam = LamLedger {
            negative_crack: -ev.crack_negative * dt,
            positive_crack: -ev.crack_positive * dt,
            positive_dissolution: -ev.dissolution * dt,
        };
        let neg_loss = lam.negative_crack;
        let pos_loss = lam.positive_crack + lam.positive_dissolution;
        if neg_loss > 0.0 || pos_loss > 0.0 {
            let neg_trap = p.negative.thickness * p.area * state.negative.average_concentration();
            let pos_trap = p.positive.thickness * p.area * state.positive.average_concentration();
            lli.crack = neg_trap * lam.negative_crack + pos_trap * lam.positive_crack;
            lli.dissolution = pos_trap * lam.positive_dissolution;
            state.negative.active_fraction -= neg_loss;
            state.positive.active_fraction -= pos_loss;
            if state.negative.active_fraction <= 0.0 {
                return Err(SimError::CapacityCollapse {
                    electrode: Electrode::Negative,
                });
            }
            if state.positive.active_fraction <= 0.0 {
                return Err(SimError::CapacityCollapse {
                    electrode: Electrode::Positive,
                });
            }
            state.lam = state.lam + lam;
        }
        state.lli += lli;
        state.sei_thickness += sei_thickness_increment(&p.sei, ev.sei, dt);
        state.plated_thickness += plated_thickness_increment(&p.plating, ev.plating, dt);
        state.throughput_ah += current.abs() * dt / SECONDS_PER_HOUR;
        state.throughput_wh += (current * ev.voltage).abs() * dt / SECONDS_PER_HOUR;
        Ok(StepReport {
            voltage: ev.voltage,
            lli,
        })
    }
}

fn check_bounds(s: &ElectrodeState, e: &ElectrodeParameters, electrode: Electrode) -> Result<(), SimError> {
    for &c in &s.concentration {
        if !(c >= 0.0 && c <= e.max_concentration) {
            return Err(SimError::Saturation {
                electrode,
                stoichiometry: c / e.max_concentration,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esoh::{capacity, esoh, fresh_state, soc};

    fn model(name: &str, m: Mechanisms) -> CellModel {
        CellModel::new(CellParameters::bundled(name).unwrap(), m)
    }

    #[test]
    fn rest_voltage_is_open_circuit() {
        let m = model("nmc111", Mechanisms::none());
        let s = fresh_state(&m.params, 1.0).unwrap();
        let v = m.terminal_voltage(&s, 0.0).unwrap();
        assert!((v - 4.2).abs() < 1e-6, "{v}");
        let s0 = fresh_state(&m.params, 0.0).unwrap();
        assert!((m.terminal_voltage(&s0, 0.0).unwrap() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn one_c_drop_is_modest() {
        let m = model("nmc111", Mechanisms::none());
        let s = fresh_state(&m.params, 0.5).unwrap();
        let ocv = m.terminal_voltage(&s, 0.0).unwrap();
        let v = m.terminal_voltage(&s, m.params.one_c()).unwrap();
        assert!(ocv - v > 0.03 && ocv - v < 0.15, "{}", ocv - v);
        let vc = m.terminal_voltage(&s, -m.params.one_c()).unwrap();
        assert!(vc > ocv);
    }

    #[test]
    fn one_c_discharge_delivers_rated_capacity() {
        let mut m = model("nmc622_25c", Mechanisms::none());
        let mut s = fresh_state(&m.params, 1.0).unwrap();
        let i = m.params.one_c();
        let mut t = 0.0;
        loop {
            let r = m.step(&mut s, i, 1.0).unwrap();
            t += 1.0;
            if r.voltage < m.params.lower_voltage {
                break;
            }
        }
        let delivered = i * t / 3600.0;
        assert!(delivered / m.params.nominal_capacity_ah > 0.9 && delivered / m.params.nominal_capacity_ah < 1.01);
    }

    #[test]
    fn coulomb_counting_matches_soc() {
        let mut m = model("nmc622_45c", Mechanisms::none());
        let mut s = fresh_state(&m.params, 0.9).unwrap();
        let w = esoh(&s, &m.params).unwrap().window;
        let cap = capacity(&s, &m.params).unwrap();
        for _ in 0..1800 {
            m.step(&mut s, 0.5 * m.params.one_c(), 1.0).unwrap();
        }
        let expected = 0.9 - 0.25 * m.params.nominal_capacity_ah / cap;
        assert!((soc(&s, &m.params, &w) - expected).abs() < 1e-9);
    }

    #[test]
    fn mechanisms_off_conserve_lithium() {
        let mut m = model("nmc111", Mechanisms::none());
        let mut s = fresh_state(&m.params, 0.8).unwrap();
        let n0 = s.cyclable_lithium(&m.params);
        for k in 0..5000 {
            let i = if k % 1000 < 500 { 5.0 } else { -4.0 };
            m.step(&mut s, i, 1.0).unwrap();
        }
        assert!((s.cyclable_lithium(&m.params) - n0).abs() / n0 < 1e-12);
        assert_eq!(s.lli.total(), 0.0);
    }

    #[test]
    fn ledger_closes_with_all_mechanisms() {
        let mut m = model("nmc622_45c", Mechanisms::all());
        let mut s = fresh_state(&m.params, 0.7).unwrap();
        for k in 0..20000 {
            let i = if k % 2000 < 1000 { 2.5 } else { -2.5 };
            m.step(&mut s, i, 1.0).unwrap();
        }
        assert!(s.lli.total() > 0.0);
        let err = s.ledger_closure_error(&m.params);
        assert!(err < 1e-10, "{err} {:?}", s.lli);
    }

    #[test]
    fn starving_the_surface_is_an_error() {
        let mut m = model("nmc111", Mechanisms::none());
        let mut s = fresh_state(&m.params, 0.02).unwrap();
        let mut failed = false;
        for _ in 0..3600 {
            if m.step(&mut s, 3.0 * m.params.one_c(), 1.0).is_err() {
                failed = true;
                break;
            }
        }
        assert!(failed);
    }
}
