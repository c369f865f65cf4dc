//! Cell descriptions: geometry, transport, kinetics and degradation parameters.
//!
//! Cells are read from TOML files whose keys carry their SI units.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::ParamError;
use crate::ocp::OcpCurve;

/// Names of the cell files shipped with the crate.
pub const BUNDLED_CELLS: [&str; 3] = ["nmc111", "nmc622_25c", "nmc622_45c"];

const NMC111: &str = include_str!("../data/cells/nmc111.toml");
const NMC622_25C: &str = include_str!("../data/cells/nmc622_25c.toml");
const NMC622_45C: &str = include_str!("../data/cells/nmc622_45c.toml");

#[derive(Debug, Clone)]
pub struct ElectrodeParameters {
    pub ocp: Arc<OcpCurve>,
    /// mol/m^3
    pub max_concentration: f64,
    /// m^2/s
    pub diffusivity: f64,
    /// m
    pub particle_radius: f64,
    /// m
    pub thickness: f64,
    /// Initial active-material volume fraction.
    pub active_fraction: f64,
    /// Intercalation rate constant, m/s (exchange current = k F ce^a cs^a (cmax-cs)^(1-a)).
    pub rate_constant: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// Partial molar volume of lithium in the host, m^3/mol.
    pub partial_molar_volume: f64,
    /// Pa
    pub critical_stress: f64,
    /// Cracking-driven active material loss rate at critical stress, 1/s.
    pub crack_rate: f64,
}

impl ElectrodeParameters {
    /// Specific interfacial area for active fraction `eps`, 1/m.
    pub fn specific_area(&self, eps: f64) -> f64 {
        3.0 * eps / self.particle_radius
    }

    /// Moles of lithium storable per unit stoichiometry at active fraction `eps`.
    pub fn site_moles(&self, eps: f64, area: f64) -> f64 {
        eps * self.thickness * area * self.max_concentration
    }
}

#[derive(Debug, Clone)]
pub struct SeiParameters {
    /// Solvent reduction rate constant, m/s.
    pub rate_constant: f64,
    /// Solvent diffusivity through the film, m^2/s.
    pub solvent_diffusivity: f64,
    pub transfer_coefficient: f64,
    /// V vs Li/Li+
    pub reaction_potential: f64,
    /// S/m
    pub conductivity: f64,
    /// m^3/mol
    pub partial_molar_volume: f64,
    /// mol/m^3
    pub solvent_concentration: f64,
    /// m
    pub initial_thickness: f64,
}

#[derive(Debug, Clone)]
pub struct PlatingParameters {
    /// m/s
    pub rate_constant: f64,
    /// S/m
    pub conductivity: f64,
    /// m^3/mol
    pub partial_molar_volume: f64,
    /// Fractional rise of interfacial electrolyte concentration per C-rate of charge.
    pub electrolyte_rate_factor: f64,
}

#[derive(Debug, Clone)]
pub struct DissolutionParameters {
    /// A/m^2
    pub exchange_current: f64,
    /// V vs Li/Li+
    pub equilibrium_potential: f64,
    /// Host volume removed per mole of dissolved metal, m^3/mol.
    pub host_molar_volume: f64,
}

#[derive(Debug, Clone)]
pub struct CellParameters {
    pub name: String,
    pub nominal_capacity_ah: f64,
    /// Electrode plate area, m^2.
    pub area: f64,
    /// mol/m^3
    pub electrolyte_concentration: f64,
    /// K
    pub temperature: f64,
    /// Ohm
    pub ohmic_resistance: f64,
    pub upper_voltage: f64,
    pub lower_voltage: f64,
    pub negative: ElectrodeParameters,
    pub positive: ElectrodeParameters,
    /// Negative stoichiometry at full charge of the fresh cell; fixes the lithium inventory.
    pub full_charge_negative_stoichiometry: f64,
    pub sei: SeiParameters,
    pub plating: PlatingParameters,
    pub dissolution: DissolutionParameters,
    pub crack_exponent: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CellFile {
    name: String,
    nominal_capacity_ah: f64,
    electrode_area_m2: f64,
    #[serde(default = "default_electrolyte")]
    electrolyte_concentration_mol_per_m3: f64,
    temperature_k: f64,
    ohmic_resistance_ohm: f64,
    upper_voltage_v: f64,
    lower_voltage_v: f64,
    negative: ElectrodeFile,
    positive: ElectrodeFile,
    lithium: LithiumFile,
    sei: SeiFile,
    plating: PlatingFile,
    dissolution: DissolutionFile,
    cracking: CrackingFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ElectrodeFile {
    ocp: String,
    max_concentration_mol_per_m3: f64,
    diffusivity_m2_per_s: f64,
    particle_radius_m: f64,
    thickness_m: f64,
    active_fraction: f64,
    rate_constant_m_per_s: f64,
    youngs_modulus_pa: f64,
    poisson_ratio: f64,
    partial_molar_volume_m3_per_mol: f64,
    critical_stress_pa: f64,
    crack_rate_per_s: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LithiumFile {
    full_charge_negative_stoichiometry: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeiFile {
    rate_constant_m_per_s: f64,
    solvent_diffusivity_m2_per_s: f64,
    #[serde(default = "half")]
    transfer_coefficient: f64,
    reaction_potential_v: f64,
    conductivity_s_per_m: f64,
    partial_molar_volume_m3_per_mol: f64,
    solvent_concentration_mol_per_m3: f64,
    initial_thickness_m: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlatingFile {
    rate_constant_m_per_s: f64,
    conductivity_s_per_m: f64,
    partial_molar_volume_m3_per_mol: f64,
    #[serde(default)]
    electrolyte_rate_factor: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DissolutionFile {
    exchange_current_a_per_m2: f64,
    equilibrium_potential_v: f64,
    host_molar_volume_m3_per_mol: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CrackingFile {
    exponent: f64,
}

fn default_electrolyte() -> f64 {
    1000.0
}

fn half() -> f64 {
    0.5
}

fn resolve_ocp(name: &str, base: Option<&Path>) -> Result<Arc<OcpCurve>, ParamError> {
    match OcpCurve::bundled(name) {
        Ok(c) => Ok(Arc::new(c)),
        Err(ParamError::UnknownBundled { .. }) => {
            let path = match base {
                Some(dir) => dir.join(name),
                None => Path::new(name).to_path_buf(),
            };
            Ok(Arc::new(OcpCurve::load(&path)?))
        }
        Err(e) => Err(e),
    }
}

impl ElectrodeFile {
    fn build(self, base: Option<&Path>) -> Result<ElectrodeParameters, ParamError> {
        Ok(ElectrodeParameters {
            ocp: resolve_ocp(&self.ocp, base)?,
            max_concentration: self.max_concentration_mol_per_m3,
            diffusivity: self.diffusivity_m2_per_s,
            particle_radius: self.particle_radius_m,
            thickness: self.thickness_m,
            active_fraction: self.active_fraction,
            rate_constant: self.rate_constant_m_per_s,
            youngs_modulus: self.youngs_modulus_pa,
            poisson_ratio: self.poisson_ratio,
            partial_molar_volume: self.partial_molar_volume_m3_per_mol,
            critical_stress: self.critical_stress_pa,
            crack_rate: self.crack_rate_per_s,
        })
    }
}

fn positive(field: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ParamError::Invalid {
            field,
            value,
            reason: "must be positive and finite",
        })
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ParamError::Invalid {
            field,
            value,
            reason: "must be non-negative and finite",
        })
    }
}

fn open_unit(field: &'static str, value: f64) -> Result<(), ParamError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(ParamError::Invalid {
            field,
            value,
            reason: "must lie strictly between 0 and 1",
        })
    }
}

fn check_electrode(e: &ElectrodeParameters) -> Result<(), ParamError> {
    positive("max_concentration_mol_per_m3", e.max_concentration)?;
    positive("diffusivity_m2_per_s", e.diffusivity)?;
    positive("particle_radius_m", e.particle_radius)?;
    positive("thickness_m", e.thickness)?;
    open_unit("active_fraction", e.active_fraction)?;
    positive("rate_constant_m_per_s", e.rate_constant)?;
    positive("youngs_modulus_pa", e.youngs_modulus)?;
    if !(0.0..0.5).contains(&e.poisson_ratio) {
        return Err(ParamError::Invalid {
            field: "poisson_ratio",
            value: e.poisson_ratio,
            reason: "must lie in [0, 0.5)",
        });
    }
    positive("partial_molar_volume_m3_per_mol", e.partial_molar_volume)?;
    positive("critical_stress_pa", e.critical_stress)?;
    non_negative("crack_rate_per_s", e.crack_rate)
}

impl CellParameters {
    pub fn from_toml_str(text: &str) -> Result<Self, ParamError> {
        Self::from_toml_with_base(text, None)
    }

    /// Load a cell file; relative OCP table paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ParamError> {
        let text = std::fs::read_to_string(path).map_err(|source| ParamError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_with_base(&text, path.parent())
    }

    pub fn bundled(name: &str) -> Result<Self, ParamError> {
        Self::from_toml_str(Self::bundled_source(name)?)
    }

    /// TOML text of a bundled cell.
    pub fn bundled_source(name: &str) -> Result<&'static str, ParamError> {
        match name {
            "nmc111" => Ok(NMC111),
            "nmc622_25c" => Ok(NMC622_25C),
            "nmc622_45c" => Ok(NMC622_45C),
            _ => Err(ParamError::UnknownBundled {
                kind: "cell",
                name: name.to_string(),
            }),
        }
    }

    fn from_toml_with_base(text: &str, base: Option<&Path>) -> Result<Self, ParamError> {
        let f: CellFile = toml::from_str(text)?;
        let positive_electrode = f.positive.build(base)?;
        let host_molar_volume = f
            .dissolution
            .host_molar_volume_m3_per_mol
            .unwrap_or(1.0 / positive_electrode.max_concentration);
        let cell = CellParameters {
            name: f.name,
            nominal_capacity_ah: f.nominal_capacity_ah,
            area: f.electrode_area_m2,
            electrolyte_concentration: f.electrolyte_concentration_mol_per_m3,
            temperature: f.temperature_k,
            ohmic_resistance: f.ohmic_resistance_ohm,
            upper_voltage: f.upper_voltage_v,
            lower_voltage: f.lower_voltage_v,
            negative: f.negative.build(base)?,
            positive: positive_electrode,
            full_charge_negative_stoichiometry: f.lithium.full_charge_negative_stoichiometry,
            sei: SeiParameters {
                rate_constant: f.sei.rate_constant_m_per_s,
                solvent_diffusivity: f.sei.solvent_diffusivity_m2_per_s,
                transfer_coefficient: f.sei.transfer_coefficient,
                reaction_potential: f.sei.reaction_potential_v,
                conductivity: f.sei.conductivity_s_per_m,
                partial_molar_volume: f.sei.partial_molar_volume_m3_per_mol,
                solvent_concentration: f.sei.solvent_concentration_mol_per_m3,
                initial_thickness: f.sei.initial_thickness_m,
            },
            plating: PlatingParameters {
                rate_constant: f.plating.rate_constant_m_per_s,
                conductivity: f.plating.conductivity_s_per_m,
                partial_molar_volume: f.plating.partial_molar_volume_m3_per_mol,
                electrolyte_rate_factor: f.plating.electrolyte_rate_factor,
            },
            dissolution: DissolutionParameters {
                exchange_current: f.dissolution.exchange_current_a_per_m2,
                equilibrium_potential: f.dissolution.equilibrium_potential_v,
                host_molar_volume,
            },
            crack_exponent: f.cracking.exponent,
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        positive("nominal_capacity_ah", self.nominal_capacity_ah)?;
        positive("electrode_area_m2", self.area)?;
        positive("electrolyte_concentration_mol_per_m3", self.electrolyte_concentration)?;
        positive("temperature_k", self.temperature)?;
        non_negative("ohmic_resistance_ohm", self.ohmic_resistance)?;
        positive("lower_voltage_v", self.lower_voltage)?;
        if self.upper_voltage <= self.lower_voltage {
            return Err(ParamError::Invalid {
                field: "upper_voltage_v",
                value: self.upper_voltage,
                reason: "must exceed lower_voltage_v",
            });
        }
        check_electrode(&self.negative)?;
        check_electrode(&self.positive)?;
        open_unit(
            "full_charge_negative_stoichiometry",
            self.full_charge_negative_stoichiometry,
        )?;
        let s = &self.sei;
        non_negative("sei.rate_constant_m_per_s", s.rate_constant)?;
        positive("sei.solvent_diffusivity_m2_per_s", s.solvent_diffusivity)?;
        open_unit("sei.transfer_coefficient", s.transfer_coefficient)?;
        positive("sei.conductivity_s_per_m", s.conductivity)?;
        positive("sei.partial_molar_volume_m3_per_mol", s.partial_molar_volume)?;
        non_negative("sei.solvent_concentration_mol_per_m3", s.solvent_concentration)?;
        positive("sei.initial_thickness_m", s.initial_thickness)?;
        let p = &self.plating;
        non_negative("plating.rate_constant_m_per_s", p.rate_constant)?;
        positive("plating.conductivity_s_per_m", p.conductivity)?;
        positive("plating.partial_molar_volume_m3_per_mol", p.partial_molar_volume)?;
        non_negative("plating.electrolyte_rate_factor", p.electrolyte_rate_factor)?;
        non_negative(
            "dissolution.exchange_current_a_per_m2",
            self.dissolution.exchange_current,
        )?;
        positive(
            "dissolution.equilibrium_potential_v",
            self.dissolution.equilibrium_potential,
        )?;
        positive(
            "dissolution.host_molar_volume_m3_per_mol",
            self.dissolution.host_molar_volume,
        )?;
        positive("cracking.exponent", self.crack_exponent)?;
        Ok(())
    }

    /// Current magnitude of a 1C rate, A.
    pub fn one_c(&self) -> f64 {
        self.nominal_capacity_ah
    }
}
