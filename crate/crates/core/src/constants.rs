//! Canonical constants table.
//!
//! The table ships as `data/constants.toml` and is embedded at compile time;
//! [`RepositoryTable::from_toml_str`] parses alternative tables with the same
//! schema.

use std::collections::BTreeMap;

use once_cell::sync::Lazy;
use serde::Deserialize;

use crate::error::{from_toml, Error, Result};
use crate::trap::{Species, TrapConfig};

const CANONICAL_TABLE: &str = include_str!("../data/constants.toml");

static CANONICAL: Lazy<RepositoryTable> = Lazy::new(|| {
    RepositoryTable::from_toml_str(CANONICAL_TABLE).expect("embedded constants table is valid")
});

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    pub elementary_charge: f64,
    pub bohr_radius: f64,
    pub reduced_planck: f64,
    pub planck: f64,
    pub boltzmann: f64,
    pub vacuum_permittivity: f64,
    pub speed_of_light: f64,
    pub atomic_mass_unit: f64,
}

impl PhysicalConstants {
    /// Coulomb constant 1/(4 pi eps0).
    pub fn coulomb(&self) -> f64 {
        1.0 / (4.0 * std::f64::consts::PI * self.vacuum_permittivity)
    }

    /// Atomic unit of electric polarizability, 4 pi eps0 a0^3, in C^2 m^2 / J.
    pub fn polarizability_au(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.vacuum_permittivity * self.bohr_radius.powi(3)
    }

    fn validate(&self) -> Result<()> {
        let all = [
            ("elementary_charge", self.elementary_charge),
            ("bohr_radius", self.bohr_radius),
            ("reduced_planck", self.reduced_planck),
            ("planck", self.planck),
            ("boltzmann", self.boltzmann),
            ("vacuum_permittivity", self.vacuum_permittivity),
            ("speed_of_light", self.speed_of_light),
            ("atomic_mass_unit", self.atomic_mass_unit),
        ];
        for (name, value) in all {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "constant {name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesEntry {
    label: String,
    mass_u: f64,
    charge_number: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrapEntry {
    reference_species: String,
    radial_effective_frequency: f64,
    axial_frequency: f64,
    q_parameter: f64,
    rf_drive_frequency: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    constants: PhysicalConstants,
    species: BTreeMap<String, SpeciesEntry>,
    trap: TrapEntry,
}

/// Constants, named species and the default trap.
#[derive(Debug, Clone)]
pub struct RepositoryTable {
    pub constants: PhysicalConstants,
    pub species: BTreeMap<String, Species>,
    pub trap: TrapConfig,
}

impl RepositoryTable {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawTable = toml::from_str(text).map_err(|e| from_toml(text, e))?;
        raw.constants.validate()?;
        let mut species = BTreeMap::new();
        for (key, entry) in raw.species {
            let s = Species::new(
                entry.label,
                entry.mass_u * raw.constants.atomic_mass_unit,
                entry.charge_number,
                &raw.constants,
            )?;
            species.insert(key, s);
        }
        let reference = species.get(&raw.trap.reference_species).cloned().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "trap reference species {} is not defined",
                raw.trap.reference_species
            ))
        })?;
        let trap = TrapConfig::from_effective_radial(
            reference,
            raw.trap.radial_effective_frequency,
            raw.trap.axial_frequency,
            raw.trap.q_parameter,
            raw.trap.rf_drive_frequency,
        )?;
        Ok(Self {
            constants: raw.constants,
            species,
            trap,
        })
    }

    /// The embedded canonical table.
    pub fn canonical() -> &'static RepositoryTable {
        &CANONICAL
    }

    pub fn species(&self, key: &str) -> Result<&Species> {
        self.species
            .get(key)
            .ok_or_else(|| Error::SpeciesAbsent(key.to_string()))
    }
}

/// Shorthand for the canonical constants.
pub fn constants() -> &'static PhysicalConstants {
    &CANONICAL.constants
}

pub fn beryllium_ion() -> Species {
    CANONICAL.species["Be"].clone()
}

pub fn hd_plus() -> Species {
    CANONICAL.species["HD"].clone()
}

pub fn default_trap() -> TrapConfig {
    CANONICAL.trap.clone()
}
