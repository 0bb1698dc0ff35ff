use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trap::Species;

/// Langevin cooling of one species plus white-noise heating of all ions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermostatConfig {
    pub cooled_species: Species,
    /// K
    pub target_temperature: f64,
    /// 1/s, applied as -gamma v to the cooled species.
    pub friction_rate: f64,
    /// K/s per velocity component, applied to every ion.
    pub heating_rate_all_species: f64,
    pub rng_seed: u64,
}

/// Friction rate of the Doppler-cooled Be+ ions, 1/s.
pub const DEFAULT_FRICTION_RATE: f64 = 1e5;

impl ThermostatConfig {
    /// Laser cooling of `cooled_species` towards `temperature`, no heating.
    pub fn laser_cooled(cooled_species: Species, temperature: f64, seed: u64) -> Self {
        Self {
            cooled_species,
            target_temperature: temperature,
            friction_rate: DEFAULT_FRICTION_RATE,
            heating_rate_all_species: 0.0,
            rng_seed: seed,
        }
    }

    /// No friction, no kicks.
    pub fn off(cooled_species: Species) -> Self {
        Self {
            cooled_species,
            target_temperature: 0.0,
            friction_rate: 0.0,
            heating_rate_all_species: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.friction_rate >= 0.0 && self.friction_rate.is_finite()) {
            return Err(Error::InvalidParameter("friction rate must be >= 0".into()));
        }
        if !(self.target_temperature >= 0.0 && self.target_temperature.is_finite()) {
            return Err(Error::InvalidParameter("target temperature must be >= 0".into()));
        }
        if !(self.heating_rate_all_species >= 0.0 && self.heating_rate_all_species.is_finite()) {
            return Err(Error::InvalidParameter("heating rate must be >= 0".into()));
        }
        Ok(())
    }

    pub fn is_off(&self) -> bool {
        self.friction_rate == 0.0 && self.heating_rate_all_species == 0.0
    }
}
