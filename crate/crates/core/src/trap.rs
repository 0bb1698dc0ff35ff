//! Species, the linear quadrupole trap in the pseudopotential approximation,
//! and the Lamb-Dicke criterion.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    /// kg
    pub mass: f64,
    /// C
    pub charge: f64,
}

impl Species {
    pub fn new(
        name: impl Into<String>,
        mass: f64,
        charge_number: u32,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        let name = name.into();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass of {name} must be positive")));
        }
        if charge_number == 0 {
            return Err(Error::InvalidParameter(format!("charge of {name} must be positive")));
        }
        Ok(Self {
            name,
            mass,
            charge: f64::from(charge_number) * constants.elementary_charge,
        })
    }

    pub fn charge_to_mass(&self) -> f64 {
        self.charge / self.mass
    }
}

/// Secular frequencies along x, y, z in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularFrequencies {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SecularFrequencies {
    pub fn max(&self) -> f64 {
        self.x.max(self.y).max(self.z)
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }
}

/// Trap described by the secular frequencies of a reference species.
///
/// `q_parameter` and `rf_drive_frequency` are carried for reporting only.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapConfig {
    pub reference_species: Species,
    /// Pure-RF radial secular frequency of the reference species, Hz.
    pub radial_secular_frequency_rf: f64,
    pub axial_secular_frequency: f64,
    pub q_parameter: f64,
    pub rf_drive_frequency: f64,
}

impl TrapConfig {
    pub fn new(
        reference_species: Species,
        radial_secular_frequency_rf: f64,
        axial_secular_frequency: f64,
        q_parameter: f64,
        rf_drive_frequency: f64,
    ) -> Result<Self> {
        if !(q_parameter > 0.0 && q_parameter < 0.9) {
            return Err(Error::InvalidParameter(format!(
                "q parameter {q_parameter} outside (0, 0.9)"
            )));
        }
        for (name, v) in [
            ("radial frequency", radial_secular_frequency_rf),
            ("axial frequency", axial_secular_frequency),
            ("rf drive frequency", rf_drive_frequency),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        let trap = Self {
            reference_species,
            radial_secular_frequency_rf,
            axial_secular_frequency,
            q_parameter,
            rf_drive_frequency,
        };
        let reference = trap.reference_species.clone();
        trap.secular_frequencies(&reference)?;
        Ok(trap)
    }

    /// Builds the trap from the effective (defocusing-corrected) radial
    /// frequency of the reference species.
    pub fn from_effective_radial(
        reference_species: Species,
        radial_effective: f64,
        axial: f64,
        q_parameter: f64,
        rf_drive_frequency: f64,
    ) -> Result<Self> {
        let rf = (radial_effective * radial_effective + 0.5 * axial * axial).sqrt();
        Self::new(reference_species, rf, axial, q_parameter, rf_drive_frequency)
    }

    /// Copy with every configured frequency multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.reference_species.clone(),
            self.radial_secular_frequency_rf * s,
            self.axial_secular_frequency * s,
            self.q_parameter,
            self.rf_drive_frequency * s,
        )
    }

    /// Secular frequencies of `species` in this trap.
    ///
    /// The pure-RF radial part scales with q/m relative to the reference
    /// species, the axial part with sqrt(q/m); the radial result includes the
    /// -f_z^2/2 defocusing of the end-cap field.
    pub fn secular_frequencies(&self, species: &Species) -> Result<SecularFrequencies> {
        let ratio = species.charge_to_mass() / self.reference_species.charge_to_mass();
        let radial_rf = self.radial_secular_frequency_rf * ratio;
        let axial = self.axial_secular_frequency * ratio.sqrt();
        let radial_sq = radial_rf * radial_rf - 0.5 * axial * axial;
        if !(radial_sq > 0.0) {
            return Err(Error::UntrappedSpecies {
                species: species.name.clone(),
                freq_sq: radial_sq,
            });
        }
        let radial = radial_sq.sqrt();
        Ok(SecularFrequencies {
            x: radial,
            y: radial,
            z: axial,
        })
    }

    /// Spring constants m (2 pi f)^2 per axis, N/m.
    pub fn spring_constants(&self, species: &Species) -> Result<Vector3<f64>> {
        let f = self.secular_frequencies(species)?;
        let k = |f: f64| species.mass * (2.0 * PI * f).powi(2);
        Ok(Vector3::new(k(f.x), k(f.y), k(f.z)))
    }

    /// Pseudopotential force on an ion of `species` at `position`.
    pub fn pseudopotential_force(
        &self,
        position: &Vector3<f64>,
        species: &Species,
    ) -> Result<Vector3<f64>> {
        let k = self.spring_constants(species)?;
        Ok(-k.component_mul(position))
    }
}

/// Free-function form of [`TrapConfig::secular_frequencies`].
pub fn secular_frequencies(species: &Species, trap: &TrapConfig) -> Result<SecularFrequencies> {
    trap.secular_frequencies(species)
}

pub fn pseudopotential_force(
    position: &Vector3<f64>,
    species: &Species,
    trap: &TrapConfig,
) -> Result<Vector3<f64>> {
    trap.pseudopotential_force(position, species)
}

/// True when the motion range is below the reduced wavelength lambda/2pi.
pub fn is_lamb_dicke(motion_range: f64, wavelength: f64) -> bool {
    motion_range < wavelength / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{beryllium_ion, constants, default_trap, hd_plus};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn hd_trap() -> TrapConfig {
        TrapConfig::from_effective_radial(hd_plus(), 0.81e6, 94.5e3, 0.15, 15.3e6).unwrap()
    }

    #[test]
    fn reference_species_reproduces_configured_frequencies() {
        let trap = hd_trap();
        let f = trap.secular_frequencies(&hd_plus()).unwrap();
        assert_relative_eq!(f.x, 0.81e6, max_relative = 1e-14);
        assert_eq!(f.x, f.y);
        assert_relative_eq!(f.z, 94.5e3, max_relative = 1e-15);
    }

    #[test]
    fn beryllium_radial_ratio_follows_inverse_mass() {
        // Without the axial correction the ratio is m_HD / m_Be.
        let trap = TrapConfig::new(hd_plus(), 0.81e6, 1.0, 0.15, 15.3e6).unwrap();
        let be = trap.secular_frequencies(&beryllium_ion()).unwrap();
        assert_relative_eq!(be.x / 0.81e6, 3.0214 / 9.0122, max_relative = 1e-9);
        assert!((be.x / 0.81e6 - 0.3353).abs() < 1e-4);
    }

    #[test]
    fn untrapped_species_is_rejected() {
        let trap = TrapConfig::new(hd_plus(), 0.81e6, 0.8e6, 0.15, 15.3e6).unwrap();
        // Be+ radial rf = 0.27 MHz, axial = 0.46 MHz: defocused.
        assert!(matches!(
            trap.secular_frequencies(&beryllium_ion()),
            Err(Error::UntrappedSpecies { .. })
        ));
        assert!(TrapConfig::new(hd_plus(), 0.1e6, 0.5e6, 0.15, 15.3e6).is_err());
    }

    #[test]
    fn q_parameter_range() {
        assert!(TrapConfig::new(hd_plus(), 0.81e6, 1e5, 0.0, 15.3e6).is_err());
        assert!(TrapConfig::new(hd_plus(), 0.81e6, 1e5, 0.9, 15.3e6).is_err());
    }

    #[test]
    fn force_at_one_micron() {
        let trap = hd_trap();
        let hd = hd_plus();
        let f = trap
            .pseudopotential_force(&Vector3::new(1e-6, 0.0, 0.0), &hd)
            .unwrap();
        let expected = hd.mass * (2.0 * PI * 0.81e6f64).powi(2) * 1e-6;
        assert_relative_eq!(-f.x, expected, max_relative = 1e-13);
        assert_eq!(f.y, 0.0);
        assert_eq!(
            trap.pseudopotential_force(&Vector3::zeros(), &hd).unwrap(),
            Vector3::zeros()
        );
    }

    #[test]
    fn lamb_dicke_condition() {
        assert!(is_lamb_dicke(16.8e-6, 228e-6));
        assert!(!is_lamb_dicke(228e-6 / (2.0 * PI), 228e-6));
        assert!(!is_lamb_dicke(36.3e-6, 228e-6));
        assert!(!is_lamb_dicke(16.8e-6, 10e-6));
    }

    #[test]
    fn default_trap_is_prolate() {
        let trap = default_trap();
        for s in [hd_plus(), beryllium_ion()] {
            let f = trap.secular_frequencies(&s).unwrap();
            assert!(f.x > 3.0 * f.z);
        }
        assert!(constants().planck > 0.0);
    }

    proptest! {
        #[test]
        fn frequencies_are_homogeneous(s in 0.1f64..10.0) {
            let trap = hd_trap();
            let scaled = trap.scaled(s).unwrap();
            for sp in [hd_plus(), beryllium_ion()] {
                let a = trap.secular_frequencies(&sp).unwrap();
                let b = scaled.secular_frequencies(&sp).unwrap();
                prop_assert!((b.x - s * a.x).abs() <= 1e-12 * b.x);
                prop_assert!((b.z - s * a.z).abs() <= 1e-12 * b.z);
            }
        }

        #[test]
        fn force_is_odd_and_linear(x in -1e-4f64..1e-4, y in -1e-4f64..1e-4, z in -1e-3f64..1e-3) {
            let trap = hd_trap();
            let be = beryllium_ion();
            let r = Vector3::new(x, y, z);
            let f = trap.pseudopotential_force(&r, &be).unwrap();
            prop_assert_eq!(trap.pseudopotential_force(&(-r), &be).unwrap(), -f);
            let f2 = trap.pseudopotential_force(&(2.0 * r), &be).unwrap();
            prop_assert_eq!(f2, 2.0 * f);
        }
    }

    #[test]
    fn force_curvature_round_trip() {
        let trap = hd_trap();
        let hd = hd_plus();
        let f = trap.pseudopotential_force(&Vector3::new(1.0, 1.0, 1.0), &hd).unwrap();
        let fx = (-f.x / hd.mass).sqrt() / (2.0 * PI);
        let fz = (-f.z / hd.mass).sqrt() / (2.0 * PI);
        assert_relative_eq!(fx, 0.81e6, max_relative = 1e-14);
        assert_relative_eq!(fz, 94.5e3, max_relative = 1e-14);
    }
}
