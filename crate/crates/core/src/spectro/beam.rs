use std::f64::consts::{LN_2, PI};

use crate::constants::constants;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    /// W
    pub power: f64,
    /// m^2
    pub cross_section_area: f64,
    /// C m
    pub transition_dipole: f64,
    /// Hz
    pub frequency: f64,
}

impl BeamConfig {
    pub fn new(power: f64, cross_section_area: f64, transition_dipole: f64, frequency: f64) -> Result<Self> {
        let beam = BeamConfig {
            power,
            cross_section_area,
            transition_dipole,
            frequency,
        };
        beam.validate()?;
        Ok(beam)
    }

    /// 1 pW THz beam over pi mm^2 on the 0.15 e a0 rotational dipole.
    pub fn weak_terahertz() -> Self {
        let c = constants();
        BeamConfig {
            power: 1e-12,
            cross_section_area: PI * 1e-6,
            transition_dipole: 0.15 * c.elementary_charge * c.bohr_radius,
            frequency: 1.3149e12,
        }
    }

    pub fn with_power(self, power: f64) -> Self {
        BeamConfig { power, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.power >= 0.0
            && self.power.is_finite()
            && self.cross_section_area > 0.0
            && self.cross_section_area.is_finite()
            && self.transition_dipole > 0.0
            && self.frequency > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid beam {self:?}")))
        }
    }

    /// Peak field amplitude from P = eps0 c E^2 A / 2, V/m.
    pub fn field_amplitude(&self) -> f64 {
        let c = constants();
        (2.0 * self.power / (c.vacuum_permittivity * c.speed_of_light * self.cross_section_area)).sqrt()
    }
}

/// Omega_R = mu E / hbar, rad/s.
pub fn rabi_frequency(beam: &BeamConfig) -> f64 {
    beam.transition_dipole * beam.field_amplitude() / constants().reduced_planck
}

/// sqrt(2) Omega / 2 pi, Hz.
pub fn power_broadened_fwhm(omega_rabi: f64) -> f64 {
    std::f64::consts::SQRT_2 * omega_rabi / (2.0 * PI)
}

/// Gaussian Doppler FWHM (f0/c) sqrt(8 ln2 kT/m), Hz.
pub fn doppler_fwhm(f0: f64, temperature: f64, mass: f64) -> f64 {
    let c = constants();
    f0 / c.speed_of_light * (8.0 * LN_2 * c.boltzmann * temperature / mass).sqrt()
}

/// Static polarizabilities in atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarizabilities {
    pub scalar_lower: f64,
    pub scalar_upper: f64,
    pub tensor_upper: f64,
}

impl Polarizabilities {
    /// HD+ (v=0, N=0) and (v=0, N=1) at 266 nm.
    pub fn hd_plus_266nm() -> Self {
        Polarizabilities {
            scalar_lower: 3.677,
            scalar_upper: 3.687,
            tensor_upper: -1.044,
        }
    }

    /// Effective differential polarizability in atomic units.
    pub fn differential(&self, geometry_factor: f64) -> f64 {
        self.scalar_upper - self.scalar_lower + geometry_factor * self.tensor_upper
    }
}

/// Differential a.c. Stark shift of the rotational line, Hz.
///
/// Returns -(d_alpha / 2h) <E^2> with <E^2> = P / (eps0 c A), the
/// cycle-averaged squared field of a beam of power `power` over `area`.
/// A positive polarizability difference lowers the line.
pub fn light_shift(power: f64, area: f64, pol: &Polarizabilities, geometry_factor: f64) -> Result<f64> {
    if !(area > 0.0) || !(power >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "light shift needs power >= 0 and area > 0, got {power}, {area}"
        )));
    }
    let c = constants();
    let e2 = power / (c.vacuum_permittivity * c.speed_of_light * area);
    let d_alpha = pol.differential(geometry_factor) * c.polarizability_au();
    Ok(-d_alpha * e2 / (2.0 * c.planck))
}
