//! Synthetic REMPD spectra of the unresolved T+/T- pair.
//!
//! Each branch is a driven two-level system with steady-state upper-level
//! population rho_ee; the dissociated fraction after the probe time is
//! 1 - exp(-Gamma_d rho_ee t).

use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::beam::{rabi_frequency, BeamConfig};
use crate::error::{Error, Result};
use crate::hyperfine::{transition_frequency, Branch, TransitionModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RempdConfig {
    /// Relaxation rate Gamma of the driven transition, 1/s.
    pub relaxation_rate: f64,
    /// Dissociation rate out of the upper level, 1/s.
    pub dissociation_rate: f64,
    /// Probe time, s.
    pub duration: f64,
    /// Weights of T+ and T-.
    pub weights: [f64; 2],
    pub noise_sigma: f64,
    pub seed: u64,
}

impl RempdConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.relaxation_rate >= 0.0
            && self.dissociation_rate >= 0.0
            && self.duration > 0.0
            && self.duration.is_finite()
            && self.weights.iter().all(|w| *w >= 0.0)
            && self.noise_sigma >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid REMPD settings {self:?}")))
        }
    }
}

/// Steady-state upper-level population (Omega^2/4) / (Delta^2 + Omega^2/2 + Gamma^2/4).
pub fn excitation_fraction(delta: f64, omega: f64, gamma: f64) -> f64 {
    let num = 0.25 * omega * omega;
    if num == 0.0 {
        return 0.0;
    }
    num / (delta * delta + 0.5 * omega * omega + 0.25 * gamma * gamma)
}

/// Dissociated fraction at each detuning (Hz, relative to the zero-field
/// line centre), plus optional Gaussian noise.
pub fn rempd_spectrum(
    beam: &BeamConfig,
    model: &TransitionModel,
    b_field: f64,
    detunings: &[f64],
    cfg: &RempdConfig,
) -> Result<Vec<f64>> {
    beam.validate()?;
    cfg.validate()?;
    if detunings.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidParameter("non-finite detuning".into()));
    }
    let omega = rabi_frequency(beam);
    let f0 = transition_frequency(model, Branch::Plus, 0.0);
    let offsets = [Branch::Plus, Branch::Minus].map(|br| transition_frequency(model, br, b_field) - f0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_sigma).expect("validated sigma");
    Ok(detunings
        .iter()
        .map(|&d| {
            let rho: f64 = offsets
                .iter()
                .zip(cfg.weights)
                .map(|(&off, w)| w * excitation_fraction(2.0 * PI * (d - off), omega, cfg.relaxation_rate))
                .sum();
            let s = 1.0 - (-cfg.dissociation_rate * rho * cfg.duration).exp();
            if cfg.noise_sigma > 0.0 {
                s + noise.sample(&mut rng)
            } else {
                s
            }
        })
        .collect())
}

/// (detuning_Hz, signal) rows after a `# key=value` header.
pub fn write_spectrum_csv<W: Write>(
    mut w: W,
    header: &[(&str, String)],
    detunings: &[f64],
    signal: &[f64],
) -> Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "detuning_hz,signal")?;
    for (d, s) in detunings.iter().zip(signal) {
        writeln!(w, "{d:.16e},{s:.16e}")?;
    }
    Ok(())
}
