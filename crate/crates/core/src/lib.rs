//! Simulation and analysis toolkit for Lamb-Dicke rotational spectroscopy of
//! sympathetically cooled molecular ions.
//!
//! * [`trap`] and [`constants`]: species, pseudopotential trap, constants table.
//! * [`md`]: Coulomb-crystal molecular dynamics.
//! * [`analysis`]: motional statistics, histograms, spectral densities.
//! * [`lineshape`]: motional line shape and the Lamb-Dicke peak.
//! * [`hyperfine`]: stretched-state spin energies and transition frequencies.
//! * [`spectro`]: power and Doppler broadening, synthetic spectra, Lorentzian
//!   fits, systematic-shift budget.

pub mod analysis;
pub mod bessel;
pub mod constants;
mod error;
pub mod hyperfine;
pub mod lineshape;
pub mod md;
pub(crate) mod par;
pub mod spectro;
pub mod trap;

pub use error::{Error, Result};
pub use par::with_workers;
