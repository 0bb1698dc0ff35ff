//! Observable spectrum: broadening widths, synthetic REMPD profiles,
//! Lorentzian fitting and the systematic-shift budget.

mod beam;
mod fit;
mod rempd;
mod systematics;

pub use beam::{doppler_fwhm, light_shift, power_broadened_fwhm, rabi_frequency, BeamConfig, Polarizabilities};
pub use fit::{fit_lorentzian, synthetic_lorentzian, LorentzianFit, LorentzianParams, MAX_ITERATIONS};
pub use rempd::{excitation_fraction, rempd_spectrum, write_spectrum_csv, RempdConfig};
pub use systematics::{systematics_budget, BudgetEntry, BudgetInputs, SystematicsBudget};
