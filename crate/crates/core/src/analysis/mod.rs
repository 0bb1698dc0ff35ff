//! Motional statistics of sampled trajectories.

mod histogram;
mod motion;
mod spectral;

pub use histogram::{random_ions, transverse_histogram, Histogram2D, HistogramOptions};
pub use motion::{coordinate_rms_variation, motion_stats, AxisVariation, MotionStats};
pub use spectral::{
    amplitude_spectral_density, linear_spectral_density, linear_spectral_density_with, Coordinate, SpectralDensity,
    Window,
};
