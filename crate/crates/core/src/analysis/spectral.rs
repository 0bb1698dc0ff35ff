//! One-sided linear (amplitude) spectral densities.
//!
//! Each ion's mean-removed, windowed series is transformed; the one-sided
//! power spectral density is normalized so that its integral equals the
//! series variance, averaged over ions, and square-rooted.

use std::io::Write;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::md::{Axis, Trajectory};
use crate::par;
use crate::trap::Species;

const MIN_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            // periodic Hann
            Window::Hann => (0..n)
                .map(|k| {
                    let s = (std::f64::consts::PI * k as f64 / n as f64).sin();
                    s * s
                })
                .collect(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Window::Hann => "hann",
            Window::Rectangular => "rectangular",
        }
    }
}

/// Coordinate whose spectrum is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Axis(Axis),
    /// Distance from the trap axis, with each ion's mean radius removed.
    Rho,
}

impl Coordinate {
    pub fn label(self) -> &'static str {
        match self {
            Coordinate::Axis(a) => a.label(),
            Coordinate::Rho => "rho",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    /// Uniform grid from 0 to Nyquist, Hz.
    pub frequencies: Vec<f64>,
    /// m / sqrt(Hz)
    pub density: Vec<f64>,
    pub coordinate: Coordinate,
    pub window: Window,
}

impl SpectralDensity {
    pub fn resolution(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    /// Integral of density^2 over frequency, m^2.
    pub fn total_power(&self) -> f64 {
        self.density.iter().map(|d| d * d).sum::<f64>() * self.resolution()
    }

    /// Frequency of the largest density value above `min_frequency`.
    pub fn peak_frequency(&self, min_frequency: f64) -> Option<f64> {
        self.frequencies
            .iter()
            .zip(&self.density)
            .filter(|(f, _)| **f >= min_frequency)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(f, _)| *f)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# coordinate={} window={}", self.coordinate.label(), self.window.label())?;
        writeln!(w, "frequency_hz,density_m_per_sqrt_hz")?;
        for (f, d) in self.frequencies.iter().zip(&self.density) {
            writeln!(w, "{f:.16e},{d:.16e}")?;
        }
        Ok(())
    }
}

/// Ensemble-averaged spectral density of a set of equally sampled series.
///
/// `times` must be uniformly spaced (relative tolerance 1e-9).
pub fn amplitude_spectral_density(
    series: &[Vec<f64>],
    times: &[f64],
    window: Window,
    coordinate: Coordinate,
) -> Result<SpectralDensity> {
    let n = times.len();
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: n,
        });
    }
    if series.is_empty() {
        return Err(Error::InvalidParameter("no series".into()));
    }
    if series.iter().any(|s| s.len() != n) {
        return Err(Error::InvalidParameter("series length differs from time base".into()));
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::NonUniformSampling);
    }
    for k in 1..n {
        if ((times[k] - times[k - 1]) - dt).abs() > 1e-9 * dt {
            return Err(Error::NonUniformSampling);
        }
    }
    let fs = 1.0 / dt;
    let w = window.coefficients(n);
    let w_power: f64 = w.iter().map(|v| v * v).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let half = n / 2;

    let per_series = par::map_indexed(series.len(), |s| {
        let x = &series[s];
        let mean = x.iter().sum::<f64>() / n as f64;
        let mut buf: Vec<Complex<f64>> = x
            .iter()
            .zip(&w)
            .map(|(v, wk)| Complex::new((v - mean) * wk, 0.0))
            .collect();
        fft.process(&mut buf);
        (0..=half)
            .map(|k| {
                let doubled = if k == 0 || (n.is_multiple_of(2) && k == half) { 1.0 } else { 2.0 };
                doubled * buf[k].norm_sqr() / (fs * w_power)
            })
            .collect::<Vec<f64>>()
    });
    let mut psd = vec![0.0; half + 1];
    for p in &per_series {
        for (acc, v) in psd.iter_mut().zip(p) {
            *acc += v;
        }
    }
    let count = per_series.len() as f64;
    Ok(SpectralDensity {
        frequencies: (0..=half).map(|k| k as f64 * fs / n as f64).collect(),
        density: psd.iter().map(|p| (p / count).sqrt()).collect(),
        coordinate,
        window,
    })
}

/// Spectral density of `coordinate` for the ions of `species` (Hann window).
pub fn linear_spectral_density(
    traj: &Trajectory,
    coordinate: Coordinate,
    species: &Species,
) -> Result<SpectralDensity> {
    linear_spectral_density_with(traj, coordinate, species, Window::Hann)
}

pub fn linear_spectral_density_with(
    traj: &Trajectory,
    coordinate: Coordinate,
    species: &Species,
    window: Window,
) -> Result<SpectralDensity> {
    let ions = traj.require_ions(species)?;
    let series: Vec<Vec<f64>> = ions
        .iter()
        .map(|&i| match coordinate {
            Coordinate::Axis(a) => traj.coordinate(i, a),
            Coordinate::Rho => traj.radius(i),
        })
        .collect();
    amplitude_spectral_density(&series, &traj.times(), window, coordinate)
}
