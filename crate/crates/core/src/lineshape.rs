//! Motional line shape seen by ions probed along one axis.
//!
//! Each ion's phase factor exp(i 2 pi x(t) / lambda) is Fourier transformed
//! with a rectangular window (the Lamb-Dicke peak sits in the zero bin and
//! tapering would leak it), squared, and averaged over ions. Because the
//! signal has unit modulus the weights sum to one.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::analysis::AxisVariation;
use crate::bessel::j0;
use crate::error::{Error, Result};
use crate::md::{Axis, Trajectory};
use crate::par;
use crate::trap::Species;

#[derive(Debug, Clone, PartialEq)]
pub struct LineShape {
    /// Ascending detunings, Hz; spacing 1/(frames * interval).
    pub detunings: Vec<f64>,
    pub weights: Vec<f64>,
    /// Weight of the zero-detuning bin.
    pub peak: f64,
    pub wavelength: f64,
    pub axis: Axis,
}

impl LineShape {
    pub fn resolution(&self) -> f64 {
        if self.detunings.len() > 1 {
            self.detunings[1] - self.detunings[0]
        } else {
            0.0
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Full width at half maximum of the broad profile, ignoring the
    /// zero-detuning bin, after a boxcar smoothing over `smoothing` bins.
    pub fn fwhm(&self, smoothing: usize) -> Option<f64> {
        let n = self.weights.len();
        let zero = self.detunings.iter().position(|&d| d == 0.0)?;
        let mut w = self.weights.clone();
        // replace the delta peak by its neighbours' mean
        if zero > 0 && zero + 1 < n {
            w[zero] = 0.5 * (w[zero - 1] + w[zero + 1]);
        }
        let half = smoothing / 2;
        let smooth: Vec<f64> = (0..n)
            .map(|k| {
                let lo = k.saturating_sub(half);
                let hi = (k + half + 1).min(n);
                w[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            })
            .collect();
        let (imax, &max) = smooth.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
        let level = 0.5 * max;
        let cross = |range: Box<dyn Iterator<Item = usize>>, step: isize| -> Option<f64> {
            for k in range {
                let j = (k as isize + step) as usize;
                if smooth[j] < level {
                    let t = (smooth[k] - level) / (smooth[k] - smooth[j]);
                    return Some(self.detunings[k] + t * (self.detunings[j] - self.detunings[k]));
                }
            }
            None
        };
        let right = cross(Box::new(imax..n - 1), 1)?;
        let left = cross(Box::new((1..=imax).rev()), -1)?;
        Some(right - left)
    }

    /// (detuning_Hz, weight) rows with a parameter header.
    pub fn write_csv<W: Write>(&self, mut w: W, gaussian: f64, single_ion: f64) -> Result<()> {
        writeln!(w, "# wavelength_m={:.16e}", self.wavelength)?;
        writeln!(w, "# axis={}", self.axis.label())?;
        writeln!(w, "# lamb_dicke_peak={:.16e}", self.peak)?;
        writeln!(w, "# gaussian_estimate={gaussian:.16e}")?;
        writeln!(w, "# single_ion_estimate={single_ion:.16e}")?;
        writeln!(w, "detuning_hz,weight")?;
        for (d, v) in self.detunings.iter().zip(&self.weights) {
            writeln!(w, "{d:.16e},{v:.16e}")?;
        }
        Ok(())
    }
}

fn check_wavelength(wavelength: f64) -> Result<()> {
    if wavelength > 0.0 && wavelength.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("wavelength must be positive, got {wavelength}")))
    }
}

fn phase_factors(traj: &Trajectory, ion: usize, wavelength: f64, axis: Axis) -> Vec<Complex<f64>> {
    let k = 2.0 * PI / wavelength;
    traj.coordinate(ion, axis)
        .into_iter()
        .map(|x| Complex::from_polar(1.0, k * x))
        .collect()
}

pub fn lineshape(traj: &Trajectory, species: &Species, wavelength: f64, axis: Axis) -> Result<LineShape> {
    check_wavelength(wavelength)?;
    let ions = traj.require_ions(species)?;
    let n = traj.n_frames();
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let norm = 1.0 / (n as f64 * n as f64);
    let spectra = par::map_indexed(ions.len(), |k| {
        let mut buf = phase_factors(traj, ions[k], wavelength, axis);
        fft.process(&mut buf);
        buf.iter().map(|c| c.norm_sqr() * norm).collect::<Vec<f64>>()
    });
    let mut power = vec![0.0; n];
    for s in &spectra {
        for (acc, v) in power.iter_mut().zip(s) {
            *acc += v;
        }
    }
    let count = ions.len() as f64;
    power.iter_mut().for_each(|p| *p /= count);

    // reorder from FFT layout to ascending detuning
    let split = n.div_ceil(2);
    let df = 1.0 / (n as f64 * traj.sample_interval());
    let mut detunings = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in split..n {
        detunings.push((k as f64 - n as f64) * df);
        weights.push(power[k]);
    }
    for k in 0..split {
        detunings.push(k as f64 * df);
        weights.push(power[k]);
    }
    Ok(LineShape {
        detunings,
        weights,
        peak: power[0],
        wavelength,
        axis,
    })
}

/// L(0): squared magnitude of each ion's time-averaged phase factor,
/// averaged over ions.
pub fn lamb_dicke_peak(traj: &Trajectory, species: &Species, wavelength: f64, axis: Axis) -> Result<f64> {
    check_wavelength(wavelength)?;
    let ions = traj.require_ions(species)?;
    let n = traj.n_frames();
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let per_ion = par::map_indexed(ions.len(), |k| {
        let mean: Complex<f64> =
            phase_factors(traj, ions[k], wavelength, axis).iter().sum::<Complex<f64>>() / n as f64;
        mean.norm_sqr()
    });
    Ok(per_ion.iter().sum::<f64>() / ions.len() as f64)
}

/// exp(-(2 pi dx / lambda)^2), the Gaussian-statistics estimate of L(0).
pub fn gaussian_peak_estimate(delta_x: f64, wavelength: f64) -> f64 {
    (-(2.0 * PI * delta_x / wavelength).powi(2)).exp()
}

/// J0(2 pi sqrt(2) dx / lambda)^2, the estimate of L(0) for one harmonically
/// oscillating ion with r.m.s. excursion dx.
pub fn single_ion_peak_estimate(delta_x: f64, wavelength: f64) -> f64 {
    j0(2.0 * PI * std::f64::consts::SQRT_2 * delta_x / wavelength).powi(2)
}

/// Ion-averaged Gaussian estimate from per-ion variations.
pub fn ensemble_gaussian_estimate(variation: &AxisVariation, wavelength: f64) -> f64 {
    variation
        .per_ion
        .iter()
        .map(|&d| gaussian_peak_estimate(d, wavelength))
        .sum::<f64>()
        / variation.per_ion.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hd_plus;
    use nalgebra::Vector3;

    fn oscillating(amp: f64, periods: f64, n: usize, ions: usize) -> Trajectory {
        let fr: Vec<Vec<Vector3<f64>>> = (0..n)
            .map(|k| {
                (0..ions)
                    .map(|i| {
                        let ph = 2.0 * PI * periods * k as f64 / n as f64 + i as f64;
                        Vector3::new(1e-5 * i as f64 + amp * ph.sin(), 0.0, 0.0)
                    })
                    .collect()
            })
            .collect();
        Trajectory::from_frames(1e-8, vec![hd_plus()], vec![0; ions], &fr).unwrap()
    }

    /// Time average of exp(i k a sin(t)) over one period by the trapezoid
    /// rule, squared.
    fn quadrature_peak(ka: f64) -> f64 {
        let m = 2000;
        let mean: Complex<f64> = (0..m)
            .map(|j| Complex::from_polar(1.0, ka * (2.0 * PI * j as f64 / m as f64).sin()))
            .sum::<Complex<f64>>()
            / m as f64;
        mean.norm_sqr()
    }

    #[test]
    fn static_ions_put_everything_at_zero() {
        let t = oscillating(0.0, 1.0, 64, 3);
        let l = lineshape(&t, &hd_plus(), 10e-6, Axis::X).unwrap();
        assert!((l.peak - 1.0).abs() < 1e-12);
        assert!((l.total_weight() - 1.0).abs() < 1e-12);
        assert_eq!(lamb_dicke_peak(&t, &hd_plus(), 10e-6, Axis::X).unwrap(), 1.0);
    }

    #[test]
    fn long_wavelength_limit() {
        let t = oscillating(2e-6, 5.0, 500, 4);
        let l = lamb_dicke_peak(&t, &hd_plus(), 2e-6 * 1e6, Axis::X).unwrap();
        assert!(l > 0.999);
    }

    #[test]
    fn sinusoidal_ion_matches_bessel_oracle() {
        let lambda = 10e-6;
        for amp in [0.3e-6, 1e-6, 2.2e-6, 4e-6] {
            let t = oscillating(amp, 13.0, 2600, 1);
            let l = lamb_dicke_peak(&t, &hd_plus(), lambda, Axis::X).unwrap();
            let ka = 2.0 * PI * amp / lambda;
            assert!((l - quadrature_peak(ka)).abs() < 1e-10);
            assert!((l - j0(ka).powi(2)).abs() < 1e-4);
        }
    }

    #[test]
    fn zero_bin_equals_time_average() {
        let t = oscillating(1.3e-6, 7.3, 777, 5);
        let l = lineshape(&t, &hd_plus(), 10e-6, Axis::X).unwrap();
        let p = lamb_dicke_peak(&t, &hd_plus(), 10e-6, Axis::X).unwrap();
        assert!((l.peak - p).abs() < 1e-9);
        assert!((l.total_weight() - 1.0).abs() < 1e-6);
        let zero = l.detunings.iter().position(|&d| d == 0.0).unwrap();
        assert_eq!(l.weights[zero], l.peak);
        assert!(l.detunings.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn invalid_wavelength() {
        let t = oscillating(1e-6, 1.0, 16, 1);
        assert!(lineshape(&t, &hd_plus(), 0.0, Axis::X).is_err());
        assert!(lamb_dicke_peak(&t, &hd_plus(), -1.0, Axis::X).is_err());
    }

    #[test]
    fn estimator_values() {
        assert_eq!(gaussian_peak_estimate(0.0, 1e-5), 1.0);
        assert!((gaussian_peak_estimate(1e-5 / (2.0 * PI), 1e-5) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((gaussian_peak_estimate(8.4e-6, 228e-6) - 0.9478).abs() < 1e-4);
        assert_eq!(single_ion_peak_estimate(0.0, 1e-5), 1.0);
        let dx_zero = 2.404825557695773 * 10e-6 / (2.0 * PI * std::f64::consts::SQRT_2);
        assert!(single_ion_peak_estimate(dx_zero, 10e-6) < 1e-8);
        let v = single_ion_peak_estimate(1.7e-6, 10e-6);
        assert!((v - 0.256).abs() < 1e-3, "{v}");
    }

    #[test]
    fn gaussian_estimate_decreases() {
        let mut last = 1.0;
        for k in 1..100 {
            let v = gaussian_peak_estimate(k as f64 * 1e-7, 10e-6);
            assert!(v < last);
            last = v;
        }
    }
}
