//! Levenberg-Marquardt fit of a Lorentzian plus constant offset.

use nalgebra::{Matrix4, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
const TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianParams {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
}

impl LorentzianParams {
    pub fn evaluate(&self, x: f64) -> f64 {
        let h2 = 0.25 * self.fwhm * self.fwhm;
        let d = x - self.center;
        self.amplitude * h2 / (d * d + h2) + self.offset
    }

    #[cfg(test)]
    fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.center, self.fwhm, self.amplitude, self.offset)
    }

    fn from_vector(p: &Vector4<f64>) -> Self {
        LorentzianParams {
            center: p[0],
            fwhm: p[1],
            amplitude: p[2],
            offset: p[3],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianFit {
    pub params: LorentzianParams,
    /// One-sigma uncertainties of each parameter.
    pub uncertainties: LorentzianParams,
    pub iterations: usize,
    pub residual_rms: f64,
}

/// Data in scaled units: u = (x - x_mid) / x_scale, v = y / y_scale.
struct Scaled {
    u: Vec<f64>,
    v: Vec<f64>,
    x_mid: f64,
    x_scale: f64,
    y_scale: f64,
}

impl Scaled {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let x_mid = 0.5 * (lo + hi);
        let x_scale = 0.5 * (hi - lo);
        let y_scale = y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        Scaled {
            u: x.iter().map(|&v| (v - x_mid) / x_scale).collect(),
            v: y.iter().map(|&v| v / y_scale).collect(),
            x_mid,
            x_scale,
            y_scale,
        }
    }

    fn to_scaled(&self, p: &LorentzianParams) -> Vector4<f64> {
        Vector4::new(
            (p.center - self.x_mid) / self.x_scale,
            p.fwhm / self.x_scale,
            p.amplitude / self.y_scale,
            p.offset / self.y_scale,
        )
    }

    fn unscale(&self, q: &Vector4<f64>) -> LorentzianParams {
        LorentzianParams {
            center: q[0] * self.x_scale + self.x_mid,
            fwhm: q[1].abs() * self.x_scale,
            amplitude: q[2] * self.y_scale,
            offset: q[3] * self.y_scale,
        }
    }

    fn unscale_sigma(&self, s: &Vector4<f64>) -> LorentzianParams {
        LorentzianParams {
            center: s[0] * self.x_scale,
            fwhm: s[1] * self.x_scale,
            amplitude: s[2] * self.y_scale,
            offset: s[3] * self.y_scale,
        }
    }

    fn cost(&self, q: &Vector4<f64>) -> f64 {
        let p = LorentzianParams::from_vector(q);
        self.u
            .iter()
            .zip(&self.v)
            .map(|(&u, &v)| (v - p.evaluate(u)).powi(2))
            .sum()
    }

    /// Normal matrix J^T J and gradient J^T r.
    fn normal_equations(&self, q: &Vector4<f64>) -> (Matrix4<f64>, Vector4<f64>) {
        let (x0, g, a, c) = (q[0], q[1], q[2], q[3]);
        let h = 0.5 * g;
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (&u, &v) in self.u.iter().zip(&self.v) {
            let d = u - x0;
            let den = d * d + h * h;
            let l = h * h / den;
            let row = Vector4::new(
                a * 2.0 * h * h * d / (den * den),
                a * h * d * d / (den * den),
                l,
                1.0,
            );
            let r = v - (a * l + c);
            jtj += row * row.transpose();
            jtr += row * r;
        }
        (jtj, jtr)
    }
}

fn initial_guess(x: &[f64], y: &[f64]) -> LorentzianParams {
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    // baseline from the lower fifth of the samples, robust to noise
    let k = (sorted.len() / 5).max(1);
    let baseline = sorted[..k].iter().sum::<f64>() / k as f64;
    let peak = sorted[sorted.len() - 1];
    let w: Vec<f64> = y.iter().map(|&v| (v - baseline).max(0.0)).collect();
    let total: f64 = w.iter().sum();
    let centroid = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / total;
    let var = x.iter().zip(&w).map(|(a, b)| (a - centroid).powi(2) * b).sum::<f64>() / total;
    let span = x.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - x.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let step = span / (x.len() - 1) as f64;
    LorentzianParams {
        center: centroid,
        fwhm: (2.0 * var.sqrt()).clamp(3.0 * step, span),
        amplitude: peak - baseline,
        offset: baseline,
    }
}

/// Fits A (G/2)^2 / ((x - x0)^2 + (G/2)^2) + c.
pub fn fit_lorentzian(x: &[f64], y: &[f64], guess: Option<LorentzianParams>) -> Result<LorentzianFit> {
    fit_with_limit(x, y, guess, MAX_ITERATIONS)
}

fn fit_with_limit(
    x: &[f64],
    y: &[f64],
    guess: Option<LorentzianParams>,
    max_iterations: usize,
) -> Result<LorentzianFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!("{} detunings but {} signal values", x.len(), y.len())));
    }
    if x.len() < 5 {
        return Err(Error::InsufficientSamples { needed: 5, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite input to fit".into()));
    }
    let (ymin, ymax) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if ymax - ymin <= 1e-14 * ymax.abs().max(ymin.abs()) {
        return Err(Error::DegenerateData("constant signal".into()));
    }
    let (xmin, xmax) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if xmax <= xmin {
        return Err(Error::DegenerateData("all detunings equal".into()));
    }

    let data = Scaled::new(x, y);
    let mut q = data.to_scaled(&guess.unwrap_or_else(|| initial_guess(x, y)));
    let mut cost = data.cost(&q);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        let (jtj, jtr) = data.normal_equations(&q);
        let mut a = jtj;
        for i in 0..4 {
            a[(i, i)] += lambda * jtj[(i, i)].max(1e-30);
        }
        let Some(step) = a.lu().solve(&jtr) else {
            lambda *= 10.0;
            continue;
        };
        let trial = q + step;
        let trial_cost = data.cost(&trial);
        let rel = (0..4)
            .map(|i| step[i].abs() / q[i].abs().max(1e-3))
            .fold(0.0, f64::max);
        if trial_cost <= cost {
            q = trial;
            cost = trial_cost;
            lambda = (lambda / 10.0).max(1e-12);
        } else {
            lambda *= 10.0;
        }
        if rel < TOLERANCE {
            converged = true;
            break;
        }
    }
    let params = data.unscale(&q);
    if !converged {
        return Err(Error::FitNonConvergence { iterations, last: params });
    }

    let n = x.len();
    let s2 = cost / (n - 4) as f64;
    let (jtj, _) = data.normal_equations(&q);
    let sigma = jtj
        .try_inverse()
        .map(|cov| Vector4::from_fn(|i, _| (s2 * cov[(i, i)]).max(0.0).sqrt()))
        .unwrap_or_else(|| Vector4::repeat(f64::INFINITY));
    Ok(LorentzianFit {
        params,
        uncertainties: data.unscale_sigma(&sigma),
        iterations,
        residual_rms: s2.sqrt() * data.y_scale,
    })
}

/// Lorentzian samples with additive Gaussian noise of standard deviation
/// `noise_sigma`.
pub fn synthetic_lorentzian(params: &LorentzianParams, x: &[f64], noise_sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sigma.max(0.0)).expect("finite sigma");
    x.iter()
        .map(|&v| {
            let y = params.evaluate(v);
            if noise_sigma > 0.0 {
                y + noise.sample(&mut rng)
            } else {
                y
            }
        })
        .collect()
}
