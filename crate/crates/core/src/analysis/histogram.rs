use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::md::Trajectory;
use crate::trap::Species;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramOptions {
    pub bins: usize,
    /// Half-width of the square (x, y) window, m. Defaults to three times
    /// the largest per-ion r.m.s. radius.
    pub half_width: Option<f64>,
}

impl Default for HistogramOptions {
    fn default() -> Self {
        Self {
            bins: 128,
            half_width: None,
        }
    }
}

/// Normalized 2-D histogram of transverse positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2D {
    pub bins: usize,
    pub half_width: f64,
    /// Row-major, `counts[iy * bins + ix]`; sums to one over in-range samples.
    pub counts: Vec<f64>,
    pub samples: usize,
    pub outside: usize,
}

impl Histogram2D {
    pub fn bin_width(&self) -> f64 {
        2.0 * self.half_width / self.bins as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.bin_width()
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.counts[iy * self.bins + ix]
    }

    /// (bin_x, bin_y, count) rows, bin centers in m.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# bins={} half_width_m={:.16e} samples={} outside={}", self.bins, self.half_width, self.samples, self.outside)?;
        writeln!(w, "bin_x_m,bin_y_m,count")?;
        for iy in 0..self.bins {
            for ix in 0..self.bins {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e}",
                    self.bin_center(ix),
                    self.bin_center(iy),
                    self.get(ix, iy)
                )?;
            }
        }
        Ok(())
    }
}

/// Compound histogram of the (x, y) positions of the selected ions.
pub fn transverse_histogram(
    traj: &Trajectory,
    ions: &[usize],
    options: HistogramOptions,
) -> Result<Histogram2D> {
    if ions.is_empty() {
        return Err(Error::InvalidParameter("no ions selected".into()));
    }
    if options.bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    if let Some(&bad) = ions.iter().find(|&&i| i >= traj.n_ions()) {
        return Err(Error::InvalidParameter(format!("ion {bad} out of range")));
    }
    let half_width = match options.half_width {
        Some(h) if h > 0.0 => h,
        Some(_) => return Err(Error::InvalidParameter("half width must be positive".into())),
        None => {
            let rmax = ions
                .iter()
                .map(|&i| {
                    let n = traj.n_frames().max(1) as f64;
                    (0..traj.n_frames())
                        .map(|f| traj.position(f, i).xy().norm_squared())
                        .sum::<f64>()
                        / n
                })
                .fold(0.0f64, f64::max)
                .sqrt();
            if rmax > 0.0 {
                3.0 * rmax
            } else {
                1e-6
            }
        }
    };
    let bins = options.bins;
    let mut counts = vec![0.0; bins * bins];
    let mut inside = 0usize;
    let mut outside = 0usize;
    let scale = bins as f64 / (2.0 * half_width);
    for f in 0..traj.n_frames() {
        for &i in ions {
            let p = traj.position(f, i);
            let ix = ((p.x + half_width) * scale).floor();
            let iy = ((p.y + half_width) * scale).floor();
            if ix >= 0.0 && iy >= 0.0 && (ix as usize) < bins && (iy as usize) < bins {
                counts[iy as usize * bins + ix as usize] += 1.0;
                inside += 1;
            } else {
                outside += 1;
            }
        }
    }
    if inside > 0 {
        for c in counts.iter_mut() {
            *c /= inside as f64;
        }
    }
    Ok(Histogram2D {
        bins,
        half_width,
        counts,
        samples: inside + outside,
        outside,
    })
}

/// `count` distinct ions of `species`, chosen reproducibly from `seed`.
pub fn random_ions(traj: &Trajectory, species: &Species, count: usize, seed: u64) -> Result<Vec<usize>> {
    let mut ions = traj.require_ions(species)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ions.shuffle(&mut rng);
    ions.truncate(count);
    ions.sort_unstable();
    Ok(ions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hd_plus;
    use nalgebra::Vector3;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn static_ion_fills_one_bin() {
        let fr = vec![vec![Vector3::new(2e-6, -1e-6, 0.0)]; 20];
        let t = Trajectory::from_frames(1e-7, vec![hd_plus()], vec![0], &fr).unwrap();
        let h = transverse_histogram(&t, &[0], HistogramOptions::default()).unwrap();
        assert_eq!(h.counts.iter().filter(|&&c| c > 0.0).count(), 1);
        assert_eq!(h.counts.iter().sum::<f64>(), 1.0);
        assert_eq!(h.outside, 0);
    }

    #[test]
    fn isotropic_gaussian_is_radially_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Normal::new(0.0, 1e-6).unwrap();
        let fr: Vec<Vec<Vector3<f64>>> = (0..100_000)
            .map(|_| vec![Vector3::new(g.sample(&mut rng), g.sample(&mut rng), 0.0)])
            .collect();
        let t = Trajectory::from_frames(1e-7, vec![hd_plus()], vec![0], &fr).unwrap();
        let h = transverse_histogram(&t, &[0], HistogramOptions { bins: 64, half_width: Some(4e-6) }).unwrap();
        // eight angular sectors should hold equal mass; sector edges sit
        // off the grid diagonals so no bin centre lies on an edge
        let mut sectors = [0.0; 8];
        let tau = 2.0 * std::f64::consts::PI;
        for iy in 0..h.bins {
            for ix in 0..h.bins {
                let ang = (h.bin_center(iy).atan2(h.bin_center(ix)) + tau / 16.0).rem_euclid(tau);
                let s = ((ang / (tau / 8.0)) as usize).min(7);
                sectors[s] += h.get(ix, iy);
            }
        }
        for s in sectors {
            // counting noise ~ sqrt(0.125 / 1e5) = 1.1e-3
            assert!((s - 0.125).abs() < 5e-3, "{sectors:?}");
        }
    }

    #[test]
    fn empty_selection_is_rejected() {
        let fr = vec![vec![Vector3::zeros()]; 2];
        let t = Trajectory::from_frames(1e-7, vec![hd_plus()], vec![0], &fr).unwrap();
        assert!(transverse_histogram(&t, &[], HistogramOptions::default()).is_err());
    }
}
