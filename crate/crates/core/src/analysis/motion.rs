use std::io::Write;

use crate::error::{Error, Result};
use crate::md::{Axis, Trajectory};
use crate::par;
use crate::trap::Species;

/// r.m.s. variation of one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisVariation {
    pub axis: Axis,
    /// Ensemble mean of `per_ion`, m.
    pub ensemble: f64,
    /// Per-ion square root of the time variance, m.
    pub per_ion: Vec<f64>,
}

/// Delta x, Delta y, Delta z of one species over the trajectory window.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionStats {
    pub species: String,
    pub delta: [f64; 3],
    pub per_ion: Vec<[f64; 3]>,
    /// s
    pub window: f64,
}

impl MotionStats {
    pub fn delta_x(&self) -> f64 {
        self.delta[0]
    }

    pub fn delta_y(&self) -> f64 {
        self.delta[1]
    }

    pub fn delta_z(&self) -> f64 {
        self.delta[2]
    }

    /// One header line and one summary record.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "species,ions,window_s,delta_x_m,delta_y_m,delta_z_m")?;
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.species,
            self.per_ion.len(),
            self.window,
            self.delta[0],
            self.delta[1],
            self.delta[2]
        )?;
        Ok(())
    }
}

/// Population standard deviation, two-pass.
pub(crate) fn rms_variation(series: &[f64]) -> f64 {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    (series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

pub fn coordinate_rms_variation(
    traj: &Trajectory,
    species: &Species,
    axis: Axis,
) -> Result<AxisVariation> {
    let ions = traj.require_ions(species)?;
    if traj.n_frames() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: traj.n_frames(),
        });
    }
    let per_ion = par::map_indexed(ions.len(), |k| rms_variation(&traj.coordinate(ions[k], axis)));
    let ensemble = per_ion.iter().sum::<f64>() / per_ion.len() as f64;
    Ok(AxisVariation {
        axis,
        ensemble,
        per_ion,
    })
}

pub fn motion_stats(traj: &Trajectory, species: &Species) -> Result<MotionStats> {
    let axes = [Axis::X, Axis::Y, Axis::Z].map(|a| coordinate_rms_variation(traj, species, a));
    let [x, y, z] = axes;
    let (x, y, z) = (x?, y?, z?);
    let per_ion: Vec<[f64; 3]> = (0..x.per_ion.len())
        .map(|i| [x.per_ion[i], y.per_ion[i], z.per_ion[i]])
        .collect();
    let stats = MotionStats {
        species: species.name.clone(),
        delta: [x.ensemble, y.ensemble, z.ensemble],
        per_ion,
        window: traj.duration(),
    };
    debug_assert!((0..3).all(|c| {
        let mean = stats.per_ion.iter().map(|p| p[c]).sum::<f64>() / stats.per_ion.len() as f64;
        mean == stats.delta[c]
    }));
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{beryllium_ion, hd_plus};
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn traj_from(xs: &[Vec<f64>]) -> Trajectory {
        let frames = xs[0].len();
        let fr: Vec<Vec<Vector3<f64>>> = (0..frames)
            .map(|k| xs.iter().map(|s| Vector3::new(s[k], 0.5 * s[k], 1.0)).collect())
            .collect();
        Trajectory::from_frames(1e-7, vec![hd_plus()], vec![0; xs.len()], &fr).unwrap()
    }

    #[test]
    fn constant_coordinate_has_zero_variation() {
        let t = traj_from(&[vec![3e-6; 50]]);
        let s = motion_stats(&t, &hd_plus()).unwrap();
        assert_eq!(s.delta, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn sinusoid_gives_amplitude_over_root_two() {
        let a = 2e-6;
        let n = 1000;
        let periods = 7.0;
        let x: Vec<f64> = (0..n)
            .map(|k| a * (2.0 * PI * periods * k as f64 / n as f64 + 0.3).sin())
            .collect();
        let v = coordinate_rms_variation(&traj_from(&[x]), &hd_plus(), Axis::X).unwrap();
        assert!((v.ensemble - a / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ensemble_is_mean_of_ions() {
        let x1: Vec<f64> = (0..64).map(|k| (k % 2) as f64 * 2e-6).collect();
        let x2: Vec<f64> = (0..64).map(|k| (k % 2) as f64 * 4e-6).collect();
        let v = coordinate_rms_variation(&traj_from(&[x1, x2]), &hd_plus(), Axis::X).unwrap();
        assert!((v.per_ion[0] - 1e-6).abs() < 1e-20);
        assert!((v.per_ion[1] - 2e-6).abs() < 1e-20);
        assert_eq!(v.ensemble, (v.per_ion[0] + v.per_ion[1]) / 2.0);
    }

    #[test]
    fn errors() {
        let t = traj_from(&[vec![1.0; 1]]);
        assert!(matches!(
            coordinate_rms_variation(&t, &hd_plus(), Axis::X),
            Err(Error::InsufficientSamples { .. })
        ));
        let t = traj_from(&[vec![1.0; 5]]);
        assert!(matches!(
            coordinate_rms_variation(&t, &beryllium_ion(), Axis::X),
            Err(Error::SpeciesAbsent(_))
        ));
    }

    #[test]
    fn dyadic_offset_is_exact() {
        let x: Vec<f64> = (0..64).map(|k| ((k * 37) % 11) as f64 * 0.125).collect();
        let shifted: Vec<f64> = x.iter().map(|v| v + 1024.0).collect();
        let a = coordinate_rms_variation(&traj_from(&[x]), &hd_plus(), Axis::X).unwrap();
        let b = coordinate_rms_variation(&traj_from(&[shifted]), &hd_plus(), Axis::X).unwrap();
        assert_eq!(a.ensemble, b.ensemble);
    }

    proptest! {
        #[test]
        fn translation_and_scale(seed in 0u64..1000, offset in -1e-3f64..1e-3, s in -10.0f64..10.0) {
            let x: Vec<f64> = (0..128).map(|k| 1e-6 * ((k as f64 * 0.7 + seed as f64).sin())).collect();
            let t = traj_from(&[x]);
            let base = motion_stats(&t, &hd_plus()).unwrap();
            let moved = motion_stats(&t.map_positions(|p| p.add_scalar(offset)), &hd_plus()).unwrap();
            let scaled = motion_stats(&t.map_positions(|p| p * s), &hd_plus()).unwrap();
            for c in 0..3 {
                prop_assert!((moved.delta[c] - base.delta[c]).abs() <= 1e-9 * base.delta[c] + 1e-13);
                // z is the constant 1.0, whose scaled mean carries one rounding
                prop_assert!((scaled.delta[c] - s.abs() * base.delta[c]).abs() <= 1e-12 * base.delta[c] + 1e-13);
            }
        }
    }
}
