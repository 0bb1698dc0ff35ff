//! Cluster initialization and full simulation runs.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constants::{beryllium_ion, constants, hd_plus};
use crate::error::{Error, Result};
use crate::md::forces::Parallelism;
use crate::md::integrator::{default_timestep, max_secular_frequency, Integrator};
use crate::md::{IonState, ThermostatConfig, Trajectory};
use crate::trap::{Species, TrapConfig};

/// Ion numbers and the initial loading volume of a two-species cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub label: String,
    pub species: Vec<Species>,
    pub counts: Vec<usize>,
    /// Radial semi-axis of the loading ellipsoid, m.
    pub init_radius: f64,
    /// Axial semi-axis of the loading ellipsoid, m.
    pub init_half_length: f64,
}

impl ClusterSpec {
    /// 200 HD+ sympathetically cooled by 2000 Be+.
    pub fn c1() -> Self {
        Self {
            label: "C1".into(),
            species: vec![hd_plus(), beryllium_ion()],
            counts: vec![200, 2000],
            init_radius: 120e-6,
            init_half_length: 1.2e-3,
        }
    }

    /// 50 HD+ sympathetically cooled by 500 Be+.
    pub fn c2() -> Self {
        Self {
            label: "C2".into(),
            species: vec![hd_plus(), beryllium_ion()],
            counts: vec![50, 500],
            init_radius: 75e-6,
            init_half_length: 0.75e-3,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.species.len() != self.counts.len() {
            return Err(Error::InvalidParameter("one count per species is required".into()));
        }
        if self.total() == 0 {
            return Err(Error::InvalidParameter("cluster has no ions".into()));
        }
        if !(self.init_radius > 0.0 && self.init_half_length > 0.0) {
            return Err(Error::InvalidParameter("loading volume must be positive".into()));
        }
        Ok(())
    }

    /// Randomized lattice in the loading ellipsoid. The most tightly bound
    /// species (largest q/m) takes the sites closest to the trap axis.
    pub fn initial_state(&self, temperature: f64, seed: u64) -> Result<IonState> {
        self.validate()?;
        let n = self.total();
        let (r, l) = (self.init_radius, self.init_half_length);
        let volume = 4.0 / 3.0 * PI * r * r * l;
        let mut spacing = (volume / n as f64).cbrt();
        let mut sites = Vec::new();
        while sites.len() < n {
            sites = lattice_in_ellipsoid(r, l, spacing);
            spacing *= 0.95;
        }
        let norm = |p: &Vector3<f64>| (p.x * p.x + p.y * p.y) / (r * r) + p.z * p.z / (l * l);
        sites.sort_by(|a, b| norm(a).total_cmp(&norm(b)));
        sites.truncate(n);
        sites.sort_by(|a, b| a.xy().norm().total_cmp(&b.xy().norm()));

        let mut order: Vec<usize> = (0..self.species.len()).collect();
        order.sort_by(|&a, &b| {
            self.species[b]
                .charge_to_mass()
                .total_cmp(&self.species[a].charge_to_mass())
        });
        let mut species_index = Vec::with_capacity(n);
        for &slot in &order {
            species_index.extend(std::iter::repeat_n(slot, self.counts[slot]));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1a77_1ce0_0000);
        let jitter = 0.2 * spacing;
        let kb = constants().boltzmann;
        let mut positions = Vec::with_capacity(n);
        let mut velocities = Vec::with_capacity(n);
        for (site, &slot) in sites.iter().zip(&species_index) {
            let d = Vector3::new(
                rng.gen_range(-jitter..jitter),
                rng.gen_range(-jitter..jitter),
                rng.gen_range(-jitter..jitter),
            );
            positions.push(site + d);
            let sigma = (kb * temperature / self.species[slot].mass).sqrt();
            velocities.push(Vector3::from_fn(|_, _| {
                let xi: f64 = StandardNormal.sample(&mut rng);
                sigma * xi
            }));
        }
        IonState::new(self.species.clone(), species_index, positions, velocities)
    }
}

fn lattice_in_ellipsoid(r: f64, l: f64, a: f64) -> Vec<Vector3<f64>> {
    let nr = (r / a).ceil() as i64;
    let nl = (l / a).ceil() as i64;
    let mut out = Vec::new();
    for k in -nl..=nl {
        for j in -nr..=nr {
            for i in -nr..=nr {
                // half-cell offset keeps sites off the trap axis
                let p = Vector3::new((i as f64 + 0.5) * a, (j as f64 + 0.5) * a, k as f64 * a);
                if (p.x * p.x + p.y * p.y) / (r * r) + p.z * p.z / (l * l) <= 1.0 {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Integration controls beyond the physical configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Defaults to 1/(200 f_max), shortened so the sample interval is a whole
    /// number of steps.
    pub dt: Option<f64>,
    /// Unsampled prefix, s.
    pub equilibration: f64,
    /// Leading fraction of the prefix during which every species is
    /// thermostatted.
    pub precool_fraction: f64,
    pub parallelism: Parallelism,
    /// Temperature above which the cluster counts as melted; defaults to
    /// max(1 K, 10 T_target).
    pub melt_temperature: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            dt: None,
            equilibration: 0.5e-3,
            precool_fraction: 0.5,
            parallelism: Parallelism::Sequential,
            melt_temperature: None,
        }
    }
}

/// Kinetic temperatures recorded at every sampled frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Thermometry {
    pub species: Vec<Species>,
    /// `per_axis[frame][species]` = (T_x, T_y, T_z), K
    pub per_axis: Vec<Vec<[f64; 3]>>,
}

impl Thermometry {
    fn record(&mut self, state: &IonState) {
        let kb = constants().boltzmann;
        let row = self
            .species
            .iter()
            .map(|sp| {
                let ions = state.ions_of(sp);
                let mut t = [0.0; 3];
                for &i in &ions {
                    for (c, tc) in t.iter_mut().enumerate() {
                        *tc += sp.mass * state.velocities[i][c].powi(2);
                    }
                }
                t.map(|v| v / (kb * ions.len().max(1) as f64))
            })
            .collect();
        self.per_axis.push(row);
    }

    fn slot(&self, species: &Species) -> Result<usize> {
        self.species
            .iter()
            .position(|s| s == species)
            .ok_or_else(|| Error::SpeciesAbsent(species.name.clone()))
    }

    /// Window-averaged kinetic temperature of one species, K.
    pub fn mean(&self, species: &Species) -> Result<f64> {
        let a = self.mean_per_axis(species)?;
        Ok((a[0] + a[1] + a[2]) / 3.0)
    }

    pub fn mean_per_axis(&self, species: &Species) -> Result<[f64; 3]> {
        let slot = self.slot(species)?;
        if self.per_axis.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        let mut acc = [0.0; 3];
        for row in &self.per_axis {
            for c in 0..3 {
                acc[c] += row[slot][c];
            }
        }
        Ok(acc.map(|v| v / self.per_axis.len() as f64))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub thermometry: Thermometry,
    pub dt: f64,
    pub steps: u64,
    pub final_state: Option<IonState>,
}

/// Equilibrates `spec` and records `duration` seconds of positions.
pub fn run(
    spec: &ClusterSpec,
    trap: &TrapConfig,
    thermostat: &ThermostatConfig,
    duration: f64,
    sample_interval: f64,
) -> Result<RunOutput> {
    run_with(spec, trap, thermostat, duration, sample_interval, &RunOptions::default())
}

pub fn run_with(
    spec: &ClusterSpec,
    trap: &TrapConfig,
    thermostat: &ThermostatConfig,
    duration: f64,
    sample_interval: f64,
    options: &RunOptions,
) -> Result<RunOutput> {
    spec.validate()?;
    thermostat.validate()?;
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidParameter("duration must be >= 0".into()));
    }
    let species_index: Vec<usize> = spec
        .counts
        .iter()
        .enumerate()
        .flat_map(|(slot, &c)| std::iter::repeat_n(slot, c))
        .collect();
    let mut trajectory = Trajectory::new(sample_interval, spec.species.clone(), species_index)?;
    let mut thermometry = Thermometry {
        species: spec.species.clone(),
        per_axis: Vec::new(),
    };
    if duration == 0.0 {
        return Ok(RunOutput {
            trajectory,
            thermometry,
            dt: 0.0,
            steps: 0,
            final_state: None,
        });
    }

    let state = spec.initial_state(thermostat.target_temperature, thermostat.rng_seed)?;
    let fmax = max_secular_frequency(&state, trap)?;
    if duration < 100.0 / fmax {
        return Err(Error::InvalidParameter(format!(
            "duration {duration:.3e} s is shorter than 100 secular periods ({:.3e} s)",
            100.0 / fmax
        )));
    }
    let nominal_dt = match options.dt {
        Some(dt) => dt,
        None => default_timestep(&state, trap)?,
    };
    let steps_per_sample = (sample_interval / nominal_dt).ceil().max(1.0) as u64;
    let dt = sample_interval / steps_per_sample as f64;
    let frames = (duration / sample_interval).round() as u64 + 1;
    let eq_steps = (options.equilibration / dt).round() as u64;
    let precool_steps = (options.precool_fraction.clamp(0.0, 1.0) * eq_steps as f64).round() as u64;
    let melt = options
        .melt_temperature
        .unwrap_or_else(|| (10.0 * thermostat.target_temperature).max(1.0));

    // The trajectory stores ions grouped by species; the initial state orders
    // them by confinement. Re-map once so both agree.
    let state = regroup(state, &spec.species);

    let mut it = Integrator::new(state, trap.clone(), thermostat.clone(), dt, options.parallelism)?;
    let mut steps = 0u64;
    it.set_cool_all(true);
    for k in 0..eq_steps {
        if k == precool_steps {
            it.set_cool_all(false);
        }
        it.step()?;
        steps += 1;
        // the pre-cool anneals the initial lattice, which may start hot
        if k >= precool_steps && k % 1000 == 999 {
            check_melt(it.state(), &spec.species, melt)?;
        }
    }
    it.set_cool_all(false);

    for frame in 0..frames {
        if frame > 0 {
            for _ in 0..steps_per_sample {
                it.step()?;
                steps += 1;
            }
        }
        let st = it.state();
        check_melt(st, &spec.species, melt)?;
        trajectory.push_frame(&st.positions)?;
        thermometry.record(st);
    }
    Ok(RunOutput {
        trajectory,
        thermometry,
        dt,
        steps,
        final_state: Some(it.into_state()),
    })
}

fn regroup(state: IonState, species: &[Species]) -> IonState {
    let mut order: Vec<usize> = (0..state.len()).collect();
    order.sort_by_key(|&i| state.species_index[i]);
    debug_assert_eq!(state.species, species);
    IonState {
        species: state.species.clone(),
        species_index: order.iter().map(|&i| state.species_index[i]).collect(),
        positions: order.iter().map(|&i| state.positions[i]).collect(),
        velocities: order.iter().map(|&i| state.velocities[i]).collect(),
        time: state.time,
    }
}

fn check_melt(state: &IonState, species: &[Species], melt: f64) -> Result<()> {
    for sp in species {
        if state.ions_of(sp).is_empty() {
            continue;
        }
        let t = crate::md::kinetic_temperature(state, sp)?;
        if !(t <= melt) {
            return Err(Error::MeltedCluster {
                species: sp.name.clone(),
                temperature: t,
                time: state.time,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::default_trap;

    #[test]
    fn zero_duration_gives_empty_trajectory() {
        let th = ThermostatConfig::off(beryllium_ion());
        let out = run(&ClusterSpec::c2(), &default_trap(), &th, 0.0, 2.5e-7).unwrap();
        assert!(out.trajectory.is_empty());
        assert_eq!(out.trajectory.n_ions(), 550);
    }

    #[test]
    fn too_short_duration_is_rejected() {
        let th = ThermostatConfig::off(beryllium_ion());
        let spec = ClusterSpec {
            counts: vec![1, 1],
            ..ClusterSpec::c2()
        };
        assert!(matches!(
            run(&spec, &default_trap(), &th, 1e-6, 2.5e-7),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn initial_state_puts_light_ions_inside() {
        let spec = ClusterSpec::c2();
        let s = spec.initial_state(0.01, 1).unwrap();
        assert_eq!(s.len(), 550);
        let rmax = |sp: &Species| {
            s.ions_of(sp)
                .iter()
                .map(|&i| s.positions[i].xy().norm())
                .fold(0.0, f64::max)
        };
        assert!(rmax(&hd_plus()) < rmax(&beryllium_ion()));
        assert!(crate::md::coulomb_forces(&s).is_ok());
    }

    #[test]
    fn small_cluster_thermalizes() {
        let spec = ClusterSpec {
            label: "tiny".into(),
            species: vec![hd_plus(), beryllium_ion()],
            counts: vec![4, 16],
            init_radius: 20e-6,
            init_half_length: 100e-6,
        };
        let th = ThermostatConfig {
            cooled_species: beryllium_ion(),
            target_temperature: 0.02,
            friction_rate: 5e4,
            heating_rate_all_species: 0.0,
            rng_seed: 9,
        };
        let out = run(&spec, &default_trap(), &th, 1e-3, 1e-6).unwrap();
        assert_eq!(out.trajectory.n_frames(), 1001);
        let t_be = out.thermometry.mean(&beryllium_ion()).unwrap();
        assert!((t_be - 0.02).abs() < 0.2 * 0.02, "Be+ at {t_be}");
        let t_hd = out.thermometry.mean(&hd_plus()).unwrap();
        assert!((t_hd - 0.02).abs() < 0.3 * 0.02, "HD+ at {t_hd}");
    }
}
