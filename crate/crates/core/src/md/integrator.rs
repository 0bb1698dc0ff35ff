//! Velocity-Verlet integration with a Langevin velocity update.
//!
//! One step is: half kick, drift, force evaluation, half kick, then an exact
//! Ornstein-Uhlenbeck update of the cooled species' velocities and the
//! heating kicks on every ion.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::constants::constants;
use crate::error::{Error, Result};
use crate::md::forces::{CoulombWorkspace, Parallelism};
use crate::md::{IonState, ThermostatConfig};
use crate::trap::TrapConfig;

/// Largest secular frequency among the species present in `state`.
pub fn max_secular_frequency(state: &IonState, trap: &TrapConfig) -> Result<f64> {
    let mut fmax: f64 = 0.0;
    for (slot, sp) in state.species.iter().enumerate() {
        if state.species_index.contains(&slot) {
            fmax = fmax.max(trap.secular_frequencies(sp)?.max());
        }
    }
    Ok(fmax)
}

/// Default timestep 1/(200 f_max).
pub fn default_timestep(state: &IonState, trap: &TrapConfig) -> Result<f64> {
    Ok(1.0 / (200.0 * max_secular_frequency(state, trap)?))
}

pub struct Integrator {
    state: IonState,
    trap: TrapConfig,
    thermostat: ThermostatConfig,
    dt: f64,
    rng: ChaCha8Rng,
    workspace: CoulombWorkspace,
    springs: Vec<Vector3<f64>>,
    inv_mass: Vec<f64>,
    cooled: Vec<bool>,
    forces: Vec<Vector3<f64>>,
    trap_enabled: bool,
    cool_all: bool,
}

impl Integrator {
    pub fn new(
        state: IonState,
        trap: TrapConfig,
        thermostat: ThermostatConfig,
        dt: f64,
        parallelism: Parallelism,
    ) -> Result<Self> {
        thermostat.validate()?;
        let fmax = max_secular_frequency(&state, &trap)?;
        let max_dt = 1.0 / (100.0 * fmax);
        if !(dt > 0.0 && dt <= max_dt) {
            return Err(Error::TimestepTooLarge { dt, max: max_dt });
        }
        let mut springs = Vec::with_capacity(state.len());
        let mut inv_mass = Vec::with_capacity(state.len());
        let mut cooled = Vec::with_capacity(state.len());
        for i in 0..state.len() {
            let sp = state.species_of(i);
            springs.push(trap.spring_constants(sp)?);
            inv_mass.push(1.0 / sp.mass);
            cooled.push(*sp == thermostat.cooled_species);
        }
        let workspace = CoulombWorkspace::new(state.charges(), parallelism)?;
        let rng = ChaCha8Rng::seed_from_u64(thermostat.rng_seed);
        let mut integrator = Self {
            forces: vec![Vector3::zeros(); state.len()],
            state,
            trap,
            thermostat,
            dt,
            rng,
            workspace,
            springs,
            inv_mass,
            cooled,
            trap_enabled: true,
            cool_all: false,
        };
        integrator.update_forces()?;
        Ok(integrator)
    }

    /// Disables the trap force (free Coulomb cloud).
    pub fn without_trap(mut self) -> Result<Self> {
        self.trap_enabled = false;
        self.update_forces()?;
        Ok(self)
    }

    /// Applies the Langevin update to every species instead of only the
    /// cooled one.
    pub fn set_cool_all(&mut self, cool_all: bool) {
        self.cool_all = cool_all;
    }

    pub fn set_thermostat(&mut self, thermostat: ThermostatConfig) -> Result<()> {
        thermostat.validate()?;
        for i in 0..self.state.len() {
            self.cooled[i] = *self.state.species_of(i) == thermostat.cooled_species;
        }
        self.thermostat = thermostat;
        Ok(())
    }

    pub fn state(&self) -> &IonState {
        &self.state
    }

    pub fn into_state(self) -> IonState {
        self.state
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn trap(&self) -> &TrapConfig {
        &self.trap
    }

    /// Trap plus Coulomb force on every ion at the current positions.
    pub fn forces(&self) -> &[Vector3<f64>] {
        &self.forces
    }

    fn update_forces(&mut self) -> Result<()> {
        self.workspace.load_positions(&self.state.positions);
        self.workspace.compute()?;
        for i in 0..self.state.len() {
            let mut f = self.workspace.force(i);
            if self.trap_enabled {
                f -= self.springs[i].component_mul(&self.state.positions[i]);
            }
            self.forces[i] = f;
        }
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        let half = 0.5 * self.dt;
        let n = self.state.len();
        for i in 0..n {
            let a = self.forces[i] * self.inv_mass[i];
            self.state.velocities[i] += half * a;
            let v = self.state.velocities[i];
            self.state.positions[i] += self.dt * v;
        }
        self.update_forces()?;
        for i in 0..n {
            let a = self.forces[i] * self.inv_mass[i];
            self.state.velocities[i] += half * a;
        }
        self.apply_thermostat();
        self.state.time += self.dt;
        Ok(())
    }

    fn apply_thermostat(&mut self) {
        let th = &self.thermostat;
        let kb = constants().boltzmann;
        if th.friction_rate > 0.0 {
            let decay = (-th.friction_rate * self.dt).exp();
            let spread = (1.0 - decay * decay).max(0.0);
            for i in 0..self.state.len() {
                if !(self.cool_all || self.cooled[i]) {
                    continue;
                }
                let sigma = (kb * th.target_temperature * self.inv_mass[i] * spread).sqrt();
                let v = &mut self.state.velocities[i];
                for c in 0..3 {
                    let xi: f64 = StandardNormal.sample(&mut self.rng);
                    v[c] = decay * v[c] + sigma * xi;
                }
            }
        }
        if th.heating_rate_all_species > 0.0 {
            for i in 0..self.state.len() {
                let sigma = (th.heating_rate_all_species * kb * self.dt * self.inv_mass[i]).sqrt();
                let v = &mut self.state.velocities[i];
                for c in 0..3 {
                    let xi: f64 = StandardNormal.sample(&mut self.rng);
                    v[c] += sigma * xi;
                }
            }
        }
    }

    /// Trap potential energy, J.
    pub fn trap_energy(&self) -> f64 {
        if !self.trap_enabled {
            return 0.0;
        }
        (0..self.state.len())
            .map(|i| {
                let r = &self.state.positions[i];
                0.5 * self.springs[i].dot(&r.component_mul(r))
            })
            .sum()
    }

    /// Kinetic + trap + Coulomb energy, J.
    pub fn total_energy(&self) -> f64 {
        self.state.kinetic_energy() + self.trap_energy() + self.workspace.potential_energy()
    }
}

/// One step from `state`; forces are evaluated from scratch.
pub fn step(
    state: IonState,
    trap: &TrapConfig,
    thermostat: &ThermostatConfig,
    dt: f64,
) -> Result<IonState> {
    let mut it = Integrator::new(state, trap.clone(), thermostat.clone(), dt, Parallelism::Sequential)?;
    it.step()?;
    Ok(it.into_state())
}
