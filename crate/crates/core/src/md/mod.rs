//! Molecular dynamics of two-species Coulomb crystals in the pseudopotential.

mod forces;
mod integrator;
mod run;
mod state;
mod thermostat;
mod trajectory;

pub use forces::{coulomb_energy, coulomb_forces, coulomb_forces_with, CoulombWorkspace, Parallelism};
pub use integrator::{default_timestep, max_secular_frequency, step, Integrator};
pub use run::{run, run_with, ClusterSpec, RunOptions, RunOutput, Thermometry};
pub use state::{kinetic_temperature, IonState};
pub use thermostat::{ThermostatConfig, DEFAULT_FRICTION_RATE};
pub use trajectory::{Axis, Trajectory};
