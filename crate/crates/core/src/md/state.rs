use nalgebra::Vector3;

use crate::constants::constants;
use crate::error::{Error, Result};
use crate::trap::Species;

/// Positions and velocities of every ion at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct IonState {
    pub species: Vec<Species>,
    pub species_index: Vec<usize>,
    /// m
    pub positions: Vec<Vector3<f64>>,
    /// m/s
    pub velocities: Vec<Vector3<f64>>,
    /// s
    pub time: f64,
}

impl IonState {
    pub fn new(
        species: Vec<Species>,
        species_index: Vec<usize>,
        positions: Vec<Vector3<f64>>,
        velocities: Vec<Vector3<f64>>,
    ) -> Result<Self> {
        let n = species_index.len();
        if positions.len() != n || velocities.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{n} species indices, {} positions, {} velocities",
                positions.len(),
                velocities.len()
            )));
        }
        if let Some(bad) = species_index.iter().find(|&&s| s >= species.len()) {
            return Err(Error::InvalidParameter(format!("species index {bad} out of range")));
        }
        if positions.iter().chain(&velocities).any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidParameter("non-finite coordinates".into()));
        }
        Ok(Self {
            species,
            species_index,
            positions,
            velocities,
            time: 0.0,
        })
    }

    pub fn at_rest(
        species: Vec<Species>,
        species_index: Vec<usize>,
        positions: Vec<Vector3<f64>>,
    ) -> Result<Self> {
        let v = vec![Vector3::zeros(); positions.len()];
        Self::new(species, species_index, positions, v)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn species_of(&self, ion: usize) -> &Species {
        &self.species[self.species_index[ion]]
    }

    pub fn mass(&self, ion: usize) -> f64 {
        self.species_of(ion).mass
    }

    pub fn charges(&self) -> Vec<f64> {
        self.species_index
            .iter()
            .map(|&s| self.species[s].charge)
            .collect()
    }

    /// Index of `species` in the species table.
    pub fn species_slot(&self, species: &Species) -> Option<usize> {
        self.species.iter().position(|s| s == species)
    }

    pub fn ions_of(&self, species: &Species) -> Vec<usize> {
        match self.species_slot(species) {
            Some(slot) => (0..self.len())
                .filter(|&i| self.species_index[i] == slot)
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn kinetic_energy(&self) -> f64 {
        (0..self.len())
            .map(|i| 0.5 * self.mass(i) * self.velocities[i].norm_squared())
            .sum()
    }

    pub fn momentum(&self) -> Vector3<f64> {
        (0..self.len())
            .map(|i| self.mass(i) * self.velocities[i])
            .sum()
    }
}

/// Kinetic temperature m<v^2>/(3 k_B) of one species.
pub fn kinetic_temperature(state: &IonState, species: &Species) -> Result<f64> {
    let ions = state.ions_of(species);
    if ions.is_empty() {
        return Err(Error::SpeciesAbsent(species.name.clone()));
    }
    let mean_ke = ions
        .iter()
        .map(|&i| 0.5 * species.mass * state.velocities[i].norm_squared())
        .sum::<f64>()
        / ions.len() as f64;
    Ok(2.0 / 3.0 * mean_ke / constants().boltzmann)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{beryllium_ion, hd_plus};

    #[test]
    fn temperature_of_resting_ions_is_zero() {
        let s = IonState::at_rest(vec![hd_plus()], vec![0, 0], vec![Vector3::zeros(), Vector3::x()]).unwrap();
        assert_eq!(kinetic_temperature(&s, &hd_plus()).unwrap(), 0.0);
    }

    #[test]
    fn temperature_inverts_definition() {
        let hd = hd_plus();
        let kb = constants().boltzmann;
        // (1/2) m v^2 = (3/2) k_B (10 mK)
        let v = (3.0 * kb * 0.010 / hd.mass).sqrt();
        let s = IonState::new(
            vec![hd.clone()],
            vec![0],
            vec![Vector3::zeros()],
            vec![Vector3::new(0.0, v, 0.0)],
        )
        .unwrap();
        let t = kinetic_temperature(&s, &hd).unwrap();
        assert!((t - 0.010).abs() < 1e-15);
    }

    #[test]
    fn absent_species_is_an_error() {
        let s = IonState::at_rest(vec![hd_plus()], vec![0], vec![Vector3::zeros()]).unwrap();
        assert!(matches!(
            kinetic_temperature(&s, &beryllium_ion()),
            Err(Error::SpeciesAbsent(_))
        ));
    }

    #[test]
    fn bad_species_index() {
        assert!(IonState::at_rest(vec![hd_plus()], vec![1], vec![Vector3::zeros()]).is_err());
    }
}
