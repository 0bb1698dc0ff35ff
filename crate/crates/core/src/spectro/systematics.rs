use std::io::Write;

use super::beam::{light_shift, Polarizabilities};
use crate::error::{Error, Result};
use crate::hyperfine::{zeeman_pair_stats, TransitionModel};

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetEntry {
    pub name: String,
    /// Correction to add to the measured frequency, Hz.
    pub correction: f64,
    pub uncertainty: f64,
    pub source: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystematicsBudget {
    pub entries: Vec<BudgetEntry>,
}

impl SystematicsBudget {
    pub fn total_correction(&self) -> f64 {
        self.entries.iter().map(|e| e.correction).sum()
    }

    /// Root-sum-square of the entry uncertainties.
    pub fn total_uncertainty(&self) -> f64 {
        self.entries.iter().map(|e| e.uncertainty * e.uncertainty).sum::<f64>().sqrt()
    }

    pub fn entry(&self, name: &str) -> Option<&BudgetEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn write_table<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# corrections are added to the measured frequency; light shift sign: shift = -(d_alpha/2h) <E^2>")?;
        writeln!(w, "entry,correction_hz,uncertainty_hz,source")?;
        for e in &self.entries {
            writeln!(w, "{},{:.16e},{:.16e},{}", e.name, e.correction, e.uncertainty, e.source)?;
        }
        writeln!(
            w,
            "total,{:.16e},{:.16e},root-sum-square",
            self.total_correction(),
            self.total_uncertainty()
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetInputs {
    /// Tesla.
    pub b_field: f64,
    /// Upper bound on the d.c. Stark shift, Hz.
    pub stark_bound: f64,
    /// Power of the dissociation laser driving the light shift, W.
    pub light_power: f64,
    pub light_area: f64,
    pub polarizabilities: Polarizabilities,
    pub geometry_factor: f64,
    /// Uncertainty assigned to the light shift, Hz; the computed shift is
    /// used when larger.
    pub light_uncertainty: f64,
}

impl BudgetInputs {
    /// 0.4 G, 10 Hz Stark bound, 35 mW at 266 nm over a 50 um radius spot.
    pub fn experiment_default() -> Self {
        BudgetInputs {
            b_field: 0.4e-4,
            stark_bound: 10.0,
            light_power: 35e-3,
            light_area: std::f64::consts::PI * 50e-6f64.powi(2),
            polarizabilities: Polarizabilities::hd_plus_266nm(),
            geometry_factor: -1.0,
            light_uncertainty: 40.0,
        }
    }
}

pub fn systematics_budget(model: &TransitionModel, inputs: &BudgetInputs) -> Result<SystematicsBudget> {
    if !(inputs.stark_bound >= 0.0) || !(inputs.light_uncertainty >= 0.0) || !inputs.b_field.is_finite() {
        return Err(Error::InvalidParameter(format!("invalid budget inputs {inputs:?}")));
    }
    let zeeman = zeeman_pair_stats(model, inputs.b_field);
    let light = light_shift(
        inputs.light_power,
        inputs.light_area,
        &inputs.polarizabilities,
        inputs.geometry_factor,
    )?;
    Ok(SystematicsBudget {
        entries: vec![
            BudgetEntry {
                name: "zeeman".into(),
                correction: 0.0 - zeeman.mean_shift,
                uncertainty: zeeman.half_splitting(),
                source: "half T+/T- splitting".into(),
            },
            BudgetEntry {
                name: "dc_stark".into(),
                correction: 0.0,
                uncertainty: inputs.stark_bound,
                source: "configured bound".into(),
            },
            BudgetEntry {
                name: "light_shift".into(),
                correction: -light,
                uncertainty: inputs.light_uncertainty.max(light.abs()),
                source: "computed".into(),
            },
            BudgetEntry {
                name: "collisions".into(),
                correction: 0.0,
                uncertainty: 0.0,
                source: "negligible".into(),
            },
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_budget() {
        let b = systematics_budget(&TransitionModel::hd_plus(), &BudgetInputs::experiment_default()).unwrap();
        assert!((b.entry("zeeman").unwrap().uncertainty - 224.0).abs() < 1e-6);
        assert_eq!(b.entry("dc_stark").unwrap().uncertainty, 10.0);
        let corr_khz = b.total_correction() / 1e3;
        assert_eq!(format!("{corr_khz:.1}"), "0.0");
        assert!(b.total_uncertainty() <= 300.0);
        let expected = (224.0f64.powi(2) + 100.0 + 1600.0).sqrt();
        assert!((b.total_uncertainty() - expected).abs() < 1e-6);
    }

    #[test]
    fn totals_ignore_order() {
        let mut b = systematics_budget(&TransitionModel::hd_plus(), &BudgetInputs::experiment_default()).unwrap();
        let (c, u) = (b.total_correction(), b.total_uncertainty());
        b.entries.reverse();
        assert!((b.total_correction() - c).abs() < 1e-12);
        assert!((b.total_uncertainty() - u).abs() < 1e-12);
    }

    #[test]
    fn table_lists_every_entry() {
        let b = systematics_budget(&TransitionModel::hd_plus(), &BudgetInputs::experiment_default()).unwrap();
        let mut buf = Vec::new();
        b.write_table(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for name in ["zeeman", "dc_stark", "light_shift", "collisions", "total"] {
            assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
        }
    }
}
