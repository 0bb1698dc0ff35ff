//! Run configuration: strict TOML with one section per concern.
//!
//! Physical parameters have no built-in defaults; they come from the shipped
//! presets or from a user file. Each subcommand checks that the sections it
//! needs are present.

use std::path::Path;

use serde::{Deserialize, Serialize};

use ldrot_core::constants::{beryllium_ion, constants, hd_plus};
use ldrot_core::md::{Axis, ClusterSpec, ThermostatConfig};
use ldrot_core::spectro::{BeamConfig, BudgetInputs, Polarizabilities, RempdConfig};
use ldrot_core::trap::TrapConfig;

const PRESET_C1: &str = include_str!("../presets/c1.toml");
const PRESET_C2: &str = include_str!("../presets/c2.toml");
const PRESET_EXPERIMENT: &str = include_str!("../presets/experiment.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    #[value(name = "C1")]
    C1,
    #[value(name = "C2")]
    C2,
    #[value(name = "EXPERIMENT")]
    Experiment,
}

impl Preset {
    pub fn text(self) -> &'static str {
        match self {
            Preset::C1 => PRESET_C1,
            Preset::C2 => PRESET_C2,
            Preset::Experiment => PRESET_EXPERIMENT,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::C1 => "C1",
            Preset::C2 => "C2",
            Preset::Experiment => "EXPERIMENT",
        }
    }
}

/// Invalid or incomplete configuration, with a source line where known.
#[derive(Debug)]
pub struct ConfigError {
    pub source_name: String,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.source_name, l, self.message),
            None => write!(f, "{}: {}", self.source_name, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSection {
    pub label: String,
    pub hd_count: usize,
    pub be_count: usize,
    /// m
    pub init_radius: f64,
    pub init_half_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    /// Effective radial secular frequency of HD+, Hz.
    pub radial_effective_frequency: f64,
    /// Axial secular frequency of HD+, Hz.
    pub axial_frequency: f64,
    pub q_parameter: f64,
    pub rf_drive_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermostatSection {
    /// Target temperatures of the laser-cooled Be+, K; one run each.
    pub temperatures: Vec<f64>,
    /// 1/s
    pub friction_rate: f64,
    /// K/s per velocity component, all ions.
    pub heating_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Sampled duration after equilibration, s.
    pub duration: f64,
    pub equilibration: f64,
    pub sample_interval: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// m
    pub wavelengths: Vec<f64>,
    /// Probe direction, "x", "y" or "z".
    pub axis: String,
    pub histogram_bins: usize,
    /// Ions drawn at random for the histogram; 0 means all molecular ions.
    pub histogram_ions: usize,
    pub histogram_seed: u64,
    /// Log-spaced wavelength sweep for the estimator comparison, m.
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_points: usize,
}

impl AnalysisSection {
    pub fn axis(&self) -> Axis {
        self.axis.parse().expect("validated axis")
    }

    pub fn sweep(&self) -> Vec<f64> {
        let n = self.sweep_points;
        if n == 1 {
            return vec![self.sweep_min];
        }
        let ratio = (self.sweep_max / self.sweep_min).ln();
        (0..n)
            .map(|k| self.sweep_min * (ratio * k as f64 / (n - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectroscopySection {
    /// Tesla.
    pub b_field: f64,
    /// Atomic units (e a0).
    pub transition_dipole_au: f64,
    /// m^2
    pub beam_area: f64,
    /// THz powers, W; one spectrum each.
    pub powers: Vec<f64>,
    /// 1/s
    pub relaxation_rate: f64,
    pub dissociation_rate: f64,
    /// s
    pub probe_time: f64,
    /// Weights of T+ and T-.
    pub branch_weights: [f64; 2],
    /// Noise relative to the noiseless peak signal.
    pub relative_noise: f64,
    /// Scan half-width in units of the expected line width.
    pub scan_half_width: f64,
    pub points: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    /// Tesla.
    pub b_field: f64,
    /// Hz
    pub stark_bound: f64,
    /// W
    pub light_power: f64,
    /// m
    pub light_beam_radius: f64,
    pub scalar_polarizability_lower: f64,
    pub scalar_polarizability_upper: f64,
    pub tensor_polarizability_upper: f64,
    pub geometry_factor: f64,
    /// Hz
    pub light_uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cluster: Option<ClusterSection>,
    pub trap: Option<TrapSection>,
    pub thermostat: Option<ThermostatSection>,
    pub run: Option<RunSection>,
    pub analysis: Option<AnalysisSection>,
    pub spectroscopy: Option<SpectroscopySection>,
    pub budget: Option<BudgetSection>,
}

/// A parsed configuration plus the text it came from, for error lines.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub source_name: String,
    text: String,
}

impl LoadedConfig {
    pub fn from_preset(p: Preset) -> Result<Self, ConfigError> {
        Self::parse(p.text(), &format!("preset {}", p.name()))
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source_name: path.display().to_string(),
            line: None,
            message: format!("cannot read configuration: {e}"),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError {
            source_name: source_name.to_string(),
            line: e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        let loaded = LoadedConfig {
            config,
            source_name: source_name.to_string(),
            text: text.to_string(),
        };
        loaded.validate()?;
        Ok(loaded)
    }

    /// Error located at `key` inside `[section]`.
    fn error_at(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            source_name: self.source_name.clone(),
            line: find_key_line(&self.text, section, key),
            message: format!("[{section}] {key}: {}", message.into()),
        }
    }

    fn missing(&self, section: &str) -> ConfigError {
        ConfigError {
            source_name: self.source_name.clone(),
            line: None,
            message: format!("missing [{section}] section"),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.config;
        let positive = |section: &str, key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(self.error_at(section, key, format!("must be positive, got {v}")))
            }
        };
        let non_negative = |section: &str, key: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(self.error_at(section, key, format!("must be >= 0, got {v}")))
            }
        };
        if let Some(s) = &c.cluster {
            if s.hd_count + s.be_count == 0 {
                return Err(self.error_at("cluster", "hd_count", "cluster has no ions"));
            }
            positive("cluster", "init_radius", s.init_radius)?;
            positive("cluster", "init_half_length", s.init_half_length)?;
        }
        if let Some(s) = &c.trap {
            positive("trap", "radial_effective_frequency", s.radial_effective_frequency)?;
            positive("trap", "axial_frequency", s.axial_frequency)?;
            positive("trap", "rf_drive_frequency", s.rf_drive_frequency)?;
            if !(s.q_parameter > 0.0 && s.q_parameter < 0.9) {
                return Err(self.error_at("trap", "q_parameter", "must lie in (0, 0.9)"));
            }
            self.trap_config().map_err(|e| self.error_at("trap", "axial_frequency", e.to_string()))?;
        }
        if let Some(s) = &c.thermostat {
            if s.temperatures.is_empty() {
                return Err(self.error_at("thermostat", "temperatures", "needs at least one temperature"));
            }
            for &t in &s.temperatures {
                positive("thermostat", "temperatures", t)?;
            }
            non_negative("thermostat", "friction_rate", s.friction_rate)?;
            non_negative("thermostat", "heating_rate", s.heating_rate)?;
        }
        if let Some(s) = &c.run {
            positive("run", "duration", s.duration)?;
            non_negative("run", "equilibration", s.equilibration)?;
            positive("run", "sample_interval", s.sample_interval)?;
        }
        if let Some(s) = &c.analysis {
            if s.wavelengths.is_empty() {
                return Err(self.error_at("analysis", "wavelengths", "needs at least one wavelength"));
            }
            for &w in &s.wavelengths {
                positive("analysis", "wavelengths", w)?;
            }
            s.axis
                .parse::<Axis>()
                .map_err(|e| self.error_at("analysis", "axis", e.to_string()))?;
            if s.histogram_bins == 0 {
                return Err(self.error_at("analysis", "histogram_bins", "must be at least 1"));
            }
            positive("analysis", "sweep_min", s.sweep_min)?;
            positive("analysis", "sweep_max", s.sweep_max)?;
            if s.sweep_max < s.sweep_min {
                return Err(self.error_at("analysis", "sweep_max", "must be >= sweep_min"));
            }
            if s.sweep_points == 0 {
                return Err(self.error_at("analysis", "sweep_points", "must be at least 1"));
            }
        }
        if let Some(s) = &c.spectroscopy {
            if !s.b_field.is_finite() {
                return Err(self.error_at("spectroscopy", "b_field", "must be finite"));
            }
            positive("spectroscopy", "transition_dipole_au", s.transition_dipole_au)?;
            positive("spectroscopy", "beam_area", s.beam_area)?;
            if s.powers.is_empty() {
                return Err(self.error_at("spectroscopy", "powers", "needs at least one power"));
            }
            for &p in &s.powers {
                positive("spectroscopy", "powers", p)?;
            }
            non_negative("spectroscopy", "relaxation_rate", s.relaxation_rate)?;
            positive("spectroscopy", "dissociation_rate", s.dissociation_rate)?;
            positive("spectroscopy", "probe_time", s.probe_time)?;
            for w in s.branch_weights {
                non_negative("spectroscopy", "branch_weights", w)?;
            }
            non_negative("spectroscopy", "relative_noise", s.relative_noise)?;
            positive("spectroscopy", "scan_half_width", s.scan_half_width)?;
            if s.points < 5 {
                return Err(self.error_at("spectroscopy", "points", "needs at least 5 points"));
            }
        }
        if let Some(s) = &c.budget {
            if !s.b_field.is_finite() {
                return Err(self.error_at("budget", "b_field", "must be finite"));
            }
            non_negative("budget", "stark_bound", s.stark_bound)?;
            non_negative("budget", "light_power", s.light_power)?;
            positive("budget", "light_beam_radius", s.light_beam_radius)?;
            non_negative("budget", "light_uncertainty", s.light_uncertainty)?;
        }
        Ok(())
    }

    pub fn cluster(&self) -> Result<ClusterSpec, ConfigError> {
        let s = self.config.cluster.as_ref().ok_or_else(|| self.missing("cluster"))?;
        Ok(ClusterSpec {
            label: s.label.clone(),
            species: vec![hd_plus(), beryllium_ion()],
            counts: vec![s.hd_count, s.be_count],
            init_radius: s.init_radius,
            init_half_length: s.init_half_length,
        })
    }

    fn trap_config(&self) -> ldrot_core::Result<TrapConfig> {
        let s = self.config.trap.as_ref().expect("checked by caller");
        TrapConfig::from_effective_radial(
            hd_plus(),
            s.radial_effective_frequency,
            s.axial_frequency,
            s.q_parameter,
            s.rf_drive_frequency,
        )
    }

    pub fn trap(&self) -> Result<TrapConfig, ConfigError> {
        if self.config.trap.is_none() {
            return Err(self.missing("trap"));
        }
        self.trap_config()
            .map_err(|e| self.error_at("trap", "axial_frequency", e.to_string()))
    }

    /// One thermostat per configured temperature, seeds offset by index.
    pub fn thermostats(&self, seed: u64) -> Result<Vec<ThermostatConfig>, ConfigError> {
        let s = self.config.thermostat.as_ref().ok_or_else(|| self.missing("thermostat"))?;
        Ok(s.temperatures
            .iter()
            .enumerate()
            .map(|(k, &t)| ThermostatConfig {
                cooled_species: beryllium_ion(),
                target_temperature: t,
                friction_rate: s.friction_rate,
                heating_rate_all_species: s.heating_rate,
                rng_seed: seed.wrapping_add(k as u64),
            })
            .collect())
    }

    pub fn run(&self) -> Result<&RunSection, ConfigError> {
        self.config.run.as_ref().ok_or_else(|| self.missing("run"))
    }

    pub fn analysis(&self) -> Result<&AnalysisSection, ConfigError> {
        self.config.analysis.as_ref().ok_or_else(|| self.missing("analysis"))
    }

    pub fn spectroscopy(&self) -> Result<&SpectroscopySection, ConfigError> {
        self.config.spectroscopy.as_ref().ok_or_else(|| self.missing("spectroscopy"))
    }

    pub fn budget_inputs(&self) -> Result<BudgetInputs, ConfigError> {
        let s = self.config.budget.as_ref().ok_or_else(|| self.missing("budget"))?;
        Ok(BudgetInputs {
            b_field: s.b_field,
            stark_bound: s.stark_bound,
            light_power: s.light_power,
            light_area: std::f64::consts::PI * s.light_beam_radius * s.light_beam_radius,
            polarizabilities: Polarizabilities {
                scalar_lower: s.scalar_polarizability_lower,
                scalar_upper: s.scalar_polarizability_upper,
                tensor_upper: s.tensor_polarizability_upper,
            },
            geometry_factor: s.geometry_factor,
            light_uncertainty: s.light_uncertainty,
        })
    }
}

impl SpectroscopySection {
    pub fn beam(&self, power: f64) -> BeamConfig {
        let c = constants();
        BeamConfig {
            power,
            cross_section_area: self.beam_area,
            transition_dipole: self.transition_dipole_au * c.elementary_charge * c.bohr_radius,
            frequency: 1.3149e12,
        }
    }

    pub fn rempd(&self, seed: u64) -> RempdConfig {
        RempdConfig {
            relaxation_rate: self.relaxation_rate,
            dissociation_rate: self.dissociation_rate,
            duration: self.probe_time,
            weights: self.branch_weights,
            noise_sigma: 0.0,
            seed,
        }
    }
}

/// Line of `key = ...` inside `[section]`, 1-based.
fn find_key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let header = format!("[{section}]");
    let mut inside = false;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            inside = t == header;
            continue;
        }
        if inside {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}
