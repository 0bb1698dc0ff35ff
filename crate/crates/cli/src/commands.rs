use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use ldrot_core::analysis::{
    linear_spectral_density, motion_stats, random_ions, transverse_histogram, Coordinate, HistogramOptions,
};
use ldrot_core::constants::{beryllium_ion, hd_plus};
use ldrot_core::hyperfine::{transition_frequency, zeeman_pair_stats, Branch, TransitionModel};
use ldrot_core::lineshape::{gaussian_peak_estimate, lamb_dicke_peak, single_ion_peak_estimate};
use ldrot_core::md::{run_with, Parallelism, RunOptions, Trajectory};
use ldrot_core::spectro::{
    fit_lorentzian, rabi_frequency, rempd_spectrum, systematics_budget, write_spectrum_csv, SystematicsBudget,
};
use ldrot_core::trap::Species;
use ldrot_core::with_workers;

use crate::config::{LoadedConfig, Preset, RunConfig};
use crate::error::CliError;
use crate::Common;

type Result<T> = std::result::Result<T, CliError>;

fn load(common: &Common, fallback: Preset) -> Result<LoadedConfig> {
    Ok(match (&common.config, common.preset) {
        (Some(path), _) => LoadedConfig::from_path(path)?,
        (None, Some(p)) => LoadedConfig::from_preset(p)?,
        (None, None) => LoadedConfig::from_preset(fallback)?,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn out_dir(common: &Common) -> Result<PathBuf> {
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    Ok(common.out.clone())
}

fn check_workers(common: &Common) -> Result<()> {
    if common.workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    Ok(())
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    config_source: String,
    config: RunConfig,
    seed: u64,
    workers: usize,
    runs: Vec<RunRecord>,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct RunRecord {
    target_temperature_k: f64,
    thermostat_seed: u64,
    trajectory: String,
    sha256: String,
    frames: usize,
    ions: usize,
    dt_s: f64,
    steps: u64,
    hd_temperature_k: f64,
    be_temperature_k: f64,
    wall_time_s: f64,
}

pub fn simulate(common: &Common) -> Result<()> {
    check_workers(common)?;
    let cfg = load(common, Preset::C2)?;
    let spec = cfg.cluster()?;
    let trap = cfg.trap()?;
    let run = cfg.run()?.clone();
    let seed = common.seed.unwrap_or(run.seed);
    let thermostats = cfg.thermostats(seed)?;
    let out = out_dir(common)?;
    let options = RunOptions {
        equilibration: run.equilibration,
        parallelism: Parallelism::from_workers(common.workers),
        ..RunOptions::default()
    };
    let start = Instant::now();
    let mut runs = Vec::new();
    for th in &thermostats {
        let t0 = Instant::now();
        let output = with_workers(common.workers, || {
            run_with(&spec, &trap, th, run.duration, run.sample_interval, &options)
        })?;
        let name = format!(
            "trajectory_{}_{:.0}uK.bin",
            spec.label,
            th.target_temperature * 1e6
        );
        let path = out.join(&name);
        output.trajectory.save(&path)?;
        let rec = RunRecord {
            target_temperature_k: th.target_temperature,
            thermostat_seed: th.rng_seed,
            trajectory: name,
            sha256: sha256_file(&path)?,
            frames: output.trajectory.n_frames(),
            ions: output.trajectory.n_ions(),
            dt_s: output.dt,
            steps: output.steps,
            hd_temperature_k: output.thermometry.mean(&hd_plus()).unwrap_or(f64::NAN),
            be_temperature_k: output.thermometry.mean(&beryllium_ion()).unwrap_or(f64::NAN),
            wall_time_s: t0.elapsed().as_secs_f64(),
        };
        println!(
            "{} T={:.4e} K: {} frames, T(HD+)={:.4e} K, {:.1} s -> {}",
            spec.label,
            rec.target_temperature_k,
            rec.frames,
            rec.hd_temperature_k,
            rec.wall_time_s,
            path.display()
        );
        runs.push(rec);
    }
    let mut config = cfg.config.clone();
    if let Some(r) = config.run.as_mut() {
        r.seed = seed;
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_source: cfg.source_name.clone(),
        config,
        seed,
        workers: common.workers,
        runs,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let mut w = create(&out, "manifest.json")?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// The trajectory's own copy of `wanted`, matched by name.
fn stored_species(traj: &Trajectory, wanted: &Species) -> Result<Species> {
    traj.species()
        .iter()
        .find(|s| s.name == wanted.name)
        .cloned()
        .ok_or_else(|| CliError::Other(anyhow::anyhow!("trajectory has no {} ions", wanted.name)))
}

fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let traj = Trajectory::load(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    if traj.is_empty() {
        return Err(CliError::Other(anyhow::anyhow!("{}: trajectory has no frames", path.display())));
    }
    Ok(traj)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "trajectory".into())
}

pub fn analyze(common: &Common, trajectory: &Path) -> Result<()> {
    check_workers(common)?;
    let cfg = load(common, Preset::C2)?;
    let a = cfg.analysis()?.clone();
    let traj = load_trajectory(trajectory)?;
    let out = out_dir(common)?;
    let base = stem(trajectory);
    let hd = stored_species(&traj, &hd_plus())?;
    with_workers(common.workers, || -> Result<()> {
        let mut w = create(&out, &format!("{base}_motion.csv"))?;
        let stats = motion_stats(&traj, &hd)?;
        stats.write_csv(&mut w)?;
        if let Ok(be) = stored_species(&traj, &beryllium_ion()) {
            let be_stats = motion_stats(&traj, &be)?;
            let mut buf = Vec::new();
            be_stats.write_csv(&mut buf)?;
            // keep a single header line
            let text = String::from_utf8_lossy(&buf);
            for line in text.lines().skip(1) {
                writeln!(w, "{line}")?;
            }
        }
        w.flush()?;
        println!(
            "{}: Delta x = {:.4e} m, Delta y = {:.4e} m, Delta z = {:.4e} m",
            hd.name,
            stats.delta_x(),
            stats.delta_y(),
            stats.delta_z()
        );

        let count = if a.histogram_ions == 0 { usize::MAX } else { a.histogram_ions };
        let ions = random_ions(&traj, &hd, count, common.seed.unwrap_or(a.histogram_seed))?;
        let hist = transverse_histogram(
            &traj,
            &ions,
            HistogramOptions {
                bins: a.histogram_bins,
                half_width: None,
            },
        )?;
        let mut w = create(&out, &format!("{base}_histogram.csv"))?;
        writeln!(w, "# ions={}", ions.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "))?;
        hist.write_csv(&mut w)?;
        w.flush()?;

        for coord in [Coordinate::Axis(a.axis()), Coordinate::Rho] {
            let sd = linear_spectral_density(&traj, coord, &hd)?;
            let mut w = create(&out, &format!("{base}_spectral_{}.csv", coord.label()))?;
            sd.write_csv(&mut w)?;
            w.flush()?;
        }
        Ok(())
    })
}

pub fn lineshape(common: &Common, trajectory: &Path) -> Result<()> {
    check_workers(common)?;
    let cfg = load(common, Preset::C2)?;
    let a = cfg.analysis()?.clone();
    let axis = a.axis();
    let traj = load_trajectory(trajectory)?;
    let out = out_dir(common)?;
    let base = stem(trajectory);
    let hd = stored_species(&traj, &hd_plus())?;
    with_workers(common.workers, || -> Result<()> {
        let stats = motion_stats(&traj, &hd)?;
        let dx = stats.delta[axis.index()];
        let mut summary = create(&out, &format!("{base}_lineshape_summary.csv"))?;
        writeln!(summary, "# axis={}", axis.label())?;
        writeln!(summary, "# delta_m={dx:.16e}")?;
        writeln!(summary, "wavelength_m,l0_exact,l0_gaussian,l0_single_ion,fwhm_hz")?;
        for &lambda in &a.wavelengths {
            let ls = ldrot_core::lineshape::lineshape(&traj, &hd, lambda, axis)?;
            let lg = gaussian_peak_estimate(dx, lambda);
            let lsp = single_ion_peak_estimate(dx, lambda);
            let mut w = create(&out, &format!("{base}_lineshape_{:.0}um.csv", lambda * 1e6))?;
            ls.write_csv(&mut w, lg, lsp)?;
            w.flush()?;
            let fwhm = ls.fwhm(1).unwrap_or(f64::NAN);
            writeln!(summary, "{lambda:.16e},{:.16e},{lg:.16e},{lsp:.16e},{fwhm:.16e}", ls.peak)?;
            println!(
                "lambda = {:.4e} m: L(0) = {:.4}, L_g(0) = {:.4}, L_sp(0) = {:.4}",
                lambda, ls.peak, lg, lsp
            );
        }
        summary.flush()?;

        let mut w = create(&out, &format!("{base}_estimator_comparison.csv"))?;
        writeln!(w, "# axis={}", axis.label())?;
        writeln!(w, "# delta_m={dx:.16e}")?;
        writeln!(w, "wavelength_m,l0_exact,l0_gaussian,l0_single_ion")?;
        for lambda in a.sweep() {
            let exact = lamb_dicke_peak(&traj, &hd, lambda, axis)?;
            writeln!(
                w,
                "{lambda:.16e},{exact:.16e},{:.16e},{:.16e}",
                gaussian_peak_estimate(dx, lambda),
                single_ion_peak_estimate(dx, lambda)
            )?;
        }
        w.flush()?;
        Ok(())
    })
}

pub fn spectrum(common: &Common) -> Result<()> {
    check_workers(common)?;
    let cfg = load(common, Preset::Experiment)?;
    let s = cfg.spectroscopy()?.clone();
    let seed = common.seed.unwrap_or(s.seed);
    let model = TransitionModel::hd_plus();
    let out = out_dir(common)?;
    let pair = zeeman_pair_stats(&model, s.b_field);
    let f_zero = transition_frequency(&model, Branch::Plus, 0.0);

    let mut report = create(&out, "fit_report.csv")?;
    writeln!(report, "# zero detuning = f(B=0) = {f_zero:.16e} Hz")?;
    writeln!(report, "# b_field_t={:.16e}", s.b_field)?;
    writeln!(report, "# pair_mean_offset_hz={:.16e}", pair.mean_shift)?;
    writeln!(
        report,
        "power_w,rabi_rad_s,expected_fwhm_hz,center_hz,center_unc_hz,fwhm_hz,fwhm_unc_hz,amplitude,amplitude_unc,offset,offset_unc,iterations,residual_rms"
    )?;
    for (k, &power) in s.powers.iter().enumerate() {
        let beam = s.beam(power);
        let omega = rabi_frequency(&beam);
        let expected = (2.0 * omega * omega + s.relaxation_rate * s.relaxation_rate).sqrt() / std::f64::consts::TAU;
        let half = s.scan_half_width * expected;
        let n = s.points;
        let detunings: Vec<f64> = (0..n)
            .map(|i| pair.mean_shift - half + 2.0 * half * i as f64 / (n - 1) as f64)
            .collect();
        let mut rempd = s.rempd(seed.wrapping_add(k as u64));
        let clean = rempd_spectrum(&beam, &model, s.b_field, &detunings, &rempd)?;
        let peak = clean.iter().cloned().fold(0.0, f64::max);
        rempd.noise_sigma = s.relative_noise * peak;
        let signal = rempd_spectrum(&beam, &model, s.b_field, &detunings, &rempd)?;
        let fit = fit_lorentzian(&detunings, &signal, None)?;

        let header = [
            ("power_w", format!("{power:.16e}")),
            ("beam_area_m2", format!("{:.16e}", s.beam_area)),
            ("transition_dipole_au", format!("{:.16e}", s.transition_dipole_au)),
            ("rabi_rad_s", format!("{omega:.16e}")),
            ("relaxation_rate_s", format!("{:.16e}", s.relaxation_rate)),
            ("dissociation_rate_s", format!("{:.16e}", s.dissociation_rate)),
            ("probe_time_s", format!("{:.16e}", s.probe_time)),
            ("b_field_t", format!("{:.16e}", s.b_field)),
            ("weights", format!("{:.16e} {:.16e}", s.branch_weights[0], s.branch_weights[1])),
            ("noise_sigma", format!("{:.16e}", rempd.noise_sigma)),
            ("seed", rempd.seed.to_string()),
            ("zero_detuning_hz", format!("{f_zero:.16e}")),
            ("fit_center_hz", format!("{:.16e}", fit.params.center)),
            ("fit_fwhm_hz", format!("{:.16e}", fit.params.fwhm)),
        ];
        let mut w = create(&out, &format!("spectrum_{k}.csv"))?;
        write_spectrum_csv(&mut w, &header, &detunings, &signal)?;
        w.flush()?;

        let (p, u) = (fit.params, fit.uncertainties);
        writeln!(
            report,
            "{power:.16e},{omega:.16e},{expected:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            p.center, u.center, p.fwhm, u.fwhm, p.amplitude, u.amplitude, p.offset, u.offset, fit.iterations, fit.residual_rms
        )?;
        println!(
            "P = {:.3e} W: FWHM {:.4} +- {:.4} kHz (expected {:.4} kHz), center {:+.4} +- {:.4} kHz",
            power,
            p.fwhm / 1e3,
            u.fwhm / 1e3,
            expected / 1e3,
            p.center / 1e3,
            u.center / 1e3
        );
    }
    report.flush()?;

    if cfg.config.budget.is_some() {
        let budget = systematics_budget(&model, &cfg.budget_inputs()?)?;
        write_budget(&out, &budget)?;
    }
    Ok(())
}

fn write_budget(out: &Path, budget: &SystematicsBudget) -> Result<()> {
    let mut w = create(out, "budget.csv")?;
    budget.write_table(&mut w)?;
    w.flush()?;
    budget.write_table(std::io::stdout().lock())?;
    Ok(())
}

pub fn budget(common: &Common) -> Result<()> {
    let cfg = load(common, Preset::Experiment)?;
    let inputs = cfg.budget_inputs()?;
    let budget = systematics_budget(&TransitionModel::hd_plus(), &inputs)?;
    write_budget(&out_dir(common)?, &budget)
}
