use ldrot_core::hyperfine::{transition_frequency, zeeman_pair_stats, Branch, TransitionModel};
use ldrot_core::spectro::{
    fit_lorentzian, power_broadened_fwhm, rabi_frequency, rempd_spectrum, systematics_budget, BeamConfig,
    BudgetInputs, RempdConfig,
};

fn grid(half: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| -half + 2.0 * half * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn weakly_saturated_rempd_fits_to_power_broadened_width() {
    let model = TransitionModel::hd_plus();
    // strong drive, negligible relaxation: the line is power broadened
    let beam = BeamConfig::weak_terahertz().with_power(1e-5);
    let omega = rabi_frequency(&beam);
    let width = power_broadened_fwhm(omega);
    let cfg = RempdConfig {
        relaxation_rate: 1.0,
        dissociation_rate: 1e-3,
        duration: 1.0,
        weights: [0.5, 0.5],
        noise_sigma: 0.0,
        seed: 0,
    };
    let d = grid(6.0 * width, 401);
    let s = rempd_spectrum(&beam, &model, 0.0, &d, &cfg).unwrap();
    let fit = fit_lorentzian(&d, &s, None).unwrap();
    assert!((fit.params.fwhm / width - 1.0).abs() < 1e-3, "{} vs {width}", fit.params.fwhm);
    assert!(fit.params.center.abs() < 1e-6 * width);
}

#[test]
fn unresolved_zeeman_pair_fits_to_its_mean() {
    let model = TransitionModel::hd_plus();
    let b = 0.4e-4;
    let beam = BeamConfig::weak_terahertz().with_power(1e-6);
    let cfg = RempdConfig {
        relaxation_rate: 1.0,
        dissociation_rate: 1e-3,
        duration: 1.0,
        weights: [0.5, 0.5],
        noise_sigma: 0.0,
        seed: 0,
    };
    let width = power_broadened_fwhm(rabi_frequency(&beam));
    let pair = zeeman_pair_stats(&model, b);
    assert!(pair.splitting < 0.1 * width);
    let d = grid(6.0 * width, 301);
    let s = rempd_spectrum(&beam, &model, b, &d, &cfg).unwrap();
    let fit = fit_lorentzian(&d, &s, None).unwrap();
    let f0 = transition_frequency(&model, Branch::Plus, 0.0);
    assert!((fit.params.center - (pair.mean - f0)).abs() < 0.01 * pair.splitting);
}

#[test]
fn budget_rows_and_totals() {
    let b = systematics_budget(&TransitionModel::hd_plus(), &BudgetInputs::experiment_default()).unwrap();
    assert_eq!(b.entries.len(), 4);
    let rss = b.entries.iter().map(|e| e.uncertainty.powi(2)).sum::<f64>().sqrt();
    assert_eq!(b.total_uncertainty(), rss);
}
