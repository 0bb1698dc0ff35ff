use ldrot_core::analysis::{linear_spectral_density, motion_stats, transverse_histogram, Coordinate, HistogramOptions};
use ldrot_core::constants::{beryllium_ion, default_trap, hd_plus};
use ldrot_core::lineshape::{lamb_dicke_peak, lineshape};
use ldrot_core::md::{run_with, Axis, ClusterSpec, RunOptions, ThermostatConfig, Trajectory};

fn short_run() -> Trajectory {
    let spec = ClusterSpec {
        label: "small".into(),
        species: vec![hd_plus(), beryllium_ion()],
        counts: vec![5, 25],
        init_radius: 25e-6,
        init_half_length: 120e-6,
    };
    let th = ThermostatConfig::laser_cooled(beryllium_ion(), 0.02, 5);
    let opts = RunOptions {
        equilibration: 100e-6,
        ..RunOptions::default()
    };
    run_with(&spec, &default_trap(), &th, 200e-6, 2.5e-7, &opts).unwrap().trajectory
}

#[test]
fn trajectory_to_lineshape() {
    let t = short_run();
    let stats = motion_stats(&t, &hd_plus()).unwrap();
    assert!(stats.delta.iter().all(|d| d.is_finite() && *d > 0.0));

    for lambda in [10e-6, 50e-6, 228e-6] {
        let l = lineshape(&t, &hd_plus(), lambda, Axis::X).unwrap();
        assert!((l.total_weight() - 1.0).abs() < 1e-6);
        let peak = lamb_dicke_peak(&t, &hd_plus(), lambda, Axis::X).unwrap();
        assert!((l.peak - peak).abs() < 1e-9);
    }
    let far = lamb_dicke_peak(&t, &hd_plus(), 1.0, Axis::X).unwrap();
    assert!(far > 0.999);

    let s = linear_spectral_density(&t, Coordinate::Axis(Axis::X), &hd_plus()).unwrap();
    assert!(s.density.iter().all(|d| d.is_finite() && *d >= 0.0));
    let ions = t.ions_of(&hd_plus());
    let h = transverse_histogram(&t, &ions, HistogramOptions::default()).unwrap();
    assert!((h.counts.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert_eq!(h.samples, ions.len() * t.n_frames());
}

#[test]
fn saved_trajectory_gives_identical_analysis() {
    let t = short_run();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.traj");
    t.save(&path).unwrap();
    let back = Trajectory::load(&path).unwrap();
    assert_eq!(back, t);
    let a = motion_stats(&t, &hd_plus()).unwrap();
    let b = motion_stats(&back, &hd_plus()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn truncated_file_is_rejected() {
    let t = short_run();
    let mut bytes = Vec::new();
    t.write_binary(&mut bytes).unwrap();
    bytes.truncate(bytes.len() - 3);
    assert!(Trajectory::read_binary(bytes.as_slice()).is_err());
}
