use ldrot_core::constants::{beryllium_ion, default_trap, hd_plus};
use ldrot_core::md::{
    coulomb_forces, coulomb_forces_with, run_with, ClusterSpec, Integrator, IonState, Parallelism, RunOptions,
    ThermostatConfig,
};
use nalgebra::Vector3;

fn small_spec() -> ClusterSpec {
    ClusterSpec {
        label: "small".into(),
        species: vec![hd_plus(), beryllium_ion()],
        counts: vec![6, 30],
        init_radius: 25e-6,
        init_half_length: 150e-6,
    }
}

#[test]
fn energy_is_conserved_without_thermostat() {
    // anneal first: the raw loading cloud has close encounters
    let trap = default_trap();
    let cool = ThermostatConfig::laser_cooled(beryllium_ion(), 0.02, 3);
    let opts = RunOptions {
        equilibration: 100e-6,
        ..RunOptions::default()
    };
    let state = run_with(&small_spec(), &trap, &cool, 130e-6, 1e-6, &opts)
        .unwrap()
        .final_state
        .unwrap();
    let th = ThermostatConfig::off(beryllium_ion());
    let dt = ldrot_core::md::default_timestep(&state, &trap).unwrap();
    let mut it = Integrator::new(state, trap, th, dt, Parallelism::Sequential).unwrap();
    let e0 = it.total_energy();
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        it.step().unwrap();
        worst = worst.max(((it.total_energy() - e0) / e0).abs());
    }
    assert!(worst < 1e-5, "relative drift {worst:e}");
}

#[test]
fn free_cloud_conserves_momentum() {
    let mut state = small_spec().initial_state(0.05, 9).unwrap();
    state.velocities.iter_mut().enumerate().for_each(|(i, v)| v.x += i as f64 * 0.01);
    let p0 = state.momentum();
    let th = ThermostatConfig::off(beryllium_ion());
    let mut it = Integrator::new(state, default_trap(), th, 5e-9, Parallelism::Sequential)
        .unwrap()
        .without_trap()
        .unwrap();
    for _ in 0..2000 {
        it.step().unwrap();
    }
    let p = it.state().momentum();
    let scale: f64 = it
        .state()
        .velocities
        .iter()
        .enumerate()
        .map(|(i, v)| it.state().mass(i) * v.norm())
        .sum();
    assert!((p - p0).norm() <= 1e-12 * scale, "{:e}", (p - p0).norm() / scale);
}

#[test]
fn forces_obey_third_law_and_match_across_kernels() {
    let state = ClusterSpec::c2().initial_state(0.013, 1).unwrap();
    let seq = coulomb_forces(&state).unwrap();
    let net: Vector3<f64> = seq.iter().sum();
    let mag: f64 = seq.iter().map(|f| f.norm()).sum();
    assert!(net.norm() <= 1e-12 * mag);
    for workers in [2, 3] {
        let par = coulomb_forces_with(&state, Parallelism::from_workers(workers)).unwrap();
        for (a, b) in seq.iter().zip(&par) {
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-30));
        }
    }
}

#[test]
fn coincident_ions_are_reported() {
    let p = Vector3::new(1e-6, 0.0, 0.0);
    let s = IonState::at_rest(vec![hd_plus()], vec![0; 3], vec![Vector3::zeros(), p, p]).unwrap();
    match coulomb_forces(&s) {
        Err(ldrot_core::Error::SingularConfiguration { first, second }) => assert_eq!((first, second), (1, 2)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn seeded_runs_are_reproducible() {
    let th = ThermostatConfig::laser_cooled(beryllium_ion(), 0.02, 42);
    let opts = RunOptions {
        equilibration: 20e-6,
        ..RunOptions::default()
    };
    let a = run_with(&small_spec(), &default_trap(), &th, 130e-6, 2.5e-7, &opts).unwrap();
    let b = run_with(&small_spec(), &default_trap(), &th, 130e-6, 2.5e-7, &opts).unwrap();
    assert_eq!(a.trajectory, b.trajectory);
    assert_eq!(a.trajectory.n_frames(), 521);
    let mut other = th.clone();
    other.rng_seed = 43;
    let c = run_with(&small_spec(), &default_trap(), &other, 130e-6, 2.5e-7, &opts).unwrap();
    assert_ne!(a.trajectory, c.trajectory);
}
