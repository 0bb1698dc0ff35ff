use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ldrot_core::constants::{beryllium_ion, hd_plus};
use ldrot_core::lineshape::lamb_dicke_peak;
use ldrot_core::with_workers;
use ldrot_core::md::{coulomb_forces_with, Axis, ClusterSpec, Parallelism, Trajectory};
use nalgebra::Vector3;

fn parallelism_modes() -> Vec<(&'static str, Parallelism)> {
    let mut modes = vec![("sequential", Parallelism::Sequential)];
    if cfg!(feature = "parallel") {
        let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).max(2);
        modes.push(("parallel", Parallelism::Workers(workers)));
    }
    modes
}

fn coulomb(c: &mut Criterion) {
    let mut group = c.benchmark_group("coulomb_forces");
    group.sample_size(20);
    for (label, spec) in [("C2", ClusterSpec::c2()), ("C1", ClusterSpec::c1())] {
        let state = spec.initial_state(0.013, 1).unwrap();
        for (mode, par) in parallelism_modes() {
            group.bench_with_input(BenchmarkId::new(mode, label), &state, |b, s| {
                b.iter(|| coulomb_forces_with(black_box(s), par).unwrap())
            });
        }
    }
    group.finish();
}

fn per_ion_analysis(c: &mut Criterion) {
    let ions = 200;
    let frames = 4000;
    let species_index: Vec<usize> = (0..ions).map(|i| usize::from(i >= 50)).collect();
    let frame_data: Vec<Vec<Vector3<f64>>> = (0..frames)
        .map(|k| {
            (0..ions)
                .map(|i| {
                    let ph = 0.01 * k as f64 * (1.0 + i as f64 * 0.003);
                    Vector3::new(2e-6 * ph.sin(), 2e-6 * ph.cos(), 1e-5 * i as f64)
                })
                .collect()
        })
        .collect();
    let traj = Trajectory::from_frames(2.5e-7, vec![hd_plus(), beryllium_ion()], species_index, &frame_data).unwrap();
    let mut group = c.benchmark_group("lamb_dicke_peak");
    group.sample_size(20);
    for (mode, par) in parallelism_modes() {
        group.bench_function(mode, |b| {
            b.iter(|| {
                with_workers(par.workers(), || {
                    lamb_dicke_peak(black_box(&traj), &beryllium_ion(), 10e-6, Axis::X).unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, coulomb, per_ion_analysis);
criterion_main!(benches);
