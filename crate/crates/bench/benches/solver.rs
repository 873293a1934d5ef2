use borscat::bor::{ring_moments, solve_frequency};
use borscat::mie::pec_sphere_fsr;
use borscat::pulse::PulseSpec;
use borscat::synthesis::{synthesize, TimeGrid};
use borscat::{FsrMetadata, FsrTable};
use borscat_bench::{cone_meshes, sphere_mesh};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn kernel(c: &mut Criterion) {
    c.bench_function("ring_moments_near", |b| {
        b.iter(|| ring_moments(black_box((0.8, 0.0)), black_box((0.81, 0.01)), 2.0))
    });
    c.bench_function("ring_moments_far", |b| {
        b.iter(|| ring_moments(black_box((0.8, 0.0)), black_box((0.3, 2.0)), 2.0))
    });
}

fn solves(c: &mut Criterion) {
    let sphere = sphere_mesh(2.25, 15.0);
    c.bench_function("pec_sphere_solve_k2", |b| {
        b.iter(|| solve_frequency(&sphere, None, 1.0, black_box(2.0)).unwrap())
    });
    let (pec, _) = cone_meshes(1.0, 2.25, 15.0);
    c.bench_function("pec_cone_solve_k2.25", |b| {
        b.iter(|| solve_frequency(&pec, None, 1.0, black_box(2.25)).unwrap())
    });
    let (pec, coat) = cone_meshes(2.0, 2.25, 15.0);
    let mut g = c.benchmark_group("coated");
    g.sample_size(10);
    g.bench_function("coated_cone_solve_eps2_k2.25", |b| {
        b.iter(|| solve_frequency(&pec, coat.as_ref(), 2.0, black_box(2.25)).unwrap())
    });
    g.finish();
}

fn series_and_synthesis(c: &mut Criterion) {
    c.bench_function("mie_sphere_k12", |b| {
        b.iter(|| pec_sphere_fsr(black_box(12.0)).unwrap())
    });
    let grid: Vec<f64> = (0..=64).map(|i| 2.25 * i as f64 / 64.0).collect();
    let fsr = FsrTable::from_fn(&grid, FsrMetadata::synthetic(), |k| {
        if k == 0.0 {
            0.0.into()
        } else {
            pec_sphere_fsr(k).unwrap()
        }
    })
    .unwrap();
    let pulse = PulseSpec::from_c_tau(4.0, 2.25).unwrap();
    let times = TimeGrid::spanning(-2.0, 14.0, 0.02).unwrap();
    c.bench_function("synthesize_801_points", |b| {
        b.iter(|| synthesize(black_box(&fsr), &pulse, &times).unwrap())
    });
}

criterion_group!(benches, kernel, solves, series_and_synthesis);
criterion_main!(benches);
