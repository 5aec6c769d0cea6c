//! Side-by-side benchmark of the rayon-backed map against the
//! sequential fallback on the two workloads the CLI parallelizes: the
//! two-point classification battery and a Robin resolvent sweep.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;

use krein_lab::battery::two_point_battery;
use krein_lab::classifier::BoundaryForm;
use krein_lab::elliptic::{assemble_1d, Domain1D};
use krein_lab::{classifier, krein, parallel};

fn battery_classification(c: &mut Criterion) {
    let mut group = c.benchmark_group("battery-classify");
    for count in [32usize, 96] {
        let disc = assemble_1d(&Domain1D::uniform(1.0, 60).unwrap()).unwrap();
        let cases = two_point_battery(1.0, 7, count).unwrap();
        group.bench_with_input(BenchmarkId::new("par", count), &count, |b, _| {
            b.iter(|| {
                parallel::par_map(cases.clone(), |case| {
                    let ext = krein::build_extension(&disc, &case.bf).unwrap();
                    let oracle = classifier::brute_force_markov(
                        &(-&ext.generator),
                        &disc.mass,
                        &Default::default(),
                    )
                    .unwrap();
                    classifier::classify(&case.bf, disc.ell).unwrap().markovian == oracle.markovian
                })
            })
        });
        group.bench_with_input(BenchmarkId::new("seq", count), &count, |b, _| {
            b.iter(|| {
                parallel::seq_map(cases.clone(), |case| {
                    let ext = krein::build_extension(&disc, &case.bf).unwrap();
                    let oracle = classifier::brute_force_markov(
                        &(-&ext.generator),
                        &disc.mass,
                        &Default::default(),
                    )
                    .unwrap();
                    classifier::classify(&case.bf, disc.ell).unwrap().markovian == oracle.markovian
                })
            })
        });
    }
    group.finish();
}

fn resolvent_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("resolvent-sweep");
    let disc = assemble_1d(&Domain1D::uniform(1.0, 120).unwrap()).unwrap();
    let betas: Vec<f64> = (0..24).map(|k| 0.25 + 0.25 * k as f64).collect();
    let task = |beta: f64| {
        let b = DMatrix::from_row_slice(2, 2, &[beta, 0.0, 0.0, beta]);
        let bf = BoundaryForm::full(b, disc.w.clone()).unwrap();
        let r = krein::krein_resolvent(&disc, &bf, 1.0).unwrap();
        r.trace()
    };
    group.bench_function("par", |b| b.iter(|| parallel::par_map(betas.clone(), task)));
    group.bench_function("seq", |b| b.iter(|| parallel::seq_map(betas.clone(), task)));
    group.finish();
}

criterion_group!(benches, battery_classification, resolvent_sweep);
criterion_main!(benches);
