use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DVector;
use std::hint::black_box;

use symlab_bench::{gaussian_cloud, gaussian_points, natural};
use symlab_core::averaging::build_psi;
use symlab_core::group::GroupDescriptor;
use symlab_core::kernel::{fit_krr, BaseKernel, KernelSpec};
use symlab_core::linear_gap::{trial_gap, LinearGapConfig};
use symlab_core::orbit::{covering_number, CoverMode};
use symlab_core::stats::stream_rng;

fn psi(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_psi");
    for m in [3usize, 4, 5] {
        let rep = natural(GroupDescriptor::Symmetric(m));
        group.bench_with_input(BenchmarkId::from_parameter(format!("S{m}")), &rep, |b, rep| b.iter(|| build_psi(rep, rep).unwrap()));
    }
    group.finish();
}

fn krr(c: &mut Criterion) {
    let spec = KernelSpec::new(BaseKernel::Gaussian { bandwidth: 1.0 }, natural(GroupDescriptor::Cyclic(4))).unwrap();
    let mut group = c.benchmark_group("fit_krr");
    for n in [32usize, 128] {
        let xs = gaussian_points(4, n, 1);
        let y = DVector::from_iterator(n, xs.iter().map(|x| x.sum()));
        group.bench_with_input(BenchmarkId::from_parameter(n), &(xs, y), |b, (xs, y)| b.iter(|| fit_krr(&spec, xs, y, 0.1).unwrap()));
    }
    group.finish();
}

fn gap_trial(c: &mut Criterion) {
    let rep = natural(GroupDescriptor::Symmetric(3));
    let theta = nalgebra::DMatrix::identity(3, 3);
    let cfg = LinearGapConfig::new(rep.clone(), rep.clone(), theta, 12, 1.0, 1.0, 1, 0).unwrap();
    let psi = build_psi(&rep, &rep).unwrap();
    let mut rng = stream_rng(7, 0);
    c.bench_function("linear_gap_trial/S3_n12", |b| b.iter(|| black_box(trial_gap(&cfg, &psi, &mut rng))));
}

fn covering(c: &mut Criterion) {
    let mut group = c.benchmark_group("covering_number");
    for n in [100usize, 400] {
        let cloud = gaussian_cloud(3, n, 2);
        group.bench_with_input(BenchmarkId::new("greedy", n), &cloud, |b, cloud| b.iter(|| covering_number(cloud, 0.5, CoverMode::GreedyUpper).unwrap()));
        group.bench_with_input(BenchmarkId::new("packing", n), &cloud, |b, cloud| b.iter(|| covering_number(cloud, 0.5, CoverMode::PackingLower).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, psi, krr, gap_trial, covering);
criterion_main!(benches);
