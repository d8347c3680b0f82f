//! Fixtures shared by the criterion benchmarks.

use nalgebra::DVector;

use symlab_core::group::{build_group, GroupDescriptor, RepDescriptor, Representation};
use symlab_core::orbit::{Metric, PointCloud};
use symlab_core::stats::{stream_rng, InputDistribution};

pub fn natural(desc: GroupDescriptor) -> Representation {
    Representation::build(&build_group(&desc).expect("group builds"), &RepDescriptor::NaturalPermutation).expect("representation builds")
}

/// `count` standard Gaussian points in `R^dim`.
pub fn gaussian_points(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    InputDistribution::standard_normal(dim).sample_many(&mut stream_rng(seed, 0), count)
}

pub fn gaussian_cloud(dim: usize, count: usize, seed: u64) -> PointCloud {
    PointCloud::new(gaussian_points(dim, count, seed), Metric::Euclidean).expect("non-empty cloud")
}
