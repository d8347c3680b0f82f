//! Seeding, streaming moments and the trial runner shared by every
//! Monte-Carlo routine.
//!
//! Each trial draws from its own ChaCha stream keyed by `(seed, trial)`, and
//! results are reduced in trial order, so estimates do not depend on the
//! number of worker threads.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Deterministic RNG used throughout.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 finaliser; decorrelates neighbouring stream indices.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of sub-stream `stream` from a master seed.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    mix(mix(seed) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// RNG for sub-stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    SimRng::seed_from_u64(sub_seed(seed, stream))
}

/// Runs `trials` independent trials in parallel and returns their outputs in
/// trial order.
pub fn run_trials<T, F>(trials: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            f(t, &mut rng)
        })
        .collect()
}

/// Absolute slack used by [`Estimate::agrees`].
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { mean: value, se: 0.0, count: 1 }
    }

    pub fn from_samples(samples: &[f64]) -> Self {
        let mut acc = RunningStats::default();
        samples.iter().for_each(|&x| acc.push(x));
        acc.estimate()
    }

    /// `|mean - target| <= k * se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }

    /// [`Estimate::within`] with an absolute slack of
    /// `ROUNDING_FLOOR * max(1, |target|)`, so that exactly-zero quantities
    /// computed in floating point do not fail on a vanishing standard error.
    pub fn agrees(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se + ROUNDING_FLOOR * target.abs().max(1.0)
    }

    /// Number of standard errors between the mean and `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        let dev = (self.mean - target).abs();
        if self.se > 0.0 {
            dev / self.se
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Outcome of a tolerance check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        let se = if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        };
        Estimate { mean: self.mean, se, count: self.count }
    }
}

/// Entrywise running moments of a stream of equally sized matrices.
#[derive(Debug, Clone)]
pub struct MatrixStats {
    cells: Vec<RunningStats>,
    rows: usize,
    cols: usize,
}

impl MatrixStats {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { cells: vec![RunningStats::default(); rows * cols], rows, cols }
    }

    pub fn push(&mut self, m: &DMatrix<f64>) {
        assert_eq!(m.shape(), (self.rows, self.cols));
        for (cell, &x) in self.cells.iter_mut().zip(m.iter()) {
            cell.push(x);
        }
    }

    pub fn mean(&self) -> DMatrix<f64> {
        DMatrix::from_iterator(self.rows, self.cols, self.cells.iter().map(|c| c.mean()))
    }

    pub fn se(&self) -> DMatrix<f64> {
        DMatrix::from_iterator(self.rows, self.cols, self.cells.iter().map(|c| c.estimate().se))
    }
}

/// Input distributions. All are invariant under orthogonal actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InputDistribution {
    /// `N(0, scale^2 I_d)`.
    Gaussian { dim: usize, scale: f64 },
    /// Uniform on the sphere of the given radius in `R^dim`.
    Sphere { dim: usize, radius: f64 },
}

impl InputDistribution {
    pub fn standard_normal(dim: usize) -> Self {
        Self::Gaussian { dim, scale: 1.0 }
    }

    /// Uniform on the sphere of radius `sqrt(dim)`, which has identity covariance.
    pub fn sphere_sqrt_d(dim: usize) -> Self {
        Self::Sphere { dim, radius: (dim as f64).sqrt() }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::Gaussian { dim, .. } | Self::Sphere { dim, .. } => dim,
        }
    }

    /// `E[x_i^2]`, identical for every coordinate.
    pub fn coordinate_variance(&self) -> f64 {
        match *self {
            Self::Gaussian { scale, .. } => scale * scale,
            Self::Sphere { dim, radius } => radius * radius / dim as f64,
        }
    }

    /// `sup |x|^2` over the support, infinite for the Gaussian.
    pub fn max_sq_norm(&self) -> f64 {
        match *self {
            Self::Gaussian { .. } => f64::INFINITY,
            Self::Sphere { radius, .. } => radius * radius,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        match *self {
            Self::Gaussian { dim, scale } => gaussian_vector(rng, dim) * scale,
            Self::Sphere { dim, radius } => loop {
                let v = gaussian_vector(rng, dim);
                let norm = v.norm();
                if norm > 0.0 {
                    break v * (radius / norm);
                }
            },
        }
    }

    pub fn sample_many<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<DVector<f64>> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Matrix with i.i.d. `N(0, 1)` entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_stats_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25];
        let est = Estimate::from_samples(&xs);
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((est.mean - mean).abs() < 1e-14);
        assert!((est.se - (var / 5.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn trials_are_independent_of_thread_count() {
        let run = || run_trials(64, 11, |_, rng| rng.random::<f64>());
        let a = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(run);
        assert_eq!(a, b);
    }

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(sub_seed(0, 0), sub_seed(0, 1));
        assert_ne!(sub_seed(0, 0), sub_seed(1, 0));
    }

    #[test]
    fn sphere_samples_have_requested_radius() {
        let mut rng = stream_rng(3, 0);
        let dist = InputDistribution::sphere_sqrt_d(5);
        for _ in 0..10 {
            assert!((dist.sample(&mut rng).norm() - 5f64.sqrt()).abs() < 1e-12);
        }
    }
}
