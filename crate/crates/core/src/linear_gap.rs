//! Random-design least squares with invariant or equivariant targets.
//!
//! Inputs are `X ~ N(0, sigma_x^2 I_d)`, targets `Y = Theta^T X + xi` with
//! `xi ~ N(0, sigma_xi^2 I_k)` and `Theta` a fixed point of `Psi`. The
//! minimum-norm least-squares estimate `W = X^+ Y` is compared with its
//! projection `Psi(W)`; with isotropic inputs the risk difference is exactly
//! `sigma_x^2 |W - Psi(W)|_F^2`.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::averaging::{build_phi, build_psi, IntertwinerTensor};
use crate::error::{Error, Result};
use crate::group::{character_inner, Representation};
use crate::linalg::{orthonormal_columns, pinv, try_pinv};
use crate::stats::{gaussian_matrix, run_trials, Estimate, MatrixStats, RunningStats, Verdict};

/// Tolerance for `Psi(Theta) = Theta`.
pub const TARGET_EQUIVARIANCE_TOL: f64 = 1e-10;

/// Standard errors allowed between a Monte-Carlo mean and its closed form.
pub const GAP_SE_MULTIPLIER: f64 = 4.0;

/// `E[(X^T X)^+] = r(n, d) I` for an `n x d` standard Gaussian `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WishartCoefficient {
    Finite(f64),
    /// `n` in `[d - 1, d + 1]`.
    Divergent,
}

impl WishartCoefficient {
    pub fn value(self) -> Option<f64> {
        match self {
            WishartCoefficient::Finite(r) => Some(r),
            WishartCoefficient::Divergent => None,
        }
    }
}

pub fn wishart_coefficient(n: usize, d: usize) -> WishartCoefficient {
    let (nf, df) = (n as f64, d as f64);
    if n > d + 1 {
        WishartCoefficient::Finite(1.0 / (nf - df - 1.0))
    } else if n + 1 < d {
        WishartCoefficient::Finite(nf / (df * (df - nf - 1.0)))
    } else {
        WishartCoefficient::Divergent
    }
}

fn in_threshold(n: usize, d: usize) -> bool {
    matches!(wishart_coefficient(n, d), WishartCoefficient::Divergent)
}

/// `n(d - n) / (d (d - 1) (d + 2))`, the off-diagonal projection moment.
pub fn projection_beta(n: usize, d: usize) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    nf * (df - nf) / (df * (df - 1.0) * (df + 2.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct WishartReport {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub coefficient: f64,
    /// Largest `|mean - r I|` in units of the entry's standard error.
    pub max_z: f64,
    pub mean_diagonal: f64,
    #[serde(skip)]
    pub mean: DMatrix<f64>,
    #[serde(skip)]
    pub se: DMatrix<f64>,
    pub verdict: Verdict,
}

/// Monte-Carlo mean of `(X^T X)^+` over standard Gaussian `n x d` matrices,
/// checked entrywise against `r(n, d) I` at four standard errors.
pub fn verify_wishart(n: usize, d: usize, trials: usize, seed: u64) -> Result<WishartReport> {
    let r = wishart_coefficient(n, d).value().ok_or(Error::InterpolationThreshold { n, d })?;
    if trials < 1000 {
        return Err(Error::InvalidArgument(format!("verify_wishart needs at least 1000 trials, got {trials}")));
    }
    let samples = run_trials(trials, seed, |_, rng| {
        let x = gaussian_matrix(rng, n, d);
        pinv(&(x.transpose() * x))
    });
    let mut acc = MatrixStats::new(d, d);
    samples.iter().for_each(|m| acc.push(m));
    let (mean, se) = (acc.mean(), acc.se());
    let target = DMatrix::identity(d, d) * r;
    let mut max_z: f64 = 0.0;
    let mut pass = true;
    for i in 0..d {
        for j in 0..d {
            let est = Estimate { mean: mean[(i, j)], se: se[(i, j)], count: trials };
            max_z = max_z.max(est.z_score(target[(i, j)]));
            pass &= est.agrees(target[(i, j)], GAP_SE_MULTIPLIER);
        }
    }
    Ok(WishartReport {
        n,
        d,
        trials,
        coefficient: r,
        max_z,
        mean_diagonal: mean.diagonal().mean(),
        mean,
        se,
        verdict: Verdict::from_bool(pass),
    })
}

/// One fitted moment of the projection tensor against its closed form.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentCheck {
    pub estimate: Estimate,
    pub expected: f64,
    pub verdict: Verdict,
}

impl MomentCheck {
    fn new(estimate: Estimate, expected: f64) -> Self {
        Self { estimate, expected, verdict: Verdict::from_bool(estimate.agrees(expected, GAP_SE_MULTIPLIER)) }
    }
}

/// Fourth moments of the projection onto a uniformly random `n`-plane.
///
/// `E[P_ab P_ce] = alpha d_ab d_ce + beta d_ac d_be + gamma d_ae d_bc`; the
/// three coefficients are read off the index patterns `P_aa P_cc`, `P_ab^2`
/// and `P_ab P_ba` (`a != b`, `a != c`), averaged over index pairs per sample.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionTensorReport {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub alpha: MomentCheck,
    pub beta: MomentCheck,
    pub gamma: MomentCheck,
    /// `E[P_aa^2] = alpha + beta + gamma`.
    pub diagonal: MomentCheck,
    /// `E[tr(P)^2] = n^2`.
    pub trace_squared: MomentCheck,
    /// `E[tr(P^T P)] = n`.
    pub frobenius: MomentCheck,
    /// `E[tr(P^2)] = n`.
    pub trace_of_square: MomentCheck,
    pub verdict: Verdict,
}

pub fn verify_projection_tensor(n: usize, d: usize, trials: usize, seed: u64) -> Result<ProjectionTensorReport> {
    if n == 0 || n >= d {
        return Err(Error::InvalidArgument(format!("projection tensor needs 0 < n < d, got n = {n}, d = {d}")));
    }
    if trials < 2 {
        return Err(Error::InvalidArgument("projection tensor needs at least 2 trials".into()));
    }
    let rows = run_trials(trials, seed, |_, rng| {
        let q = orthonormal_columns(&gaussian_matrix(rng, d, n));
        let p = &q * q.transpose();
        let mut diag_pairs = 0.0;
        let mut off_sq = 0.0;
        let mut off_swap = 0.0;
        let mut diag_sq = 0.0;
        for a in 0..d {
            diag_sq += p[(a, a)] * p[(a, a)];
            for b in 0..d {
                if a != b {
                    diag_pairs += p[(a, a)] * p[(b, b)];
                    off_sq += p[(a, b)] * p[(a, b)];
                    off_swap += p[(a, b)] * p[(b, a)];
                }
            }
        }
        let pairs = (d * (d - 1)) as f64;
        let tr = p.trace();
        [
            diag_pairs / pairs,
            off_sq / pairs,
            off_swap / pairs,
            diag_sq / d as f64,
            tr * tr,
            (p.transpose() * &p).trace(),
            (&p * &p).trace(),
        ]
    });
    let mut acc = [RunningStats::default(); 7];
    for row in &rows {
        for (a, v) in acc.iter_mut().zip(row) {
            a.push(*v);
        }
    }
    let est: Vec<Estimate> = acc.iter().map(RunningStats::estimate).collect();
    let beta = projection_beta(n, d);
    let (nf, df) = (n as f64, d as f64);
    let alpha = beta + nf * (nf - 1.0) / (df * (df - 1.0));
    let checks = [
        MomentCheck::new(est[0], alpha),
        MomentCheck::new(est[1], beta),
        MomentCheck::new(est[2], beta),
        MomentCheck::new(est[3], alpha + 2.0 * beta),
        MomentCheck::new(est[4], nf * nf),
        MomentCheck::new(est[5], nf),
        MomentCheck::new(est[6], nf),
    ];
    let verdict = Verdict::from_bool(checks.iter().all(|c| c.verdict.passed()));
    Ok(ProjectionTensorReport {
        n,
        d,
        trials,
        alpha: checks[0],
        beta: checks[1],
        gamma: checks[2],
        diagonal: checks[3],
        trace_squared: checks[4],
        frobenius: checks[5],
        trace_of_square: checks[6],
        verdict,
    })
}

/// A validated regression experiment.
#[derive(Debug, Clone)]
pub struct LinearGapConfig {
    rep_in: Representation,
    rep_out: Representation,
    theta: DMatrix<f64>,
    pub n: usize,
    pub sigma_x: f64,
    pub sigma_xi: f64,
    pub trials: usize,
    pub seed: u64,
}

impl LinearGapConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rep_in: Representation,
        rep_out: Representation,
        theta: DMatrix<f64>,
        n: usize,
        sigma_x: f64,
        sigma_xi: f64,
        trials: usize,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self { rep_in, rep_out, theta, n, sigma_x, sigma_xi, trials, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Scalar targets: `psi` is the trivial one-dimensional representation.
    pub fn invariant(
        rep_in: Representation,
        theta: nalgebra::DVector<f64>,
        n: usize,
        sigma_x: f64,
        sigma_xi: f64,
        trials: usize,
        seed: u64,
    ) -> Result<Self> {
        let rep_out = Representation::trivial(rep_in.group(), 1);
        let d = theta.len();
        Self::new(rep_in, rep_out, DMatrix::from_column_slice(d, 1, theta.as_slice()), n, sigma_x, sigma_xi, trials, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rep_in.same_group(&self.rep_out) {
            return Err(Error::GroupMismatch);
        }
        let (d, k) = (self.d(), self.k());
        if self.theta.shape() != (d, k) {
            return Err(Error::InvalidArgument(format!(
                "target must be {d} x {k}, got {} x {}",
                self.theta.nrows(),
                self.theta.ncols()
            )));
        }
        if self.n == 0 || self.trials == 0 {
            return Err(Error::InvalidArgument("n and trials must be positive".into()));
        }
        if in_threshold(self.n, d) {
            return Err(Error::InterpolationThreshold { n: self.n, d });
        }
        if !(self.sigma_x > 0.0 && self.sigma_x.is_finite()) || !(self.sigma_xi >= 0.0 && self.sigma_xi.is_finite()) {
            return Err(Error::InvalidArgument("need sigma_x > 0 and sigma_xi >= 0".into()));
        }
        let psi = build_psi(&self.rep_in, &self.rep_out)?;
        let dev = (psi.apply(&self.theta) - &self.theta).amax();
        if dev > TARGET_EQUIVARIANCE_TOL {
            return Err(Error::InvalidArgument(format!("target is not equivariant: |Psi(Theta) - Theta| = {dev:e}")));
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.rep_in.dim()
    }

    pub fn k(&self) -> usize {
        self.rep_out.dim()
    }

    pub fn rep_in(&self) -> &Representation {
        &self.rep_in
    }

    pub fn rep_out(&self) -> &Representation {
        &self.rep_out
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    /// `d k - <chi_psi, chi_phi>`: dimension of the non-equivariant maps.
    pub fn anti_dim(&self) -> Result<f64> {
        Ok((self.d() * self.k()) as f64 - character_inner(&self.rep_out, &self.rep_in)?)
    }
}

/// `J_G = sum_g w(g) (chi_phi(g) psi(g) + psi(g^2))`.
pub fn j_g(rep_in: &Representation, rep_out: &Representation) -> Result<DMatrix<f64>> {
    if !rep_in.same_group(rep_out) {
        return Err(Error::GroupMismatch);
    }
    let group = rep_in.group();
    let chi = rep_in.character();
    let k = rep_out.dim();
    let mut j = DMatrix::zeros(k, k);
    for g in group.elements() {
        let w = group.weight(g);
        j += rep_out.matrix(g) * (w * chi[g]);
        j += rep_out.matrix(group.compose(g, g)) * w;
    }
    Ok(j)
}

/// Closed-form gap for scalar targets, with `dim A = d - trace(Phi)`.
pub fn closed_form_gap_invariant(cfg: &LinearGapConfig) -> Result<f64> {
    if cfg.k() != 1 || cfg.rep_out.matrices().iter().any(|m| m[(0, 0)] != 1.0) {
        return Err(Error::InvalidArgument("invariant gap needs a trivial one-dimensional output".into()));
    }
    let (n, d) = (cfg.n, cfg.d());
    let r = wishart_coefficient(n, d).value().ok_or(Error::InterpolationThreshold { n, d })?;
    let dim_a = d as f64 - build_phi(&cfg.rep_in).invariant_dim();
    let noise = cfg.sigma_xi * cfg.sigma_xi;
    if n > d + 1 {
        Ok(noise * dim_a * r)
    } else {
        let bias = cfg.sigma_x * cfg.sigma_x * cfg.theta.norm_squared() * projection_beta(n, d);
        Ok(dim_a * (bias + noise * r))
    }
}

pub fn closed_form_gap_equivariant(cfg: &LinearGapConfig) -> Result<f64> {
    let (n, d) = (cfg.n, cfg.d());
    let r = wishart_coefficient(n, d).value().ok_or(Error::InterpolationThreshold { n, d })?;
    let anti = cfg.anti_dim()?;
    let noise = cfg.sigma_xi * cfg.sigma_xi;
    if n > d + 1 {
        Ok(noise * anti * r)
    } else {
        let gram = cfg.theta.transpose() * &cfg.theta;
        let j = j_g(&cfg.rep_in, &cfg.rep_out)?;
        let shape = (d as f64 + 1.0) * cfg.theta.norm_squared() - (j * gram).trace();
        Ok(cfg.sigma_x * cfg.sigma_x * projection_beta(n, d) * shape + noise * anti * r)
    }
}

/// Result of a Monte-Carlo gap experiment.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub group: String,
    /// `d k - <chi_psi, chi_phi>`; equals `dim A` for scalar targets.
    pub dim_a: f64,
    pub sigma_x: f64,
    pub sigma_xi: f64,
    pub trials: usize,
    pub seed: u64,
    pub failed_trials: usize,
    pub mc_gap_mean: f64,
    pub mc_gap_se: f64,
    pub closed_form: f64,
    pub verdict: Verdict,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Exact risk gap `sigma_x^2 |W - Psi(W)|_F^2` of one least-squares fit.
pub fn trial_gap(cfg: &LinearGapConfig, psi: &IntertwinerTensor, rng: &mut crate::stats::SimRng) -> Option<f64> {
    let (n, d, k) = (cfg.n, cfg.d(), cfg.k());
    let x = gaussian_matrix(rng, n, d) * cfg.sigma_x;
    let y = &x * &cfg.theta + gaussian_matrix(rng, n, k) * cfg.sigma_xi;
    let w = try_pinv(&x)? * y;
    let gap = cfg.sigma_x * cfg.sigma_x * psi.complement(&w).norm_squared();
    gap.is_finite().then_some(gap)
}

/// Runs `cfg.trials` independent fits and compares the mean gap with the
/// closed form at four standard errors.
pub fn monte_carlo_gap(cfg: &LinearGapConfig) -> Result<GapReport> {
    cfg.validate()?;
    let start = Instant::now();
    let closed_form = closed_form_gap_equivariant(cfg)?;
    let psi = build_psi(&cfg.rep_in, &cfg.rep_out)?;
    let gaps = run_trials(cfg.trials, cfg.seed, |_, rng| trial_gap(cfg, &psi, rng));
    let mut acc = RunningStats::default();
    gaps.iter().flatten().for_each(|&g| acc.push(g));
    let failed_trials = gaps.iter().filter(|g| g.is_none()).count();
    let est = acc.estimate();
    let pass = acc.count() > 1 && est.agrees(closed_form, GAP_SE_MULTIPLIER);
    Ok(GapReport {
        d: cfg.d(),
        k: cfg.k(),
        n: cfg.n,
        group: cfg.rep_in.group().descriptor().to_string(),
        dim_a: cfg.anti_dim()?,
        sigma_x: cfg.sigma_x,
        sigma_xi: cfg.sigma_xi,
        trials: cfg.trials,
        seed: cfg.seed,
        failed_trials,
        mc_gap_mean: est.mean,
        mc_gap_se: est.se,
        closed_form,
        verdict: Verdict::from_bool(pass),
        wall_time: start.elapsed(),
    })
}
