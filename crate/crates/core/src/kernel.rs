//! Kernel ridge regression with group-averaged kernels.

use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::averaging::{build_phi, ProjectionMatrix};
use crate::error::{Error, Result};
use crate::group::Representation;
use crate::linalg::{spd_solve_vec, symmetric_eigenvalues};
use crate::stats::{run_trials, stream_rng, Estimate, InputDistribution, RunningStats, SimRng, Verdict, ROUNDING_FLOOR};

/// Switch-condition deviation at or below which the condition is accepted.
pub const SWITCH_VERIFY_TOL: f64 = 1e-9;
/// Deviation above which the condition is rejected.
pub const SWITCH_REFUTE_TOL: f64 = 1e-6;
/// Minimum number of pairs for an `N[k]` estimate.
pub const MIN_N_PAIRS: usize = 1000;

pub trait KernelFunction: Send + Sync {
    fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64;
}

impl<F> KernelFunction for F
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> f64 + Send + Sync,
{
    fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self(x, y)
    }
}

/// Scalar profile `kappa` of an inner-product kernel `k(x, y) = kappa(x^T y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Profile {
    /// `(t + offset)^degree`.
    Polynomial { degree: u32, offset: f64 },
    /// `exp(t / scale)`.
    Exponential { scale: f64 },
}

impl Profile {
    pub fn apply(&self, t: f64) -> f64 {
        match *self {
            Profile::Polynomial { degree, offset } => (t + offset).powi(degree as i32),
            Profile::Exponential { scale } => (t / scale).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseKernel {
    /// `x^T y`.
    Linear,
    /// `exp(-|x - y|^2 / (2 bandwidth^2))`.
    Gaussian { bandwidth: f64 },
    InnerProduct { profile: Profile },
    /// `x^T A y`.
    Bilinear { matrix: Vec<Vec<f64>> },
}

impl BaseKernel {
    fn bilinear_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
        let d = rows.len();
        DMatrix::from_fn(d, d, |i, j| rows[i][j])
    }
}

/// A base kernel with the group action on its inputs.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    base: BaseKernel,
    bilinear: Option<DMatrix<f64>>,
    action: Representation,
    declared_mk: Option<f64>,
}

impl KernelSpec {
    pub fn new(base: BaseKernel, action: Representation) -> Result<Self> {
        let d = action.dim();
        let bilinear = match &base {
            BaseKernel::Gaussian { bandwidth } if !(*bandwidth > 0.0) => {
                return Err(Error::InvalidArgument(format!("gaussian bandwidth must be positive, got {bandwidth}")));
            }
            BaseKernel::InnerProduct { profile: Profile::Exponential { scale } } if !(*scale > 0.0) => {
                return Err(Error::InvalidArgument(format!("exponential profile scale must be positive, got {scale}")));
            }
            BaseKernel::Bilinear { matrix } => {
                if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
                    return Err(Error::DimensionMismatch { expected: d, got: matrix.len() });
                }
                Some(BaseKernel::bilinear_matrix(matrix))
            }
            _ => None,
        };
        Ok(Self { base, bilinear, action, declared_mk: None })
    }

    /// Overrides the derived `sup_x k(x, x)`.
    pub fn with_mk(mut self, mk: f64) -> Self {
        self.declared_mk = Some(mk);
        self
    }

    pub fn base(&self) -> &BaseKernel {
        &self.base
    }

    pub fn action(&self) -> &Representation {
        &self.action
    }

    pub fn dim(&self) -> usize {
        self.action.dim()
    }

    /// `M_k = sup_x k(x, x)` over the support of `dist`; infinite when unbounded.
    pub fn mk(&self, dist: &InputDistribution) -> f64 {
        if let Some(mk) = self.declared_mk {
            return mk;
        }
        let r2 = dist.max_sq_norm();
        match &self.base {
            BaseKernel::Linear => r2,
            BaseKernel::Gaussian { .. } => 1.0,
            BaseKernel::InnerProduct { profile } => {
                if r2.is_finite() {
                    profile.apply(r2).max(profile.apply(0.0))
                } else {
                    f64::INFINITY
                }
            }
            BaseKernel::Bilinear { .. } => {
                let a = self.bilinear.as_ref().expect("bilinear matrix");
                let top = symmetric_eigenvalues(a).max();
                if top <= 0.0 {
                    0.0
                } else {
                    top * r2
                }
            }
        }
    }

    /// Symmetry on 100 random pairs and Gram PSD on 50 random points.
    pub fn validate(&self, seed: u64) -> Result<()> {
        let dist = InputDistribution::standard_normal(self.dim());
        let mut rng = stream_rng(seed, 0);
        for _ in 0..100 {
            let (x, y) = (dist.sample(&mut rng), dist.sample(&mut rng));
            let (a, b) = (self.eval(&x, &y), self.eval(&y, &x));
            if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(Error::InvalidArgument(format!("kernel is not symmetric: k(x,y) = {a}, k(y,x) = {b}")));
            }
        }
        let points = dist.sample_many(&mut rng, 50);
        let min_eig = min_gram_eigenvalue(self, &points);
        if min_eig < -1e-8 {
            return Err(Error::InvalidArgument(format!("kernel Gram matrix is indefinite (min eigenvalue {min_eig:e})")));
        }
        Ok(())
    }
}

impl KernelFunction for KernelSpec {
    fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        match &self.base {
            BaseKernel::Linear => x.dot(y),
            BaseKernel::Gaussian { bandwidth } => (-(x - y).norm_squared() / (2.0 * bandwidth * bandwidth)).exp(),
            BaseKernel::InnerProduct { profile } => profile.apply(x.dot(y)),
            BaseKernel::Bilinear { .. } => {
                let a = self.bilinear.as_ref().expect("bilinear matrix");
                x.dot(&(a * y))
            }
        }
    }
}

pub fn gram<K: KernelFunction + ?Sized>(kernel: &K, points: &[DVector<f64>]) -> DMatrix<f64> {
    let n = points.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&points[i], &points[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

fn min_gram_eigenvalue<K: KernelFunction + ?Sized>(kernel: &K, points: &[DVector<f64>]) -> f64 {
    let k = gram(kernel, points);
    let scale = (k.trace() / points.len().max(1) as f64).abs().max(1.0);
    symmetric_eigenvalues(&k).min() / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchStatus {
    Verified,
    Refuted,
    Unchecked,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchCheck {
    pub status: SwitchStatus,
    pub max_violation: f64,
}

/// Compares `sum_g w(g) k(gx, y)` with `sum_g w(g) k(x, gy)` on `n_pairs`
/// standard Gaussian pairs.
pub fn check_switch_condition(kernel: &KernelSpec, n_pairs: usize, seed: u64) -> Result<SwitchCheck> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("switch check needs n_pairs >= 1".into()));
    }
    let rep = kernel.action();
    let group = rep.group();
    let dist = InputDistribution::standard_normal(rep.dim());
    let mut rng = stream_rng(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..n_pairs {
        let (x, y) = (dist.sample(&mut rng), dist.sample(&mut rng));
        let mut left = 0.0;
        let mut right = 0.0;
        for g in group.elements() {
            let w = group.weight(g);
            left += w * kernel.eval(&rep.act(g, &x), &y);
            right += w * kernel.eval(&x, &rep.act(g, &y));
        }
        worst = worst.max((left - right).abs());
    }
    let status = if worst <= SWITCH_VERIFY_TOL {
        SwitchStatus::Verified
    } else if worst > SWITCH_REFUTE_TOL {
        SwitchStatus::Refuted
    } else {
        SwitchStatus::Unchecked
    };
    Ok(SwitchCheck { status, max_violation: worst })
}

/// `kbar(x, y) = sum_g w(g) k(x, gy)` and `kperp = k - kbar`.
#[derive(Debug, Clone)]
pub struct AveragedKernel {
    parent: KernelSpec,
    switch: SwitchCheck,
}

pub fn build_averaged_kernel(kernel: &KernelSpec) -> AveragedKernel {
    let switch = check_switch_condition(kernel, 200, 0x5eed).expect("n_pairs > 0");
    AveragedKernel { parent: kernel.clone(), switch }
}

impl AveragedKernel {
    pub fn parent(&self) -> &KernelSpec {
        &self.parent
    }

    pub fn switch(&self) -> SwitchCheck {
        self.switch
    }

    pub fn k(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.parent.eval(x, y)
    }

    pub fn kbar(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let rep = self.parent.action();
        let group = rep.group();
        group.elements().map(|g| group.weight(g) * self.parent.eval(x, &rep.act(g, y))).sum()
    }

    pub fn kperp(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.k(x, y) - self.kbar(x, y)
    }

    /// Symmetry and Gram-PSD spot checks of `kbar` on standard Gaussian points.
    pub fn spot_check(&self, seed: u64) -> bool {
        let dist = InputDistribution::standard_normal(self.parent.dim());
        let mut rng = stream_rng(seed, 0);
        for _ in 0..50 {
            let (x, y) = (dist.sample(&mut rng), dist.sample(&mut rng));
            let (a, b) = (self.kbar(&x, &y), self.kbar(&y, &x));
            if (a - b).abs() > 1e-10 * a.abs().max(1.0) {
                return false;
            }
        }
        let points = dist.sample_many(&mut rng, 30);
        min_gram_eigenvalue(&|x: &DVector<f64>, y: &DVector<f64>| self.kbar(x, y), &points) >= -1e-8
    }
}

/// `N[j] = E[j(X, Y)^2]` for independent `X, Y ~ dist`.
pub fn estimate_n<K>(kernel: &K, dist: &InputDistribution, pairs: usize, seed: u64) -> Result<Estimate>
where
    K: KernelFunction + ?Sized,
{
    if pairs < MIN_N_PAIRS {
        return Err(Error::InvalidArgument(format!("N estimate needs at least {MIN_N_PAIRS} pairs, got {pairs}")));
    }
    let mut rng = stream_rng(seed, 0);
    let mut acc = RunningStats::default();
    for _ in 0..pairs {
        let (x, y) = (dist.sample(&mut rng), dist.sample(&mut rng));
        acc.push(kernel.eval(&x, &y).powi(2));
    }
    Ok(acc.estimate())
}

/// `N[k]`, `N[kbar]` and `N[kperp]` on one stream of pairs.
#[derive(Debug, Clone, Copy)]
pub struct NDecomposition {
    pub n_k: Estimate,
    pub n_kbar: Estimate,
    pub n_kperp: Estimate,
}

impl NDecomposition {
    /// `|N[k] - N[kbar] - N[kperp]| <= k * sqrt(se_k^2 + se_bar^2 + se_perp^2)`.
    pub fn holds(&self, k: f64) -> bool {
        let diff = self.n_k.mean - self.n_kbar.mean - self.n_kperp.mean;
        let se = (self.n_k.se.powi(2) + self.n_kbar.se.powi(2) + self.n_kperp.se.powi(2)).sqrt();
        diff.abs() <= k * se + ROUNDING_FLOOR * self.n_k.mean.abs().max(1.0)
    }
}

pub fn n_decomposition(avg: &AveragedKernel, dist: &InputDistribution, pairs: usize, seed: u64) -> Result<NDecomposition> {
    if pairs < MIN_N_PAIRS {
        return Err(Error::InvalidArgument(format!("N estimate needs at least {MIN_N_PAIRS} pairs, got {pairs}")));
    }
    let mut rng = stream_rng(seed, 0);
    let mut acc = [RunningStats::default(); 3];
    for _ in 0..pairs {
        let (x, y) = (dist.sample(&mut rng), dist.sample(&mut rng));
        let k = avg.k(&x, &y);
        let kbar = avg.kbar(&x, &y);
        acc[0].push(k * k);
        acc[1].push(kbar * kbar);
        acc[2].push((k - kbar).powi(2));
    }
    Ok(NDecomposition { n_k: acc[0].estimate(), n_kbar: acc[1].estimate(), n_kperp: acc[2].estimate() })
}

/// `f(x) = sum_i alpha_i k(x_i, x)` with `alpha = (K + rho I)^-1 y`.
#[derive(Debug, Clone)]
pub struct KrrModel<K> {
    kernel: K,
    points: Vec<DVector<f64>>,
    targets: DVector<f64>,
    alpha: DVector<f64>,
    rho: f64,
}

pub fn fit_krr<K: KernelFunction + Clone>(kernel: &K, points: &[DVector<f64>], y: &DVector<f64>, rho: f64) -> Result<KrrModel<K>> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("ridge parameter must be positive, got {rho}")));
    }
    if points.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), got: y.len() });
    }
    let k = gram(kernel, points);
    let alpha = solve_ridge(&k, y, rho)?;
    Ok(KrrModel { kernel: kernel.clone(), points: points.to_vec(), targets: y.clone(), alpha, rho })
}

fn solve_ridge(k: &DMatrix<f64>, y: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
    let mut a = k.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += rho;
    }
    spd_solve_vec(&a, y)
}

impl<K: KernelFunction> KrrModel<K> {
    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn predict(&self, x: &DVector<f64>) -> f64 {
        self.points.iter().zip(self.alpha.iter()).map(|(p, a)| a * self.kernel.eval(p, x)).sum()
    }

    /// `Of(x) = sum_g w(g) f(gx) = sum_i alpha_i kbar(x_i, x)`.
    pub fn predict_averaged(&self, rep: &Representation, x: &DVector<f64>) -> f64 {
        let group = rep.group();
        group.elements().map(|g| group.weight(g) * self.predict(&rep.act(g, x))).sum()
    }

    /// `|(K + rho I) alpha - y| / max(|y|, 1)`.
    pub fn residual_defect(&self) -> f64 {
        let k = gram(&self.kernel, &self.points);
        let lhs = k * &self.alpha + &self.alpha * self.rho;
        (lhs - &self.targets).norm() / self.targets.norm().max(1.0)
    }
}

/// A scalar target function.
pub type Target = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

pub fn linear_target(theta: DVector<f64>) -> Target {
    Arc::new(move |x: &DVector<f64>| theta.dot(x))
}

#[derive(Clone)]
pub struct KrrGapConfig {
    pub kernel: KernelSpec,
    pub target: Target,
    pub dist: InputDistribution,
    pub n: usize,
    pub sigma: f64,
    pub rho: f64,
    pub trials: usize,
    pub seed: u64,
    /// Fresh points per trial for the `L2(mu)` integrals.
    pub eval_points: usize,
    /// Pairs for the `N[kperp]` estimate.
    pub n_pairs: usize,
}

impl std::fmt::Debug for KrrGapConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KrrGapConfig")
            .field("kernel", &self.kernel)
            .field("dist", &self.dist)
            .field("n", &self.n)
            .field("sigma", &self.sigma)
            .field("rho", &self.rho)
            .field("trials", &self.trials)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl KrrGapConfig {
    pub fn new(kernel: KernelSpec, target: Target, dist: InputDistribution, n: usize, sigma: f64, rho: f64, trials: usize, seed: u64) -> Self {
        Self { kernel, target, dist, n, sigma, rho, trials, seed, eval_points: 64, n_pairs: 10_000 }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.kernel.dim();
        if self.dist.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.dist.dim() });
        }
        if self.n == 0 || self.trials < 2 || self.eval_points == 0 {
            return Err(Error::InvalidArgument("need n >= 1, trials >= 2 and eval_points >= 1".into()));
        }
        if !(self.rho > 0.0) || !(self.sigma >= 0.0) {
            return Err(Error::InvalidArgument("need rho > 0 and sigma >= 0".into()));
        }
        let rep = self.kernel.action();
        let mut rng = stream_rng(self.seed, u64::MAX);
        for _ in 0..100 {
            let x = self.dist.sample(&mut rng);
            let fx = (self.target)(&x);
            for g in rep.group().elements() {
                let dev = ((self.target)(&rep.act(g, &x)) - fx).abs();
                if dev > 1e-9 * fx.abs().max(1.0) {
                    return Err(Error::InvalidArgument(format!("target is not invariant: deviation {dev:e}")));
                }
            }
        }
        Ok(())
    }
}

/// Per-trial `E_x[(f - Of)(x)^2]` for the noisy fit and the noiseless fit on
/// the same design.
fn krr_trial(cfg: &KrrGapConfig, rng: &mut SimRng) -> Result<(f64, f64)> {
    let rep = cfg.kernel.action();
    let group = rep.group();
    let xs = cfg.dist.sample_many(rng, cfg.n);
    let clean = DVector::from_iterator(cfg.n, xs.iter().map(|x| (cfg.target)(x)));
    let noise = crate::stats::gaussian_vector(rng, cfg.n) * cfg.sigma;
    let k = gram(&cfg.kernel, &xs);
    let alpha_noisy = solve_ridge(&k, &(&clean + noise), cfg.rho)?;
    let alpha_clean = solve_ridge(&k, &clean, cfg.rho)?;
    let mut gap = 0.0;
    let mut bias = 0.0;
    for _ in 0..cfg.eval_points {
        let x = cfg.dist.sample(rng);
        let direct = DVector::from_iterator(cfg.n, xs.iter().map(|p| cfg.kernel.eval(p, &x)));
        let mut averaged = DVector::zeros(cfg.n);
        for g in group.elements() {
            let gx = rep.act(g, &x);
            for (i, p) in xs.iter().enumerate() {
                averaged[i] += group.weight(g) * cfg.kernel.eval(p, &gx);
            }
        }
        let perp = direct - averaged;
        gap += perp.dot(&alpha_noisy).powi(2);
        bias += perp.dot(&alpha_clean).powi(2);
    }
    let m = cfg.eval_points as f64;
    Ok((gap / m, bias / m))
}

#[derive(Debug, Clone, Serialize)]
pub struct KrrGapReport {
    pub d: usize,
    pub n: usize,
    pub group: String,
    pub sigma: f64,
    pub rho: f64,
    pub trials: usize,
    pub seed: u64,
    pub mk: f64,
    pub switch: SwitchStatus,
    pub n_kperp: Estimate,
    /// `E[R[f] - R[Of]]`.
    pub gap: Estimate,
    /// Bias term, from the noiseless fit on the same designs.
    pub bias: Estimate,
    /// `gap - bias`, paired per trial.
    pub excess: Estimate,
    pub bound_bias: f64,
    pub bound_variance: f64,
    pub lower_bound: f64,
    pub verdict: Verdict,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// `sigma^2 N[kperp] / (sqrt(n) M_k + rho / sqrt(n))^2`, zero for unbounded kernels.
pub fn variance_bound(sigma: f64, n_kperp: f64, mk: f64, n: usize, rho: f64) -> f64 {
    if !mk.is_finite() {
        return 0.0;
    }
    let sn = (n as f64).sqrt();
    sigma * sigma * n_kperp / (sn * mk + rho / sn).powi(2)
}

/// Fits KRR on `trials` independent samples and compares the averaging gap
/// with the lower bound `bias + sigma^2 N[kperp] / (sqrt(n) M_k + rho/sqrt(n))^2`.
///
/// Passes iff `mean(gap - bias) + 4 SE >= variance bound`, with gap and bias
/// paired on the same design and evaluation points.
pub fn krr_gap_experiment(cfg: &KrrGapConfig) -> Result<KrrGapReport> {
    cfg.validate()?;
    let start = Instant::now();
    let avg = build_averaged_kernel(&cfg.kernel);
    let n_kperp = estimate_n(&|x: &DVector<f64>, y: &DVector<f64>| avg.kperp(x, y), &cfg.dist, cfg.n_pairs, cfg.seed ^ 0xa5a5)?;
    let mk = cfg.kernel.mk(&cfg.dist);
    let rows = run_trials(cfg.trials, cfg.seed, |_, rng| krr_trial(cfg, rng));
    let mut gap = RunningStats::default();
    let mut bias = RunningStats::default();
    let mut excess = RunningStats::default();
    for row in rows {
        let (g, b) = row?;
        gap.push(g);
        bias.push(b);
        excess.push(g - b);
    }
    let bound_variance = variance_bound(cfg.sigma, n_kperp.mean, mk, cfg.n, cfg.rho);
    let excess = excess.estimate();
    let pass = excess.mean + 4.0 * excess.se + ROUNDING_FLOOR >= bound_variance;
    let bias = bias.estimate();
    Ok(KrrGapReport {
        d: cfg.kernel.dim(),
        n: cfg.n,
        group: cfg.kernel.action().group().descriptor().to_string(),
        sigma: cfg.sigma,
        rho: cfg.rho,
        trials: cfg.trials,
        seed: cfg.seed,
        mk,
        switch: avg.switch().status,
        n_kperp,
        gap: gap.estimate(),
        bias,
        excess,
        bound_bias: bias.mean,
        bound_variance,
        lower_bound: bias.mean + bound_variance,
        verdict: Verdict::from_bool(pass),
        wall_time: start.elapsed(),
    })
}

/// Monte-Carlo `E[|(id - O) f_hat|_mu^2]` for the noiseless fit `f_hat`.
pub fn estimate_bias_term(cfg: &KrrGapConfig) -> Result<Estimate> {
    let mut noiseless = cfg.clone();
    noiseless.sigma = 0.0;
    noiseless.validate()?;
    let rows = run_trials(noiseless.trials, noiseless.seed, |_, rng| krr_trial(&noiseless, rng));
    let mut acc = RunningStats::default();
    for row in rows {
        acc.push(row?.1);
    }
    Ok(acc.estimate())
}

/// Bias estimates for a sequence of sample sizes with `rho = rho_of(n)`.
pub fn bias_trend(base: &KrrGapConfig, ns: &[usize], rho_of: impl Fn(usize) -> f64) -> Result<Vec<Estimate>> {
    ns.iter()
        .map(|&n| {
            let mut cfg = base.clone();
            cfg.n = n;
            cfg.rho = rho_of(n);
            estimate_bias_term(&cfg)
        })
        .collect()
}

/// Successive estimates never increase by more than `k` combined standard errors.
pub fn is_non_increasing(estimates: &[Estimate], k: f64) -> bool {
    estimates.windows(2).all(|w| w[1].mean - w[0].mean <= k * (w[0].se.powi(2) + w[1].se.powi(2)).sqrt())
}

/// Closed-form bias and variance terms for the linear kernel with inputs
/// uniform on the sphere of radius `sqrt(d)` and `sigma = 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearKernelBound {
    pub zeta1: Estimate,
    pub zeta2: Estimate,
    /// `d zeta1 - zeta2`, paired per sample.
    pub shape: Estimate,
    pub bias_bound: f64,
    pub variance_bound: f64,
}

pub fn linear_kernel_bound(
    d: usize,
    n: usize,
    rho: f64,
    theta_norm: f64,
    phi: &ProjectionMatrix,
    trials: usize,
    seed: u64,
) -> Result<LinearKernelBound> {
    if d < 2 {
        return Err(Error::InvalidArgument("linear kernel bound needs d > 1".into()));
    }
    if phi.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: phi.dim() });
    }
    if n == 0 || trials < 2 || !(rho >= 0.0) {
        return Err(Error::InvalidArgument("need n >= 1, trials >= 2 and rho >= 0".into()));
    }
    let dist = InputDistribution::sphere_sqrt_d(d);
    let df = d as f64;
    let rows = run_trials(trials, seed, |_, rng| {
        let xs = dist.sample_many(rng, n);
        let x = DMatrix::from_fn(n, d, |i, j| xs[i][j]);
        // Non-zero Gram eigenvalues are those of the smaller of X X^T and X^T X.
        let small = if n <= d { &x * x.transpose() } else { x.transpose() * &x };
        let ratios: Vec<f64> = symmetric_eigenvalues(&small)
            .iter()
            .map(|&g| g.max(0.0))
            .map(|g| if g + rho > 0.0 { g / (g + rho) } else { 0.0 })
            .collect();
        let z1: f64 = ratios.iter().map(|s| s * s).sum();
        let s: f64 = ratios.iter().sum();
        (z1, s * s)
    });
    let mut z1 = RunningStats::default();
    let mut z2 = RunningStats::default();
    let mut shape = RunningStats::default();
    for (a, b) in rows {
        z1.push(a);
        z2.push(b);
        shape.push(df * a - b);
    }
    let codim = df - phi.frobenius_sq();
    let shape = shape.estimate();
    Ok(LinearKernelBound {
        zeta1: z1.estimate(),
        zeta2: z2.estimate(),
        shape,
        bias_bound: theta_norm * theta_norm * shape.mean * codim / (df * (df + 2.0) * (df - 1.0)),
        variance_bound: codim / (df * (n as f64).sqrt() + rho / (n as f64).sqrt()).powi(2),
    })
}

/// [`linear_kernel_bound`] for a representation.
pub fn linear_kernel_bound_for(rep: &Representation, n: usize, rho: f64, theta_norm: f64, trials: usize, seed: u64) -> Result<LinearKernelBound> {
    linear_kernel_bound(rep.dim(), n, rho, theta_norm, &build_phi(rep), trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, GroupDescriptor, RepDescriptor};
    use approx::assert_abs_diff_eq;

    fn perm(desc: GroupDescriptor) -> Representation {
        let g = build_group(&desc).unwrap();
        Representation::build(&g, &RepDescriptor::NaturalPermutation).unwrap()
    }

    fn swap2() -> Representation {
        perm(GroupDescriptor::Symmetric(2))
    }

    fn example_kernel() -> KernelSpec {
        KernelSpec::new(BaseKernel::Bilinear { matrix: vec![vec![1.0, 0.0], vec![0.0, 0.0]] }, swap2()).unwrap()
    }

    #[test]
    fn switch_condition_examples() {
        let lin = KernelSpec::new(BaseKernel::Linear, perm(GroupDescriptor::Symmetric(4))).unwrap();
        assert_eq!(check_switch_condition(&lin, 100, 1).unwrap().status, SwitchStatus::Verified);
        let g = build_group(&GroupDescriptor::So2Quadrature(32)).unwrap();
        let rot = Representation::build(&g, &RepDescriptor::RotationBlock(vec![1])).unwrap();
        let gauss = KernelSpec::new(BaseKernel::Gaussian { bandwidth: 1.3 }, rot).unwrap();
        assert_eq!(check_switch_condition(&gauss, 100, 2).unwrap().status, SwitchStatus::Verified);
        let gauss = KernelSpec::new(BaseKernel::Gaussian { bandwidth: 0.7 }, perm(GroupDescriptor::Cyclic(5))).unwrap();
        assert_eq!(check_switch_condition(&gauss, 100, 3).unwrap().status, SwitchStatus::Verified);
        assert_eq!(check_switch_condition(&example_kernel(), 100, 4).unwrap().status, SwitchStatus::Refuted);
        assert!(check_switch_condition(&example_kernel(), 0, 4).is_err());
    }

    #[test]
    fn averaged_kernel_examples() {
        let g = build_group(&GroupDescriptor::Cyclic(1)).unwrap();
        let triv = KernelSpec::new(BaseKernel::Gaussian { bandwidth: 1.0 }, Representation::trivial(&g, 3)).unwrap();
        let avg = build_averaged_kernel(&triv);
        let x = DVector::from_vec(vec![0.1, 0.2, -0.3]);
        let y = DVector::from_vec(vec![1.0, -0.5, 0.0]);
        assert_eq!(avg.kbar(&x, &y), avg.k(&x, &y));
        assert_eq!(avg.kperp(&x, &y), 0.0);

        let rep = perm(GroupDescriptor::Symmetric(3));
        let phi = build_phi(&rep);
        let avg = build_averaged_kernel(&KernelSpec::new(BaseKernel::Linear, rep.clone()).unwrap());
        assert_abs_diff_eq!(avg.kbar(&x, &y), x.dot(&(phi.matrix() * &y)), epsilon = 1e-14);
        assert!(avg.spot_check(1));

        // Any kernel is unchanged by averaging over the trivial group.
        let inv = build_averaged_kernel(
            &KernelSpec::new(BaseKernel::InnerProduct { profile: Profile::Polynomial { degree: 2, offset: 1.0 } }, Representation::trivial(&g, 3))
                .unwrap(),
        );
        assert_eq!(inv.kbar(&x, &y), inv.k(&x, &y));
    }

    #[test]
    fn kbar_is_invariant_in_second_argument() {
        let rep = perm(GroupDescriptor::Dihedral(4));
        let avg = build_averaged_kernel(&KernelSpec::new(BaseKernel::Gaussian { bandwidth: 2.0 }, rep.clone()).unwrap());
        let mut rng = stream_rng(3, 0);
        let dist = InputDistribution::standard_normal(4);
        for _ in 0..20 {
            let (x, y) = (dist.sample(&mut rng), dist.sample(&mut rng));
            let base = avg.kbar(&x, &y);
            for g in rep.group().elements() {
                assert_abs_diff_eq!(avg.kbar(&x, &rep.act(g, &y)), base, epsilon = 1e-10);
            }
            assert_abs_diff_eq!(avg.kbar(&x, &y) + avg.kperp(&x, &y), avg.k(&x, &y), epsilon = 1e-10);
        }
    }

    #[test]
    fn n_estimates_for_linear_kernel() {
        let rep = perm(GroupDescriptor::Symmetric(4));
        let avg = build_averaged_kernel(&KernelSpec::new(BaseKernel::Linear, rep).unwrap());
        let dist = InputDistribution::standard_normal(4);
        let dec = n_decomposition(&avg, &dist, 40_000, 9).unwrap();
        assert!(dec.n_k.agrees(4.0, 4.0), "{:?}", dec.n_k);
        assert!(dec.n_kbar.agrees(1.0, 4.0), "{:?}", dec.n_kbar);
        assert!(dec.n_kperp.agrees(3.0, 4.0), "{:?}", dec.n_kperp);
        assert!(dec.holds(4.0));
        let zero = |_: &DVector<f64>, _: &DVector<f64>| 0.0;
        assert_eq!(estimate_n(&zero, &dist, 1000, 1).unwrap().mean, 0.0);
        assert!(estimate_n(&zero, &dist, 999, 1).is_err());
    }

    #[test]
    fn krr_scalar_solve_and_ridge_dominance() {
        let lin = KernelSpec::new(BaseKernel::Linear, perm(GroupDescriptor::Cyclic(1))).unwrap();
        let x = vec![DVector::from_vec(vec![2.0])];
        let m = fit_krr(&lin, &x, &DVector::from_vec(vec![3.0]), 0.5).unwrap();
        assert_abs_diff_eq!(m.alpha()[0], 3.0 / 4.5, epsilon = 1e-14);

        let lin3 = KernelSpec::new(BaseKernel::Gaussian { bandwidth: 1.0 }, perm(GroupDescriptor::Cyclic(3))).unwrap();
        let mut rng = stream_rng(2, 0);
        let xs = InputDistribution::standard_normal(3).sample_many(&mut rng, 10);
        let y = crate::stats::gaussian_vector(&mut rng, 10);
        let small = fit_krr(&lin3, &xs, &y, 1e6).unwrap();
        assert!(small.alpha().norm() <= y.norm() / 1e6 * 1.01);
        assert!(small.predict(&xs[0]).abs() < 1e-5);
        assert!(small.residual_defect() < 1e-8);
        assert!(fit_krr(&lin3, &xs, &y, 0.0).is_err());
    }

    #[test]
    fn krr_interpolates_noiseless_representer_target() {
        let spec = KernelSpec::new(BaseKernel::Gaussian { bandwidth: 1.0 }, perm(GroupDescriptor::Cyclic(2))).unwrap();
        let mut rng = stream_rng(7, 0);
        let dist = InputDistribution::standard_normal(2);
        let centres = dist.sample_many(&mut rng, 5);
        let coef = crate::stats::gaussian_vector(&mut rng, 5);
        let fstar = |x: &DVector<f64>| centres.iter().zip(coef.iter()).map(|(c, a)| a * spec.eval(c, x)).sum::<f64>();
        let xs = dist.sample_many(&mut rng, 30);
        let y = DVector::from_iterator(30, xs.iter().map(fstar));
        let model = fit_krr(&spec, &xs, &y, 1e-8).unwrap();
        let mse = xs.iter().zip(y.iter()).map(|(x, t)| (model.predict(x) - t).powi(2)).sum::<f64>() / 30.0;
        assert!(mse <= 1e-6, "{mse}");
    }

    fn cyclic_linear_config(d: usize, n: usize, rho: f64, sigma: f64, trials: usize) -> KrrGapConfig {
        let rep = perm(GroupDescriptor::Cyclic(d));
        let theta = DVector::from_element(d, 1.0 / (d as f64).sqrt());
        let kernel = KernelSpec::new(BaseKernel::Linear, rep).unwrap();
        KrrGapConfig::new(kernel, linear_target(theta), InputDistribution::sphere_sqrt_d(d), n, sigma, rho, trials, 13)
    }

    #[test]
    fn trivial_group_gap_is_zero() {
        let g = build_group(&GroupDescriptor::Cyclic(1)).unwrap();
        let kernel = KernelSpec::new(BaseKernel::Linear, Representation::trivial(&g, 3)).unwrap();
        let cfg = KrrGapConfig::new(kernel, linear_target(DVector::from_element(3, 1.0)), InputDistribution::sphere_sqrt_d(3), 10, 1.0, 0.5, 20, 1);
        let report = krr_gap_experiment(&cfg).unwrap();
        assert_eq!(report.gap.mean, 0.0);
        assert_eq!(report.lower_bound, 0.0);
        assert!(report.verdict.passed());
    }

    #[test]
    fn gap_experiment_rejects_non_invariant_target() {
        let mut cfg = cyclic_linear_config(3, 10, 1.0, 1.0, 10);
        cfg.target = linear_target(DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert!(krr_gap_experiment(&cfg).is_err());
    }

    #[test]
    fn linear_kernel_bias_matches_closed_form() {
        let cfg = cyclic_linear_config(4, 6, 0.5, 0.0, 4000);
        let est = estimate_bias_term(&cfg).unwrap();
        let bound = linear_kernel_bound_for(cfg.kernel.action(), 6, 0.5, 1.0, 20_000, 5).unwrap();
        let se = (est.se.powi(2) + (bound.bias_bound / bound.shape.mean * bound.shape.se).powi(2)).sqrt();
        assert!((est.mean - bound.bias_bound).abs() <= 4.0 * se, "{est:?} vs {bound:?}");
    }

    #[test]
    fn ridgeless_limits() {
        let rep = perm(GroupDescriptor::Cyclic(5));
        let over = linear_kernel_bound_for(&rep, 12, 1e-10, 1.0, 200, 1).unwrap();
        assert!(over.shape.mean.abs() < 1e-6);
        assert!(over.bias_bound.abs() < 1e-6);
        let under = linear_kernel_bound_for(&rep, 3, 1e-10, 1.0, 200, 1).unwrap();
        assert_abs_diff_eq!(under.shape.mean, 5.0 * 3.0 - 9.0, epsilon = 1e-6);
        for rho in [0.01, 1.0, 100.0] {
            for n in [2, 5, 9] {
                let b = linear_kernel_bound_for(&rep, n, rho, 1.0, 50, 2).unwrap();
                assert!(b.zeta2.mean <= n.min(5) as f64 * b.zeta1.mean + 1e-12);
            }
        }
    }

    #[test]
    fn refuted_kernel_has_positive_bias() {
        let kernel = example_kernel();
        let target = Arc::new(|x: &DVector<f64>| x[0] + x[1]) as Target;
        let cfg = KrrGapConfig::new(kernel, target, InputDistribution::standard_normal(2), 20, 0.0, 0.1, 200, 3);
        let est = estimate_bias_term(&cfg).unwrap();
        assert!(est.mean > 4.0 * est.se && est.mean > 0.0, "{est:?}");
    }

    #[test]
    fn invariant_kernel_has_no_bias() {
        // |x|^2 |y|^2 is invariant in each argument, so every representer is.
        let inv = |x: &DVector<f64>, y: &DVector<f64>| x.norm_squared() * y.norm_squared();
        let rep = first_coordinate_reflection_rep();
        let mut rng = stream_rng(4, 0);
        let dist = InputDistribution::standard_normal(2);
        let xs = dist.sample_many(&mut rng, 15);
        let y = DVector::from_iterator(15, xs.iter().map(|x| x.norm()));
        let model = fit_krr(&inv, &xs, &y, 0.3).unwrap();
        for _ in 0..20 {
            let x = dist.sample(&mut rng);
            assert_abs_diff_eq!(model.predict(&x), model.predict_averaged(&rep, &x), epsilon = 1e-12);
        }
    }

    fn first_coordinate_reflection_rep() -> Representation {
        crate::group::first_coordinate_reflection(2).unwrap()
    }

    #[test]
    fn kernel_validation() {
        let bad = KernelSpec::new(BaseKernel::Bilinear { matrix: vec![vec![1.0, 2.0], vec![0.0, 1.0]] }, swap2()).unwrap();
        assert!(bad.validate(1).is_err());
        let indefinite = KernelSpec::new(BaseKernel::Bilinear { matrix: vec![vec![1.0, 0.0], vec![0.0, -1.0]] }, swap2()).unwrap();
        assert!(indefinite.validate(1).is_err());
        assert!(example_kernel().validate(1).is_ok());
        assert!(KernelSpec::new(BaseKernel::Gaussian { bandwidth: 0.0 }, swap2()).is_err());
        let lin = KernelSpec::new(BaseKernel::Linear, swap2()).unwrap();
        assert_abs_diff_eq!(lin.mk(&InputDistribution::sphere_sqrt_d(2)), 2.0, epsilon = 1e-12);
        assert_eq!(lin.mk(&InputDistribution::standard_normal(2)), f64::INFINITY);
    }
}
