//! Orbit representatives, averaged losses, covering numbers and
//! equivalence of learning on a domain and on its cross-section.

use std::io::BufRead;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::averaging::build_phi;
use crate::error::{Error, Result};
use crate::group::{build_group, first_coordinate_reflection, GroupDescriptor, RepDescriptor, Representation};
use crate::kernel::{fit_krr, AveragedKernel, Target};
use crate::linalg::pinv;
use crate::stats::{stream_rng, Estimate, InputDistribution, RunningStats, Verdict};

/// Named actions with a known measurable cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CrossSectionKind {
    /// `S_d` permuting coordinates; representative has `x_1 >= ... >= x_d`.
    SortDescending,
    /// `C_2` flipping the first coordinate; representative has `x_1 >= 0`.
    AbsFirstCoordinate,
    /// Rotations of the plane. With `sectors = Some(m)` the group is `C_m`
    /// and the representative lies in the wedge `[0, 2 pi / m)`; with `None`
    /// the full circle acts and the representative is `(r, 0)`.
    PolarFold { sectors: Option<usize> },
    /// `C_4` quarter turns of the plane; representative has `x > 0, y >= 0`.
    QuadrantFold,
}

/// Quadrature order standing in for the full circle in group-based checks.
const CIRCLE_NODES: usize = 64;

#[derive(Debug, Clone)]
pub struct CrossSection {
    kind: CrossSectionKind,
    action: Representation,
}

impl CrossSection {
    pub fn new(kind: CrossSectionKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("cross-section dimension must be positive".into()));
        }
        let planar = |name: &str| {
            if dim == 2 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} acts on R^2, got dimension {dim}")))
            }
        };
        let action = match kind {
            CrossSectionKind::SortDescending => {
                let g = build_group(&GroupDescriptor::Symmetric(dim))?;
                Representation::build(&g, &RepDescriptor::NaturalPermutation)?
            }
            CrossSectionKind::AbsFirstCoordinate => first_coordinate_reflection(dim)?,
            CrossSectionKind::PolarFold { sectors } => {
                planar("polar_fold")?;
                let m = sectors.unwrap_or(CIRCLE_NODES);
                if m == 0 {
                    return Err(Error::InvalidArgument("polar_fold needs at least one sector".into()));
                }
                let g = build_group(&GroupDescriptor::So2Quadrature(m))?;
                Representation::build(&g, &RepDescriptor::RotationBlock(vec![1]))?
            }
            CrossSectionKind::QuadrantFold => {
                planar("quadrant_fold")?;
                let g = build_group(&GroupDescriptor::Cyclic(4))?;
                let quarter = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
                let mut mats = vec![DMatrix::identity(2, 2)];
                for k in 1..4 {
                    mats.push(&quarter * &mats[k - 1]);
                }
                Representation::from_matrices(&g, mats)?
            }
        };
        Ok(Self { kind, action })
    }

    pub fn kind(&self) -> CrossSectionKind {
        self.kind
    }

    /// The group action whose orbits are folded.
    pub fn action(&self) -> &Representation {
        &self.action
    }

    pub fn dim(&self) -> usize {
        self.action.dim()
    }

    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(match self.kind {
            CrossSectionKind::SortDescending => {
                let mut v: Vec<f64> = x.iter().copied().collect();
                v.sort_by(|a, b| b.total_cmp(a));
                DVector::from_vec(v)
            }
            CrossSectionKind::AbsFirstCoordinate => {
                let mut v = x.clone();
                v[0] = v[0].abs();
                v
            }
            CrossSectionKind::PolarFold { sectors: None } => DVector::from_vec(vec![x.norm(), 0.0]),
            CrossSectionKind::PolarFold { sectors: Some(m) } => {
                let angle = x[1].atan2(x[0]).rem_euclid(std::f64::consts::TAU);
                let k = ((angle / std::f64::consts::TAU * m as f64).floor() as usize).min(m - 1);
                let group = self.action.group();
                self.action.act(group.inverse(k), x)
            }
            CrossSectionKind::QuadrantFold => {
                let (mut a, mut b) = (x[0], x[1]);
                if a != 0.0 || b != 0.0 {
                    // rotate by -90 degrees until in {a > 0, b >= 0}
                    while !(a > 0.0 && b >= 0.0) {
                        (a, b) = (b, -a);
                    }
                }
                DVector::from_vec(vec![a, b])
            }
        })
    }

    /// A group element `g` with `g . project(x) = x`, if one exists within `tol`.
    pub fn witness(&self, x: &DVector<f64>, tol: f64) -> Result<Option<usize>> {
        let p = self.project(x)?;
        if let CrossSectionKind::PolarFold { sectors: None } = self.kind {
            // Continuous circle: the rotation by the angle of x.
            let angle = x[1].atan2(x[0]);
            let (c, s) = (angle.cos(), angle.sin());
            let rotated = DVector::from_vec(vec![c * p[0] - s * p[1], s * p[0] + c * p[1]]);
            return Ok(((rotated - x).amax() <= tol).then_some(0));
        }
        Ok(self.action.group().elements().find(|&g| (self.action.act(g, &p) - x).amax() <= tol))
    }

    /// Idempotence, orbit consistency and membership on `points` random
    /// standard Gaussian inputs.
    pub fn check(&self, points: usize, seed: u64) -> Result<CrossSectionCheck> {
        let dist = InputDistribution::standard_normal(self.dim());
        let mut rng = stream_rng(seed, 0);
        let group = self.action.group();
        let mut out = CrossSectionCheck::default();
        for _ in 0..points {
            let x = dist.sample(&mut rng);
            let p = self.project(&x)?;
            out.idempotence = out.idempotence.max((self.project(&p)? - &p).amax());
            let g = group.sample(&mut rng);
            out.orbit_consistency = out.orbit_consistency.max((self.project(&self.action.act(g, &x))? - &p).amax());
            if self.witness(&x, 1e-8)?.is_none() {
                out.membership_failures += 1;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CrossSectionCheck {
    /// `max |pi(pi(x)) - pi(x)|`.
    pub idempotence: f64,
    /// `max |pi(g x) - pi(x)|`.
    pub orbit_consistency: f64,
    pub membership_failures: usize,
}

impl CrossSectionCheck {
    pub fn passed(&self) -> bool {
        self.idempotence <= 1e-12 && self.orbit_consistency <= 1e-10 && self.membership_failures == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    Sup,
}

impl Metric {
    pub fn distance(self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        match self {
            Metric::Euclidean => (a - b).norm(),
            Metric::Sup => (a - b).amax(),
        }
    }
}

/// A finite, non-empty set of points of one dimension.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<DVector<f64>>,
    metric: Metric,
}

impl PointCloud {
    pub fn new(points: Vec<DVector<f64>>, metric: Metric) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::InvalidArgument("point cloud is empty".into()))?;
        let dim = first.len();
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("point cloud has non-finite coordinates".into()));
            }
        }
        Ok(Self { points, metric })
    }

    /// Scalars as points on the line.
    pub fn from_scalars(values: &[f64], metric: Metric) -> Result<Self> {
        Self::new(values.iter().map(|&v| DVector::from_element(1, v)).collect(), metric)
    }

    /// One point per line, coordinates separated by whitespace or commas.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn read<R: BufRead>(reader: R, metric: Metric) -> Result<Self> {
        let mut points = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let coords = trimmed
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse { line: idx + 1, reason: format!("{t:?}: {e}") }))
                .collect::<Result<Vec<_>>>()?;
            if let Some(prev) = points.last().map(|p: &DVector<f64>| p.len()) {
                if prev != coords.len() {
                    return Err(Error::Parse { line: idx + 1, reason: format!("expected {prev} columns, got {}", coords.len()) });
                }
            }
            points.push(DVector::from_vec(coords));
        }
        Self::new(points, metric)
    }

    pub fn from_path(path: &Path, metric: Metric) -> Result<Self> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?), metric)
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric.distance(&self.points[i], &self.points[j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMode {
    /// Size of a cover by closed balls centred at cloud points; at least the
    /// covering number.
    GreedyUpper,
    /// Size of a maximal packing (centres pairwise more than `eps` apart).
    PackingLower,
}

/// Farthest-point traversal from the first point. The result is a maximal
/// `eps`-packing, hence also an `eps`-cover.
fn farthest_point_centres(cloud: &PointCloud, eps: f64) -> Vec<usize> {
    let n = cloud.len();
    let mut nearest: Vec<f64> = (0..n).map(|j| cloud.dist(0, j)).collect();
    let mut centres = vec![0];
    loop {
        let (far, &d) = nearest.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
        if d <= eps {
            return centres;
        }
        centres.push(far);
        for (j, v) in nearest.iter_mut().enumerate() {
            *v = v.min(cloud.dist(far, j));
        }
    }
}

/// Greedy maximum-coverage set cover with closed balls at cloud points.
fn greedy_set_cover(cloud: &PointCloud, eps: f64) -> usize {
    let n = cloud.len();
    let neighbours: Vec<Vec<u32>> =
        (0..n).map(|i| (0..n).filter(|&j| cloud.dist(i, j) <= eps).map(|j| j as u32).collect()).collect();
    let mut gain: Vec<usize> = neighbours.iter().map(Vec::len).collect();
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut size = 0;
    while remaining > 0 {
        // first index wins ties
        let best = (0..n).fold(0, |b, i| if gain[i] > gain[b] { i } else { b });
        size += 1;
        for &j in &neighbours[best] {
            let j = j as usize;
            if !covered[j] {
                covered[j] = true;
                remaining -= 1;
                for &k in &neighbours[j] {
                    gain[k as usize] -= 1;
                }
            }
        }
    }
    size
}

/// Covering or packing size of `cloud` at scale `eps`. Every call checks
/// `packing(2 eps) <= cover(eps) <= packing(eps)`.
pub fn covering_number(cloud: &PointCloud, eps: f64, mode: CoverMode) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let packing = farthest_point_centres(cloud, eps).len();
    let cover = greedy_set_cover(cloud, eps).min(packing);
    let packing_wide = farthest_point_centres(cloud, 2.0 * eps).len();
    assert!(packing_wide <= cover && cover <= packing, "covering sandwich violated: {packing_wide} <= {cover} <= {packing}");
    Ok(match mode {
        CoverMode::GreedyUpper => cover,
        CoverMode::PackingLower => packing,
    })
}

/// `cover(X, t / (12 L C)) * max_x ln cover(F(x), |.|_inf, t / (12 L^2 C))`.
pub fn sample_complexity_d(domain: &PointCloud, outputs: &[PointCloud], lipschitz: f64, loss_lipschitz: f64, t: f64) -> Result<f64> {
    if !(lipschitz > 0.0 && loss_lipschitz > 0.0 && t > 0.0) {
        return Err(Error::InvalidArgument("L, C_ell and t must be positive".into()));
    }
    if outputs.is_empty() {
        return Err(Error::InvalidArgument("need at least one output set".into()));
    }
    let input_cover = covering_number(domain, t / (12.0 * lipschitz * loss_lipschitz), CoverMode::GreedyUpper)?;
    let out_eps = t / (12.0 * lipschitz * lipschitz * loss_lipschitz);
    let mut worst: f64 = 0.0;
    for cloud in outputs {
        let sup = cloud.clone().with_metric(Metric::Sup);
        worst = worst.max((covering_number(&sup, out_eps, CoverMode::GreedyUpper)? as f64).ln());
    }
    Ok(input_cover as f64 * worst)
}

/// Distribution over group elements for [`averaged_loss`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupDistribution {
    Haar,
    Explicit(Vec<f64>),
}

/// `lbar(y, y') = sum_g nu(g) loss(psi(g) y, psi(g) y')`.
pub struct AveragedLoss<L> {
    loss: L,
    rep: Representation,
    weights: Vec<f64>,
}

pub fn averaged_loss<L>(loss: L, rep: &Representation, nu: &GroupDistribution) -> Result<AveragedLoss<L>>
where
    L: Fn(&DVector<f64>, &DVector<f64>) -> f64,
{
    let group = rep.group();
    let weights = match nu {
        GroupDistribution::Haar => group.weights().to_vec(),
        GroupDistribution::Explicit(w) => {
            if w.len() != group.order() {
                return Err(Error::DimensionMismatch { expected: group.order(), got: w.len() });
            }
            if w.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::InvalidArgument("group weights must be non-negative".into()));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("group weights sum to {total}, not 1")));
            }
            w.clone()
        }
    };
    Ok(AveragedLoss { loss, rep: rep.clone(), weights })
}

impl<L> AveragedLoss<L>
where
    L: Fn(&DVector<f64>, &DVector<f64>) -> f64,
{
    pub fn eval(&self, y: &DVector<f64>, y2: &DVector<f64>) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(g, w)| w * (self.loss)(&self.rep.act(g, y), &self.rep.act(g, y2)))
            .sum()
    }
}

/// `x -> sum_g w(g) h(g x)`, an invariant target built from any function.
pub fn invariant_target(h: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static, rep: &Representation) -> Target {
    let rep = rep.clone();
    Arc::new(move |x: &DVector<f64>| {
        let group = rep.group();
        group.elements().map(|g| group.weight(g) * h(&rep.act(g, x))).sum()
    })
}

/// A fitted scalar predictor.
pub type Predictor = Box<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

pub trait Learner: Send + Sync {
    fn name(&self) -> &str;
    fn fit(&self, xs: &[DVector<f64>], ys: &[f64]) -> Result<Predictor>;
}

/// KRR with the averaged kernel `kbar`.
pub struct AveragedKernelKrr {
    pub kernel: AveragedKernel,
    pub rho: f64,
}

impl Learner for AveragedKernelKrr {
    fn name(&self) -> &str {
        "averaged_kernel_krr"
    }

    fn fit(&self, xs: &[DVector<f64>], ys: &[f64]) -> Result<Predictor> {
        let avg = self.kernel.clone();
        let kbar = move |x: &DVector<f64>, y: &DVector<f64>| avg.kbar(x, y);
        let model = fit_krr(&kbar, xs, &DVector::from_column_slice(ys), self.rho)?;
        Ok(Box::new(move |x| model.predict(x)))
    }
}

/// Minimum-norm least squares on the invariant features `(Phi x, |x|^2, 1)`.
pub struct InvariantFeatureLeastSquares {
    phi: DMatrix<f64>,
}

impl InvariantFeatureLeastSquares {
    pub fn new(rep: &Representation) -> Self {
        Self { phi: build_phi(rep).matrix().clone() }
    }

    fn features(phi: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
        let px = phi * x;
        let d = px.len();
        DVector::from_fn(d + 2, |i, _| if i < d { px[i] } else if i == d { x.norm_squared() } else { 1.0 })
    }

    /// Least-squares coefficients on the invariant features.
    pub fn coefficients(&self, xs: &[DVector<f64>], ys: &[f64]) -> Result<DVector<f64>> {
        let d = self.phi.nrows();
        if let Some(x) = xs.iter().find(|x| x.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
        }
        let rows: Vec<DVector<f64>> = xs.iter().map(|x| Self::features(&self.phi, x)).collect();
        let design = DMatrix::from_fn(xs.len(), d + 2, |i, j| rows[i][j]);
        Ok(pinv(&design) * DVector::from_column_slice(ys))
    }
}

impl Learner for InvariantFeatureLeastSquares {
    fn name(&self) -> &str {
        "invariant_feature_least_squares"
    }

    fn fit(&self, xs: &[DVector<f64>], ys: &[f64]) -> Result<Predictor> {
        let coef = self.coefficients(xs, ys)?;
        let phi = self.phi.clone();
        Ok(Box::new(move |x| Self::features(&phi, x).dot(&coef)))
    }
}

/// Minimum-norm least squares on `(x, 1)`; not invariant.
pub struct RawLeastSquares;

impl Learner for RawLeastSquares {
    fn name(&self) -> &str {
        "raw_least_squares"
    }

    fn fit(&self, xs: &[DVector<f64>], ys: &[f64]) -> Result<Predictor> {
        let d = xs.first().map_or(0, |x| x.len());
        let design = DMatrix::from_fn(xs.len(), d + 1, |i, j| if j < d { xs[i][j] } else { 1.0 });
        let coef = pinv(&design) * DVector::from_column_slice(ys);
        Ok(Box::new(move |x| {
            let mut s = coef[d];
            for j in 0..d {
                s += coef[j] * x[j];
            }
            s
        }))
    }
}

/// Retrains on a sample whose inputs are moved by random group elements and
/// compares predictions on fresh probes. Returns the largest deviation, or
/// [`Error::NonInvariantLearner`] when it exceeds `1e-8`.
pub fn detect_non_invariance(
    learner: &dyn Learner,
    rep: &Representation,
    xs: &[DVector<f64>],
    ys: &[f64],
    probes: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = stream_rng(seed, 0);
    let group = rep.group();
    let moved: Vec<DVector<f64>> = xs.iter().map(|x| rep.act(group.sample(&mut rng), x)).collect();
    let a = learner.fit(xs, ys)?;
    let b = learner.fit(&moved, ys)?;
    let dist = InputDistribution::standard_normal(rep.dim());
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let x = dist.sample(&mut rng);
        let (pa, pb) = (a(&x), b(&x));
        worst = worst.max((pa - pb).abs() / pa.abs().max(1.0));
    }
    if worst > 1e-8 {
        return Err(Error::NonInvariantLearner { deviation: worst });
    }
    Ok(worst)
}

pub struct EquivalenceConfig<'a> {
    pub learner: &'a dyn Learner,
    pub cross_section: &'a CrossSection,
    pub target: Target,
    pub dist: InputDistribution,
    pub noise: f64,
    /// Training sizes of the learning curve.
    pub sizes: Vec<usize>,
    pub test_points: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceRow {
    pub n: usize,
    pub risk: Estimate,
    pub risk_projected: Estimate,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub learner: String,
    pub cross_section: CrossSectionKind,
    pub rows: Vec<EquivalenceRow>,
    pub max_abs_diff: f64,
    pub verdict: Verdict,
}

/// Trains on `S` and on the projected sample `S_pi` and compares squared-error
/// risks, each measured on its own task. Invariant learners agree to 1e-9.
pub fn equivalence_demo(cfg: &EquivalenceConfig<'_>) -> Result<EquivalenceReport> {
    let cs = cfg.cross_section;
    if cfg.dist.dim() != cs.dim() {
        return Err(Error::DimensionMismatch { expected: cs.dim(), got: cfg.dist.dim() });
    }
    if cfg.sizes.is_empty() || cfg.trials == 0 || cfg.test_points == 0 {
        return Err(Error::InvalidArgument("need sizes, trials and test points".into()));
    }
    let mut rng = stream_rng(cfg.seed, u64::MAX);
    let probe_n = cfg.sizes[0].max(4);
    let xs = cfg.dist.sample_many(&mut rng, probe_n);
    let ys: Vec<f64> = xs.iter().map(|x| (cfg.target)(x)).collect();
    detect_non_invariance(cfg.learner, cs.action(), &xs, &ys, 32, cfg.seed)?;

    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for (si, &n) in cfg.sizes.iter().enumerate() {
        let mut raw = RunningStats::default();
        let mut proj = RunningStats::default();
        let mut diff: f64 = 0.0;
        for t in 0..cfg.trials {
            let mut rng = stream_rng(cfg.seed, (si * cfg.trials + t) as u64);
            let sample = |rng: &mut crate::stats::SimRng| {
                let x = cfg.dist.sample(rng);
                let y = (cfg.target)(&x) + cfg.noise * rand::Rng::sample::<f64, _>(rng, rand_distr::StandardNormal);
                (x, y)
            };
            let train: Vec<(DVector<f64>, f64)> = (0..n).map(|_| sample(&mut rng)).collect();
            let test: Vec<(DVector<f64>, f64)> = (0..cfg.test_points).map(|_| sample(&mut rng)).collect();
            let xs: Vec<DVector<f64>> = train.iter().map(|p| p.0.clone()).collect();
            let xs_pi = xs.iter().map(|x| cs.project(x)).collect::<Result<Vec<_>>>()?;
            let ys: Vec<f64> = train.iter().map(|p| p.1).collect();
            let f = cfg.learner.fit(&xs, &ys)?;
            let f_pi = cfg.learner.fit(&xs_pi, &ys)?;
            let mut r = 0.0;
            let mut r_pi = 0.0;
            for (x, y) in &test {
                r += (f(x) - y).powi(2);
                r_pi += (f_pi(&cs.project(x)?) - y).powi(2);
            }
            let m = cfg.test_points as f64;
            diff = diff.max(((r - r_pi) / m).abs());
            raw.push(r / m);
            proj.push(r_pi / m);
        }
        rows.push(EquivalenceRow { n, risk: raw.estimate(), risk_projected: proj.estimate(), max_abs_diff: diff });
    }
    let max_abs_diff = rows.iter().map(|r| r.max_abs_diff).fold(0.0, f64::max);
    Ok(EquivalenceReport {
        learner: cfg.learner.name().to_string(),
        cross_section: cs.kind(),
        rows,
        max_abs_diff,
        verdict: Verdict::from_bool(max_abs_diff <= 1e-9),
    })
}
