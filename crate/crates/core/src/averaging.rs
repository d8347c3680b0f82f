//! Haar averaging of linear maps and black-box predictors.
//!
//! For a representation `phi` on `R^d` the invariant projection is
//! `Phi = sum_g w(g) phi(g)`. For a pair `(phi, psi)` the intertwining
//! average acts on `d x k` matrices by `W -> sum_g w(g) phi(g) W psi(g^-1)`,
//! stored densely as the `dk x dk` matrix `sum_g w(g) phi(g) (x) psi(g)`
//! with row index `a * k + b` and column index `c * k + e`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::group::{character_inner, FiniteGroup, Representation};
use crate::stats::{gaussian_matrix, stream_rng, Estimate, InputDistribution, RunningStats};

/// Cap on the number of stored tensor entries `(d k)^2`.
pub const PSI_ENTRY_CAP: usize = 1_000_000;

/// `Phi = sum_g w(g) phi(g)`, the orthogonal projection onto invariant vectors.
#[derive(Debug, Clone)]
pub struct ProjectionMatrix {
    group: Arc<FiniteGroup>,
    matrix: DMatrix<f64>,
}

pub fn build_phi(rep: &Representation) -> ProjectionMatrix {
    let group = Arc::clone(rep.group());
    let mut matrix = DMatrix::zeros(rep.dim(), rep.dim());
    for (m, w) in rep.matrices().iter().zip(group.weights()) {
        matrix += m * *w;
    }
    ProjectionMatrix { group, matrix }
}

impl ProjectionMatrix {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `I - Phi`, the projection onto the anti-symmetric subspace.
    pub fn complement(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim()) - &self.matrix
    }

    /// Dimension of the invariant subspace, `trace(Phi)`.
    pub fn invariant_dim(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.matrix.norm_squared()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    /// `max |Phi^2 - Phi|`.
    pub fn idempotence_defect(&self) -> f64 {
        (&self.matrix * &self.matrix - &self.matrix).amax()
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// `max_g |Phi phi(g) - Phi|`.
    pub fn invariance_defect(&self, rep: &Representation) -> f64 {
        rep.matrices().iter().map(|m| (&self.matrix * m - &self.matrix).amax()).fold(0.0, f64::max)
    }
}

/// Dense 4-index averaging map on `d x k` matrices.
#[derive(Debug, Clone)]
pub struct IntertwinerTensor {
    d: usize,
    k: usize,
    op: DMatrix<f64>,
}

fn check_cap(d: usize, k: usize) -> Result<()> {
    let entries = (d * k).saturating_mul(d * k);
    if entries > PSI_ENTRY_CAP {
        return Err(Error::StorageCap { entries, cap: PSI_ENTRY_CAP });
    }
    Ok(())
}

/// `Psi_abce = sum_g w(g) phi(g)_ac psi(g)_be`, acting on `W in R^{d x k}` by
/// `Psi(W)_ab = Psi_abce W_ce`.
pub fn build_psi(rep_in: &Representation, rep_out: &Representation) -> Result<IntertwinerTensor> {
    if !rep_in.same_group(rep_out) {
        return Err(Error::GroupMismatch);
    }
    let (d, k) = (rep_in.dim(), rep_out.dim());
    check_cap(d, k)?;
    let weights = rep_in.group().weights();
    let mut op = DMatrix::zeros(d * k, d * k);
    for ((phi, psi), w) in rep_in.matrices().iter().zip(rep_out.matrices()).zip(weights) {
        op += phi.kronecker(psi) * *w;
    }
    Ok(IntertwinerTensor { d, k, op })
}

impl IntertwinerTensor {
    /// Layer-convention tensor for weights `W in R^{out x in}`:
    /// `Psi_abce = sum_g w(g) psi_out(g^-1)_ac psi_in(g)_eb`, so that fixed
    /// points satisfy `W psi_in(g) = psi_out(g) W`.
    ///
    /// Unlike [`build_psi`] this does not assume orthogonality.
    pub fn layer(psi_in: &Representation, psi_out: &Representation) -> Result<Self> {
        if !psi_in.same_group(psi_out) {
            return Err(Error::GroupMismatch);
        }
        let (d, k) = (psi_out.dim(), psi_in.dim());
        check_cap(d, k)?;
        let group = psi_in.group();
        let mut op = DMatrix::zeros(d * k, d * k);
        for g in group.elements() {
            let out_inv = psi_out.matrix(group.inverse(g));
            op += out_inv.kronecker(&psi_in.matrix(g).transpose()) * group.weight(g);
        }
        Ok(IntertwinerTensor { d, k, op })
    }

    /// `(rows, cols)` of the matrices this tensor acts on.
    pub fn shape(&self) -> (usize, usize) {
        (self.d, self.k)
    }

    /// Component `Psi_abce`.
    pub fn component(&self, a: usize, b: usize, c: usize, e: usize) -> f64 {
        self.op[(a * self.k + b, c * self.k + e)]
    }

    /// The tensor as a `dk x dk` matrix over row-major vectorised inputs.
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.op
    }

    pub fn apply(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(w.shape(), (self.d, self.k), "weight shape does not match tensor");
        let flat = DVector::from_iterator(self.d * self.k, (0..self.d).flat_map(|a| (0..self.k).map(move |b| w[(a, b)])));
        let out = &self.op * flat;
        DMatrix::from_row_slice(self.d, self.k, out.as_slice())
    }

    /// `W - Psi(W)`.
    pub fn complement(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        w - self.apply(w)
    }

    /// `sum_ab Psi_abab`, the dimension of the space of fixed points.
    pub fn trace(&self) -> f64 {
        self.op.trace()
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.op - self.op.transpose()).amax()
    }
}

/// How `Q` integrates over the group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AveragingMode {
    ExactSum,
    /// Fixed i.i.d. Haar draws shared by every query point.
    MonteCarlo { samples: usize, seed: u64 },
}

/// `(element, weight)` pairs realising an averaging mode.
fn averaging_nodes(group: &FiniteGroup, mode: AveragingMode) -> Result<Vec<(usize, f64)>> {
    match mode {
        AveragingMode::ExactSum => Ok(group.elements().map(|g| (g, group.weight(g))).collect()),
        AveragingMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("Monte-Carlo averaging needs samples > 0".into()));
            }
            let mut rng = stream_rng(seed, 0);
            let w = 1.0 / samples as f64;
            Ok((0..samples).map(|_| (group.sample(&mut rng), w)).collect())
        }
    }
}

/// `f(x) = fbar(x) + fperp(x)` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub full: DVector<f64>,
    pub symmetric: DVector<f64>,
    pub antisymmetric: DVector<f64>,
}

/// A black-box predictor split into its `Q`-symmetric and anti-symmetric parts.
pub struct DecomposedPredictor<F> {
    base: F,
    rep_in: Representation,
    rep_out: Representation,
    nodes: Vec<(usize, f64)>,
}

/// Wraps `pred` so that `Qf(x) = sum_g w(g) psi(g^-1) f(phi(g) x)` and
/// `f - Qf` can be evaluated.
pub fn apply_q<F>(
    pred: F,
    rep_in: &Representation,
    rep_out: &Representation,
    mode: AveragingMode,
) -> Result<DecomposedPredictor<F>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    if !rep_in.same_group(rep_out) {
        return Err(Error::GroupMismatch);
    }
    let nodes = averaging_nodes(rep_in.group(), mode)?;
    Ok(DecomposedPredictor { base: pred, rep_in: rep_in.clone(), rep_out: rep_out.clone(), nodes })
}

impl<F> DecomposedPredictor<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    fn call(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let y = (self.base)(x);
        if y.len() != self.rep_out.dim() {
            return Err(Error::DimensionMismatch { expected: self.rep_out.dim(), got: y.len() });
        }
        Ok(y)
    }

    fn check_input(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.rep_in.dim() {
            return Err(Error::DimensionMismatch { expected: self.rep_in.dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn base(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_input(x)?;
        self.call(x)
    }

    pub fn symmetric_part(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_input(x)?;
        let group = self.rep_in.group();
        let mut acc = DVector::zeros(self.rep_out.dim());
        for &(g, w) in &self.nodes {
            let y = self.call(&self.rep_in.act(g, x))?;
            acc += self.rep_out.matrix(group.inverse(g)) * y * w;
        }
        Ok(acc)
    }

    pub fn antisymmetric_part(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.decompose(x)?.antisymmetric)
    }

    pub fn decompose(&self, x: &DVector<f64>) -> Result<Decomposition> {
        let full = self.base(x)?;
        let symmetric = self.symmetric_part(x)?;
        let antisymmetric = &full - &symmetric;
        Ok(Decomposition { full, symmetric, antisymmetric })
    }
}

/// Lifts a scalar function to a 1-vector valued one.
pub fn scalar_fn<F>(f: F) -> impl Fn(&DVector<f64>) -> DVector<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    move |x| DVector::from_element(1, f(x))
}

/// Test-time augmentation: averages a scalar predictor over transformed inputs.
pub struct TestTimeAugmentation<F> {
    pred: F,
    rep_in: Representation,
    nodes: Vec<(usize, f64)>,
}

/// Unbiased Monte-Carlo estimate of `O pred` from `n` Haar draws, fixed by `seed`.
pub fn tta_average<F>(pred: F, rep_in: &Representation, n: usize, seed: u64) -> Result<TestTimeAugmentation<F>>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let nodes = averaging_nodes(rep_in.group(), AveragingMode::MonteCarlo { samples: n, seed })?;
    Ok(TestTimeAugmentation { pred, rep_in: rep_in.clone(), nodes })
}

/// Test-time augmentation over every group element, i.e. `O pred` exactly.
pub fn tta_exhaustive<F>(pred: F, rep_in: &Representation) -> TestTimeAugmentation<F>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let nodes = averaging_nodes(rep_in.group(), AveragingMode::ExactSum).expect("exact nodes");
    TestTimeAugmentation { pred, rep_in: rep_in.clone(), nodes }
}

impl<F> TestTimeAugmentation<F>
where
    F: Fn(&DVector<f64>) -> f64,
{
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.nodes.iter().map(|&(g, w)| w * (self.pred)(&self.rep_in.act(g, x))).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RademacherMode {
    /// Exact expectation over all `2^n` sign vectors (`n <= 20`).
    Enumerate,
    Sample { draws: usize, seed: u64 },
}

pub const RADEMACHER_ENUMERATION_CAP: usize = 20;

/// `E_s sup_f |(1/n) sum_i s_i f(x_i)|`.
pub fn empirical_rademacher<F>(class: &[F], points: &[DVector<f64>], mode: RademacherMode) -> Result<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let values: Vec<Vec<f64>> = class.iter().map(|f| points.iter().map(f).collect()).collect();
    rademacher_from_values(&values, mode)
}

/// Rademacher complexity of a class given as a table `values[f][i] = f(x_i)`.
pub fn rademacher_from_values(values: &[Vec<f64>], mode: RademacherMode) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty function class".into()));
    }
    let n = values[0].len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty point set".into()));
    }
    if values.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidArgument("ragged value table".into()));
    }
    let sup = |signs: &dyn Fn(usize) -> f64| -> f64 {
        values
            .iter()
            .map(|v| (v.iter().enumerate().map(|(i, x)| signs(i) * x).sum::<f64>() / n as f64).abs())
            .fold(0.0, f64::max)
    };
    match mode {
        RademacherMode::Enumerate => {
            if n > RADEMACHER_ENUMERATION_CAP {
                return Err(Error::InvalidArgument(format!(
                    "enumeration over 2^{n} sign vectors exceeds the cap of 2^{RADEMACHER_ENUMERATION_CAP}"
                )));
            }
            let total: f64 = (0u64..1 << n)
                .map(|mask| sup(&|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }))
                .sum();
            Ok(total / (1u64 << n) as f64)
        }
        RademacherMode::Sample { draws, seed } => {
            if draws == 0 {
                return Err(Error::InvalidArgument("sampled Rademacher needs draws > 0".into()));
            }
            use rand::Rng;
            let mut rng = stream_rng(seed, 0);
            let mut acc = RunningStats::default();
            for _ in 0..draws {
                let signs: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
                acc.push(sup(&|i| signs[i]));
            }
            Ok(acc.mean())
        }
    }
}

/// Rademacher complexities of a scalar class, its averaged class and its
/// anti-symmetric remainder on one point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RademacherSandwich {
    pub full: f64,
    pub averaged: f64,
    pub remainder: f64,
}

impl RademacherSandwich {
    /// `0 <= Rad(F) - Rad(Fbar) <= Rad(Fperp)` up to `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        let gap = self.full - self.averaged;
        gap >= -tol && gap <= self.remainder + tol
    }
}

/// Exact enumeration of the sandwich for a scalar class under `rep_in`.
///
/// The lower inequality is an expectation over i.i.d. data in general; on a
/// fixed sample it holds whenever the points form a union of orbits, because
/// the complexity is invariant under relabelling the points.
pub fn rademacher_sandwich<F>(class: &[F], rep_in: &Representation, points: &[DVector<f64>]) -> Result<RademacherSandwich>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let trivial = Representation::trivial(rep_in.group(), 1);
    let mut full = Vec::with_capacity(class.len());
    let mut averaged = Vec::with_capacity(class.len());
    let mut remainder = Vec::with_capacity(class.len());
    for f in class {
        let q = apply_q(scalar_fn(f), rep_in, &trivial, AveragingMode::ExactSum)?;
        let mut rf = Vec::with_capacity(points.len());
        let mut ra = Vec::with_capacity(points.len());
        let mut rr = Vec::with_capacity(points.len());
        for x in points {
            let dec = q.decompose(x)?;
            rf.push(dec.full[0]);
            ra.push(dec.symmetric[0]);
            rr.push(dec.antisymmetric[0]);
        }
        full.push(rf);
        averaged.push(ra);
        remainder.push(rr);
    }
    Ok(RademacherSandwich {
        full: rademacher_from_values(&full, RademacherMode::Enumerate)?,
        averaged: rademacher_from_values(&averaged, RademacherMode::Enumerate)?,
        remainder: rademacher_from_values(&remainder, RademacherMode::Enumerate)?,
    })
}

/// Monte-Carlo `E_mu[h(X)]` for a scalar statistic.
pub fn mc_expectation<H>(dist: &InputDistribution, samples: usize, seed: u64, h: H) -> Estimate
where
    H: Fn(&DVector<f64>) -> f64,
{
    let mut rng = stream_rng(seed, 0);
    let mut acc = RunningStats::default();
    for _ in 0..samples {
        acc.push(h(&dist.sample(&mut rng)));
    }
    acc.estimate()
}

/// One named pass/fail check of the operator property suite.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl PropertyCheck {
    fn max_defect(name: &'static str, value: f64, threshold: f64) -> Self {
        Self { name, value, threshold, passed: value <= threshold }
    }

    fn mc_zero(name: &'static str, est: Estimate, k: f64) -> Self {
        Self { name, value: est.z_score(0.0), threshold: k, passed: est.agrees(0.0, k) }
    }

    fn mc_nonpositive(name: &'static str, est: Estimate, k: f64) -> Self {
        Self { name, value: est.mean / est.se.max(f64::MIN_POSITIVE), threshold: k, passed: est.mean <= k * est.se + crate::stats::ROUNDING_FLOOR }
    }
}

/// Checks the projection, symmetry, intertwining, trace and `L2(mu)`
/// decomposition properties of `Phi`, `Psi` and `Q` for one pair of
/// representations, using a random two-layer predictor as the black box.
pub fn verify_operators(
    rep_in: &Representation,
    rep_out: &Representation,
    samples: usize,
    seed: u64,
) -> Result<Vec<PropertyCheck>> {
    let (d, k) = (rep_in.dim(), rep_out.dim());
    let mut rng = stream_rng(seed, u64::MAX);
    let mut checks = Vec::new();

    let phi = build_phi(rep_in);
    checks.push(PropertyCheck::max_defect("phi_idempotent", phi.idempotence_defect(), 1e-9));
    checks.push(PropertyCheck::max_defect("phi_symmetric", phi.symmetry_defect(), 1e-9));
    checks.push(PropertyCheck::max_defect("phi_left_invariant", phi.invariance_defect(rep_in), 1e-9));
    let trivial = Representation::trivial(rep_in.group(), 1);
    let inv_dim = character_inner(rep_in, &trivial)?;
    checks.push(PropertyCheck::max_defect("phi_rank_is_invariant_dim", (phi.invariant_dim() - inv_dim).abs(), 1e-8));

    let psi = build_psi(rep_in, rep_out)?;
    let mut idem: f64 = 0.0;
    let mut fixed: f64 = 0.0;
    for _ in 0..100 {
        let w = gaussian_matrix(&mut rng, d, k);
        let pw = psi.apply(&w);
        idem = idem.max((psi.apply(&pw) - &pw).norm());
        for g in rep_in.group().elements() {
            let moved = rep_in.matrix(g) * &pw * rep_out.matrix(rep_in.group().inverse(g));
            fixed = fixed.max((moved - &pw).amax());
        }
    }
    checks.push(PropertyCheck::max_defect("psi_idempotent", idem, 1e-9));
    checks.push(PropertyCheck::max_defect("psi_fixed_points_intertwine", fixed, 1e-9));
    checks.push(PropertyCheck::max_defect("psi_symmetric", psi.symmetry_defect(), 1e-9));
    let chi = character_inner(rep_out, rep_in)?;
    checks.push(PropertyCheck::max_defect("psi_trace_is_character_inner", (psi.trace() - chi).abs(), 1e-8));

    // Random nonlinear black box R^d -> R^k.
    let hidden = 2 * d + 1;
    let a = gaussian_matrix(&mut rng, hidden, d);
    let b = gaussian_matrix(&mut rng, k, hidden);
    let bias = crate::stats::gaussian_vector(&mut rng, hidden);
    let pred = move |x: &DVector<f64>| &b * (&a * x + &bias).map(f64::tanh);
    let q = apply_q(&pred, rep_in, rep_out, AveragingMode::ExactSum)?;

    let dist = InputDistribution::standard_normal(d);
    let mut recon: f64 = 0.0;
    let mut sym_fixed: f64 = 0.0;
    let mut closure: f64 = 0.0;
    let w_lin = gaussian_matrix(&mut rng, d, k);
    let psi_w = psi.apply(&w_lin);
    let lin = move |x: &DVector<f64>| w_lin.transpose() * x;
    let q_lin = apply_q(&lin, rep_in, rep_out, AveragingMode::ExactSum)?;
    for _ in 0..100 {
        let x = dist.sample(&mut rng);
        let dec = q.decompose(&x)?;
        recon = recon.max((&dec.full - &dec.symmetric - &dec.antisymmetric).amax());
        let sym = q.symmetric_part(&x)?;
        let qq = apply_q(|y: &DVector<f64>| q.symmetric_part(y).expect("dims checked"), rep_in, rep_out, AveragingMode::ExactSum)?;
        sym_fixed = sym_fixed.max((qq.symmetric_part(&x)? - sym).amax());
        closure = closure.max((q_lin.symmetric_part(&x)? - psi_w.transpose() * &x).amax());
    }
    checks.push(PropertyCheck::max_defect("pointwise_reconstruction", recon, 1e-12));
    checks.push(PropertyCheck::max_defect("q_fixes_symmetric_part", sym_fixed, 1e-10));
    checks.push(PropertyCheck::max_defect("q_linear_matches_psi", closure, 1e-9));

    // L2(mu) statements, paired over the same samples.
    let v = gaussian_matrix(&mut rng, d, k);
    let competitor_w = psi.apply(&v);
    let stream = rand::Rng::random::<u64>(&mut rng);
    let mut inner = RunningStats::default();
    let mut contraction = RunningStats::default();
    let mut minimality = RunningStats::default();
    let mut mc_rng = stream_rng(stream, 0);
    for _ in 0..samples {
        let x = dist.sample(&mut mc_rng);
        let dec = q.decompose(&x)?;
        inner.push(dec.symmetric.dot(&dec.antisymmetric));
        contraction.push(dec.symmetric.norm_squared() - dec.full.norm_squared());
        let s = dec.symmetric.clone() + competitor_w.transpose() * &x;
        minimality.push(dec.antisymmetric.norm_squared() - (&dec.full - s).norm_squared());
    }
    checks.push(PropertyCheck::mc_zero("l2_orthogonality", inner.estimate(), 3.0));
    checks.push(PropertyCheck::mc_nonpositive("norm_contraction", contraction.estimate(), 3.0));
    checks.push(PropertyCheck::mc_nonpositive("feature_averaging_minimal", minimality.estimate(), 3.0));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, first_coordinate_reflection, GroupDescriptor, RepDescriptor};
    use approx::assert_abs_diff_eq;

    fn s3_natural() -> Representation {
        let g = build_group(&GroupDescriptor::Symmetric(3)).unwrap();
        Representation::build(&g, &RepDescriptor::NaturalPermutation).unwrap()
    }

    #[test]
    fn phi_of_symmetric_group_is_mean_projection() {
        for d in 2..=5 {
            let g = build_group(&GroupDescriptor::Symmetric(d)).unwrap();
            let rep = Representation::build(&g, &RepDescriptor::NaturalPermutation).unwrap();
            let phi = build_phi(&rep);
            let expected = DMatrix::from_element(d, d, 1.0 / d as f64);
            assert!((phi.matrix() - expected).amax() < 1e-12);
        }
    }

    #[test]
    fn phi_of_reflection_and_trivial() {
        let phi = build_phi(&first_coordinate_reflection(3).unwrap());
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 1.0]));
        assert!((phi.matrix() - expected).amax() < 1e-15);

        let g = build_group(&GroupDescriptor::Cyclic(5)).unwrap();
        let phi = build_phi(&Representation::trivial(&g, 4));
        assert!((phi.matrix() - DMatrix::identity(4, 4)).amax() < 1e-15);
    }

    #[test]
    fn psi_on_s3_natural_has_trace_two_and_two_parameter_image() {
        let rep = s3_natural();
        let psi = build_psi(&rep, &rep).unwrap();
        assert_abs_diff_eq!(psi.trace(), 2.0, epsilon = 1e-12);
        let mut rng = stream_rng(5, 0);
        for _ in 0..20 {
            let w = gaussian_matrix(&mut rng, 3, 3);
            let p = psi.apply(&w);
            // aI + b11^T: equal diagonals, equal off-diagonals
            let off = p[(0, 1)];
            let diag = p[(0, 0)];
            for i in 0..3 {
                assert_abs_diff_eq!(p[(i, i)], diag, epsilon = 1e-12);
                for j in 0..3 {
                    if i != j {
                        assert_abs_diff_eq!(p[(i, j)], off, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn psi_of_trivial_group_is_identity() {
        let g = build_group(&GroupDescriptor::Cyclic(1)).unwrap();
        let a = Representation::trivial(&g, 3);
        let b = Representation::trivial(&g, 2);
        let psi = build_psi(&a, &b).unwrap();
        let w = DMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64);
        assert_eq!(psi.apply(&w), w);
    }

    #[test]
    fn psi_fixes_equivariant_matrices() {
        let rep = s3_natural();
        let psi = build_psi(&rep, &rep).unwrap();
        let w = DMatrix::identity(3, 3) * 2.0 + DMatrix::from_element(3, 3, -0.5);
        assert!((psi.apply(&w) - &w).amax() < 1e-10);
    }

    #[test]
    fn psi_with_trivial_output_is_phi_columnwise() {
        let rep = s3_natural();
        let triv = Representation::trivial(rep.group(), 1);
        let psi = build_psi(&rep, &triv).unwrap();
        let phi = build_phi(&rep);
        let w = DMatrix::from_column_slice(3, 1, &[1.0, -2.0, 0.5]);
        assert!((psi.apply(&w) - phi.matrix() * &w).amax() < 1e-14);
    }

    #[test]
    fn layer_tensor_matches_chapter_four_convention() {
        // For orthogonal reps, layer(psi_in, psi_out) == build_psi(psi_out, psi_in).
        let g = build_group(&GroupDescriptor::Dihedral(4)).unwrap();
        let a = Representation::build(&g, &RepDescriptor::NaturalPermutation).unwrap();
        let b = Representation::build(&g, &RepDescriptor::RotationBlock(vec![1])).unwrap();
        let layer = IntertwinerTensor::layer(&a, &b).unwrap();
        let ch4 = build_psi(&b, &a).unwrap();
        assert!((layer.as_matrix() - ch4.as_matrix()).amax() < 1e-12);
    }

    #[test]
    fn storage_cap_enforced() {
        let g = build_group(&GroupDescriptor::Cyclic(1)).unwrap();
        let a = Representation::trivial(&g, 40);
        let b = Representation::trivial(&g, 30);
        assert!(matches!(build_psi(&a, &b), Err(Error::StorageCap { .. })));
    }

    #[test]
    fn q_of_invariant_predictor_is_itself() {
        let rep = s3_natural();
        let triv = Representation::trivial(rep.group(), 1);
        let q = apply_q(scalar_fn(|x: &DVector<f64>| x.sum().powi(2)), &rep, &triv, AveragingMode::ExactSum).unwrap();
        let x = DVector::from_vec(vec![0.3, -1.0, 2.0]);
        let dec = q.decompose(&x).unwrap();
        assert_abs_diff_eq!(dec.symmetric[0], dec.full[0], epsilon = 1e-12);
        assert_abs_diff_eq!(dec.antisymmetric[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn q_of_odd_function_vanishes() {
        let rep = first_coordinate_reflection(2).unwrap();
        let triv = Representation::trivial(rep.group(), 1);
        let q = apply_q(scalar_fn(|x: &DVector<f64>| x[0]), &rep, &triv, AveragingMode::ExactSum).unwrap();
        let x = DVector::from_vec(vec![1.7, -0.4]);
        let dec = q.decompose(&x).unwrap();
        assert_eq!(dec.symmetric[0], 0.0);
        assert_eq!(dec.antisymmetric[0], 1.7);
    }

    #[test]
    fn q_of_linear_predictor_matches_psi() {
        let rep = s3_natural();
        let psi = build_psi(&rep, &rep).unwrap();
        let mut rng = stream_rng(8, 0);
        let w = gaussian_matrix(&mut rng, 3, 3);
        let expected = psi.apply(&w).transpose();
        let q = apply_q(move |x: &DVector<f64>| w.transpose() * x, &rep, &rep, AveragingMode::ExactSum).unwrap();
        for _ in 0..100 {
            let x = crate::stats::gaussian_vector(&mut rng, 3);
            assert!((q.symmetric_part(&x).unwrap() - &expected * &x).amax() < 1e-9);
        }
    }

    #[test]
    fn q_reports_dimension_mismatch() {
        let rep = s3_natural();
        let q = apply_q(|x: &DVector<f64>| x.clone(), &rep, &rep, AveragingMode::ExactSum).unwrap();
        assert!(matches!(
            q.symmetric_part(&DVector::zeros(2)),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        let bad = apply_q(|_: &DVector<f64>| DVector::zeros(2), &rep, &rep, AveragingMode::ExactSum).unwrap();
        assert!(bad.symmetric_part(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn monte_carlo_q_is_close_to_exact() {
        let rep = s3_natural();
        let f = |x: &DVector<f64>| DVector::from_vec(vec![x[0] * x[1] + x[2]]);
        let triv = Representation::trivial(rep.group(), 1);
        let exact = apply_q(f, &rep, &triv, AveragingMode::ExactSum).unwrap();
        let mc = apply_q(f, &rep, &triv, AveragingMode::MonteCarlo { samples: 20_000, seed: 1 }).unwrap();
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let (e, m) = (exact.symmetric_part(&x).unwrap()[0], mc.symmetric_part(&x).unwrap()[0]);
        // per-draw spread is bounded by the range of f over the orbit (< 10)
        assert!((e - m).abs() < 0.3, "{e} vs {m}");
    }

    #[test]
    fn tta_examples() {
        let rep = s3_natural();
        let inv = tta_average(|x: &DVector<f64>| x.sum(), &rep, 7, 3).unwrap();
        let x = DVector::from_vec(vec![1.0, 5.0, -2.0]);
        assert_abs_diff_eq!(inv.eval(&x), 4.0, epsilon = 1e-12);

        let g = build_group(&GroupDescriptor::Cyclic(2)).unwrap();
        let neg =
            Representation::from_matrices(&g, vec![DMatrix::identity(1, 1), DMatrix::from_element(1, 1, -1.0)]).unwrap();
        let odd = tta_average(|x: &DVector<f64>| x[0], &neg, 100_000, 17).unwrap();
        assert!(odd.eval(&DVector::from_element(1, 1.0)).abs() <= 0.02);

        let exact = tta_exhaustive(|x: &DVector<f64>| x[0], &neg);
        assert_eq!(exact.eval(&DVector::from_element(1, 1.0)), 0.0);
        assert!(tta_average(|x: &DVector<f64>| x[0], &neg, 0, 1).is_err());
    }

    #[test]
    fn rademacher_examples() {
        let points = vec![DVector::from_element(1, 0.0)];
        let one = |_: &DVector<f64>| 1.0;
        assert_abs_diff_eq!(empirical_rademacher(&[one], &points, RademacherMode::Enumerate).unwrap(), 1.0);

        let pts: Vec<DVector<f64>> = (0..5).map(|i| DVector::from_element(1, i as f64 * 0.7 - 1.0)).collect();
        let f = |x: &DVector<f64>| x[0].sin();
        let g = |x: &DVector<f64>| -x[0].sin();
        let single = empirical_rademacher(&[f], &pts, RademacherMode::Enumerate).unwrap();
        type Scalar<'a> = &'a dyn Fn(&DVector<f64>) -> f64;
        let pair: [Scalar; 2] = [&f, &g];
        let both = empirical_rademacher(&pair, &pts, RademacherMode::Enumerate).unwrap();
        assert_abs_diff_eq!(single, both, epsilon = 1e-15);

        let sampled = empirical_rademacher(&[f], &pts, RademacherMode::Sample { draws: 20_000, seed: 4 }).unwrap();
        assert!((sampled - single).abs() < 0.02);

        let empty: [fn(&DVector<f64>) -> f64; 0] = [];
        assert!(empirical_rademacher(&empty, &pts, RademacherMode::Enumerate).is_err());
        assert!(empirical_rademacher(&[f], &[], RademacherMode::Enumerate).is_err());
        let many: Vec<DVector<f64>> = (0..21).map(|_| DVector::zeros(1)).collect();
        assert!(empirical_rademacher(&[f], &many, RademacherMode::Enumerate).is_err());
    }

    #[test]
    fn operator_suite_passes_on_s3() {
        let rep = s3_natural();
        for check in verify_operators(&rep, &rep, 10_000, 21).unwrap() {
            assert!(check.passed, "{check:?}");
        }
    }
}
