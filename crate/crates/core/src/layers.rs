//! Feedforward layers tied to group representations.
//!
//! Layer `i` maps `R^{kappa_i} -> R^{kappa_{i+1}}` and is equivariant when
//! `W psi_i(g) = psi_{i+1}(g) W`. The projection used here is
//! `Wbar = sum_g w(g) psi_{i+1}(g^-1) W psi_i(g)`, which for orthogonal
//! representations is [`build_psi`](crate::averaging::build_psi) with the
//! roles of input and output swapped.

use std::io::BufRead;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::averaging::{IntertwinerTensor, PSI_ENTRY_CAP};
use crate::error::{Error, Result};
use crate::group::{character_inner, Representation};
use crate::orbit::{Metric, PointCloud};
use crate::stats::{gaussian_vector, stream_rng, Estimate, RunningStats, Verdict, ROUNDING_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
    Tanh,
}

impl Activation {
    pub fn apply(self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Activation::Relu => v.map(|x| x.max(0.0)),
            Activation::Identity => v.clone(),
            Activation::Tanh => v.map(f64::tanh),
        }
    }

    /// Lipschitz constant.
    pub fn lipschitz(self) -> f64 {
        1.0
    }

    pub fn is_linear(self) -> bool {
        self == Activation::Identity
    }
}

/// `max |sigma(psi(g) v) - psi(g) sigma(v)|` over random `v` and all `g`.
pub fn activation_commute_defect(activation: Activation, rep: &Representation, samples: usize, seed: u64) -> f64 {
    let mut rng = stream_rng(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let v = gaussian_vector(&mut rng, rep.dim());
        let sv = activation.apply(&v);
        for g in rep.group().elements() {
            let lhs = activation.apply(&rep.act(g, &v));
            worst = worst.max((lhs - rep.act(g, &sv)).amax());
        }
    }
    worst
}

/// `Wbar` and `Wperp = W - Wbar` for one layer.
#[derive(Debug, Clone)]
pub struct LayerProjection {
    pub w_bar: DMatrix<f64>,
    pub w_perp: DMatrix<f64>,
}

fn check_layer_shape(w: &DMatrix<f64>, psi_in: &Representation, psi_out: &Representation) -> Result<()> {
    if !psi_in.same_group(psi_out) {
        return Err(Error::GroupMismatch);
    }
    if w.ncols() != psi_in.dim() {
        return Err(Error::DimensionMismatch { expected: psi_in.dim(), got: w.ncols() });
    }
    if w.nrows() != psi_out.dim() {
        return Err(Error::DimensionMismatch { expected: psi_out.dim(), got: w.nrows() });
    }
    Ok(())
}

/// `sum_g w(g) psi_out(g^-1) W psi_in(g)` by direct summation.
pub fn direct_layer_average(w: &DMatrix<f64>, psi_in: &Representation, psi_out: &Representation) -> Result<DMatrix<f64>> {
    check_layer_shape(w, psi_in, psi_out)?;
    let group = psi_in.group();
    let mut acc = DMatrix::zeros(w.nrows(), w.ncols());
    for g in group.elements() {
        acc += psi_out.matrix(group.inverse(g)) * w * psi_in.matrix(g) * group.weight(g);
    }
    Ok(acc)
}

/// Splits `W` into its intertwining part and remainder. Uses the dense
/// tensor when it fits under the storage cap and the direct sum otherwise.
pub fn project_layer(w: &DMatrix<f64>, psi_in: &Representation, psi_out: &Representation) -> Result<LayerProjection> {
    check_layer_shape(w, psi_in, psi_out)?;
    let entries = w.len().saturating_mul(w.len());
    let w_bar = if entries <= PSI_ENTRY_CAP {
        IntertwinerTensor::layer(psi_in, psi_out)?.apply(w)
    } else {
        direct_layer_average(w, psi_in, psi_out)?
    };
    let w_perp = w - &w_bar;
    Ok(LayerProjection { w_bar, w_perp })
}

/// Widths, representations, activation and weights of an MLP
/// `F(x) = W^L s(W^{L-1} s(... s(W^1 x)))`.
#[derive(Debug, Clone)]
pub struct LayerSpec {
    widths: Vec<usize>,
    reps: Vec<Representation>,
    activation: Activation,
    weights: Vec<DMatrix<f64>>,
}

impl LayerSpec {
    pub fn new(widths: Vec<usize>, reps: Vec<Representation>, activation: Activation, weights: Vec<DMatrix<f64>>) -> Result<Self> {
        let spec = Self { widths, reps, activation, weights };
        spec.validate()?;
        Ok(spec)
    }

    /// Gaussian weights scaled by `1 / sqrt(fan_in)`.
    pub fn random(reps: Vec<Representation>, activation: Activation, seed: u64) -> Result<Self> {
        let widths: Vec<usize> = reps.iter().map(Representation::dim).collect();
        let mut rng = stream_rng(seed, 0);
        let weights = widths
            .windows(2)
            .map(|w| crate::stats::gaussian_matrix(&mut rng, w[1], w[0]) / (w[0] as f64).sqrt())
            .collect();
        Self::new(widths, reps, activation, weights)
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 {
            return Err(Error::InvalidArgument("need at least one layer (two widths)".into()));
        }
        if self.reps.len() != self.widths.len() {
            return Err(Error::DimensionMismatch { expected: self.widths.len(), got: self.reps.len() });
        }
        if self.weights.len() != self.widths.len() - 1 {
            return Err(Error::DimensionMismatch { expected: self.widths.len() - 1, got: self.weights.len() });
        }
        for (i, (rep, &w)) in self.reps.iter().zip(&self.widths).enumerate() {
            if !rep.same_group(&self.reps[0]) {
                return Err(Error::GroupMismatch);
            }
            if rep.dim() != w {
                return Err(Error::IncompatibleRepresentation(format!("layer {i}: width {w} but representation of dimension {}", rep.dim())));
            }
        }
        for (i, w) in self.weights.iter().enumerate() {
            check_layer_shape(w, &self.reps[i], &self.reps[i + 1])?;
        }
        if !self.activation.is_linear() {
            for i in 1..self.reps.len() - 1 {
                let rep = &self.reps[i];
                if !rep.is_permutation() {
                    return Err(Error::ActivationIncompatible {
                        layer: i,
                        reason: "nonlinear activation with a non-permutation representation".into(),
                    });
                }
                let defect = activation_commute_defect(self.activation, rep, 16, i as u64);
                if defect > 1e-9 {
                    return Err(Error::ActivationIncompatible { layer: i, reason: format!("commutation defect {defect:e}") });
                }
            }
        }
        Ok(())
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn reps(&self) -> &[Representation] {
        &self.reps
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[DMatrix<f64>] {
        &self.weights
    }

    pub fn layers(&self) -> usize {
        self.weights.len()
    }

    pub fn forward(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut h = x.clone();
        for (i, w) in self.weights.iter().enumerate() {
            h = w * h;
            if i + 1 < self.weights.len() {
                h = self.activation.apply(&h);
            }
        }
        h
    }

    pub fn projections(&self) -> Result<Vec<LayerProjection>> {
        self.weights.iter().enumerate().map(|(i, w)| project_layer(w, &self.reps[i], &self.reps[i + 1])).collect()
    }

    /// Same architecture with every weight replaced by its projection.
    pub fn projected(&self) -> Result<Self> {
        let weights = self.projections()?.into_iter().map(|p| p.w_bar).collect();
        Ok(Self { weights, ..self.clone() })
    }
}

/// `sum_i |W^i_perp|_F^2`.
pub fn regularizer_value(spec: &LayerSpec) -> Result<f64> {
    Ok(spec.projections()?.iter().map(|p| p.w_perp.norm_squared()).sum())
}

/// Gradient of [`regularizer_value`] with respect to each weight matrix:
/// `2 (I - P)^T (I - P) W`, which is `2 W_perp` for orthogonal representations.
pub fn regularizer_gradient(spec: &LayerSpec) -> Result<Vec<DMatrix<f64>>> {
    spec.weights
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let (psi_in, psi_out) = (&spec.reps[i], &spec.reps[i + 1]);
            let perp = project_layer(w, psi_in, psi_out)?.w_perp;
            if psi_in.is_orthogonal() && psi_out.is_orthogonal() {
                Ok(perp * 2.0)
            } else {
                // adjoint of the projection: sum_g psi_out(g^-1)^T R psi_in(g)^T
                let group = psi_in.group();
                let mut adj = DMatrix::zeros(w.nrows(), w.ncols());
                for g in group.elements() {
                    adj += psi_out.matrix(group.inverse(g)).transpose() * &perp * psi_in.matrix(g).transpose() * group.weight(g);
                }
                Ok((perp - adj) * 2.0)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivarianceReport {
    pub perp_norms: Vec<f64>,
    /// `max |F(psi_1(g) x) - psi_{L+1}(g) F(x)|_inf` over the samples.
    pub violation: f64,
    pub samples: usize,
}

/// End-to-end equivariance violation over `samples` random `(g, x)`.
pub fn equivariance_report(spec: &LayerSpec, samples: usize, seed: u64) -> Result<EquivarianceReport> {
    let perp_norms = spec.projections()?.iter().map(|p| p.w_perp.norm()).collect();
    let (rep_in, rep_out) = (&spec.reps[0], &spec.reps[spec.reps.len() - 1]);
    let mut rng = stream_rng(seed, 0);
    let mut violation: f64 = 0.0;
    for _ in 0..samples {
        let g = rep_in.group().sample(&mut rng);
        let x = gaussian_vector(&mut rng, rep_in.dim());
        let lhs = spec.forward(&rep_in.act(g, &x));
        let rhs = rep_out.act(g, &spec.forward(&x));
        violation = violation.max((lhs - rhs).amax());
    }
    Ok(EquivarianceReport { perp_norms, violation, samples })
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularisationReport {
    /// Monte-Carlo `|(id - Q) f_W|_mu^2`.
    pub lhs: Estimate,
    /// `2 C^2 tr(W_perp Sigma W_perp^T)`.
    pub middle: f64,
    /// `2 C^2 tr(Sigma) |W_perp|_F^2`.
    pub right: f64,
    pub verdict: Verdict,
}

/// Checks `|(id - Q) f_W|^2 <= 2 C^2 |W_perp Sigma^1/2|_F^2 <= 2 C^2 |Sigma^1/2|_F^2 |W_perp|_F^2`
/// for `f_W(x) = sigma(W x)` and `x ~ N(0, Sigma)`.
///
/// `covariance = None` means the identity. The left inequality is tested at
/// four standard errors, the right one exactly.
pub fn check_regularisation_bound(
    w: &DMatrix<f64>,
    psi_in: &Representation,
    psi_out: &Representation,
    activation: Activation,
    covariance: Option<&DMatrix<f64>>,
    samples: usize,
    seed: u64,
) -> Result<RegularisationReport> {
    check_layer_shape(w, psi_in, psi_out)?;
    if !psi_in.is_orthogonal() || !psi_out.is_orthogonal() {
        return Err(Error::IncompatibleRepresentation("the regularisation bound needs orthogonal representations".into()));
    }
    if !activation.is_linear() && !psi_out.is_permutation() {
        return Err(Error::ActivationIncompatible { layer: 1, reason: "nonlinear activation with a non-permutation output representation".into() });
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let d = psi_in.dim();
    let sigma = covariance.cloned().unwrap_or_else(|| DMatrix::identity(d, d));
    if sigma.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, got: sigma.nrows() });
    }
    for m in psi_in.matrices() {
        if (m * &sigma * m.transpose() - &sigma).amax() > 1e-10 {
            return Err(Error::InvalidArgument("input covariance is not invariant under the representation".into()));
        }
    }
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Factorization { condition: crate::linalg::condition_estimate(&sigma) })?;
    let l = chol.l();

    let perp = project_layer(w, psi_in, psi_out)?.w_perp;
    let c2 = activation.lipschitz().powi(2);
    let middle = 2.0 * c2 * (&perp * &sigma * perp.transpose()).trace();
    let right = 2.0 * c2 * sigma.trace() * perp.norm_squared();

    let group = psi_in.group();
    let f = |x: &DVector<f64>| activation.apply(&(w * x));
    let mut rng = stream_rng(seed, 0);
    let mut acc = RunningStats::default();
    for _ in 0..samples {
        let x = &l * gaussian_vector(&mut rng, d);
        let mut q = DVector::zeros(psi_out.dim());
        for g in group.elements() {
            q += psi_out.matrix(group.inverse(g)) * f(&psi_in.act(g, &x)) * group.weight(g);
        }
        acc.push((f(&x) - q).norm_squared());
    }
    let lhs = acc.estimate();
    let pass = lhs.mean <= middle + 4.0 * lhs.se + ROUNDING_FLOOR && middle <= right * (1.0 + 1e-12) + ROUNDING_FLOOR;
    Ok(RegularisationReport { lhs, middle, right, verdict: Verdict::from_bool(pass) })
}

/// `L + (1/2) alpha L (L + 1) max_i <chi_i, chi_{i+1}>` with
/// `alpha = log2(4e log2(sum_i 2e i kappa_i) sum_i i kappa_i)`, sums over
/// `i = 1..L` and `L = widths.len() - 1`.
pub fn vc_bound(widths: &[usize], reps: &[Representation]) -> Result<f64> {
    if widths.len() < 2 {
        return Err(Error::InvalidArgument("need at least one layer".into()));
    }
    if reps.len() != widths.len() {
        return Err(Error::DimensionMismatch { expected: widths.len(), got: reps.len() });
    }
    for (rep, &w) in reps.iter().zip(widths) {
        if rep.dim() != w {
            return Err(Error::DimensionMismatch { expected: w, got: rep.dim() });
        }
    }
    let l = widths.len() - 1;
    let e = std::f64::consts::E;
    let weighted: f64 = (1..=l).map(|i| (i * widths[i - 1]) as f64).sum();
    let alpha = (4.0 * e * (2.0 * e * weighted).log2() * weighted).log2();
    let mut max_inner: f64 = 0.0;
    for i in 0..l {
        max_inner = max_inner.max(character_inner(&reps[i], &reps[i + 1])?);
    }
    let lf = l as f64;
    Ok(lf + 0.5 * alpha * lf * (lf + 1.0) * max_inner)
}

/// Reads a weight matrix in the point-cloud text format, one row per line.
pub fn read_matrix<R: BufRead>(reader: R) -> Result<DMatrix<f64>> {
    let cloud = PointCloud::read(reader, Metric::Euclidean)?;
    let rows = cloud.points();
    Ok(DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]))
}

pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    read_matrix(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, GroupDescriptor, RepDescriptor};
    use crate::stats::gaussian_matrix;
    use approx::assert_abs_diff_eq;

    fn natural(d: usize) -> Representation {
        let g = build_group(&GroupDescriptor::Symmetric(d)).unwrap();
        Representation::build(&g, &RepDescriptor::NaturalPermutation).unwrap()
    }

    #[test]
    fn projection_examples() {
        let rep = natural(3);
        let eq = DMatrix::identity(3, 3) * 1.5 + DMatrix::from_element(3, 3, 0.25);
        assert!(project_layer(&eq, &rep, &rep).unwrap().w_perp.amax() < 1e-10);
        let id = project_layer(&DMatrix::identity(3, 3), &rep, &rep).unwrap();
        assert!((id.w_bar - DMatrix::identity(3, 3)).amax() < 1e-12);

        // Oracle: brute-force average over the six permutation matrices.
        let mut rng = stream_rng(1, 0);
        let w = gaussian_matrix(&mut rng, 3, 3);
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut avg = DMatrix::zeros(3, 3);
        for p in perms {
            let m = DMatrix::from_fn(3, 3, |i, j| if p[j] == i { 1.0 } else { 0.0 });
            avg += m.transpose() * &w * &m / 6.0;
        }
        let proj = project_layer(&w, &rep, &rep).unwrap();
        assert!((&proj.w_bar - &avg).amax() < 1e-12);
        // aI + b11^T with a + b = mean diagonal, b = mean off-diagonal
        let diag = w.trace() / 3.0;
        let off = (w.sum() - w.trace()) / 6.0;
        let expected = DMatrix::identity(3, 3) * (diag - off) + DMatrix::from_element(3, 3, off);
        assert!((&proj.w_bar - expected).amax() < 1e-12);
        assert_eq!(&proj.w_bar + &proj.w_perp, w);
    }

    #[test]
    fn projection_intertwines_and_matches_direct_sum() {
        let g = build_group(&GroupDescriptor::Dihedral(4)).unwrap();
        let a = Representation::build(&g, &RepDescriptor::NaturalPermutation).unwrap();
        let b = Representation::build(&g, &RepDescriptor::RotationBlock(vec![1, 2])).unwrap();
        let mut rng = stream_rng(2, 0);
        for _ in 0..10 {
            let w = gaussian_matrix(&mut rng, 4, 4);
            let p = project_layer(&w, &a, &b).unwrap();
            assert!((&p.w_bar - direct_layer_average(&w, &a, &b).unwrap()).amax() < 1e-10);
            for h in g.elements() {
                assert!((&p.w_bar * a.matrix(h) - b.matrix(h) * &p.w_bar).amax() < 1e-9);
            }
        }
        assert!(project_layer(&DMatrix::zeros(3, 4), &a, &b).is_err());
    }

    #[test]
    fn non_orthogonal_layer_projection() {
        // C_2 acting on R^2 by a non-orthogonal involution.
        let g = build_group(&GroupDescriptor::Cyclic(2)).unwrap();
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, -1.0]);
        let rep = Representation::from_matrices_non_orthogonal(&g, vec![DMatrix::identity(2, 2), s.clone()]).unwrap();
        assert!(!rep.is_orthogonal());
        let mut rng = stream_rng(3, 0);
        let w = gaussian_matrix(&mut rng, 2, 2);
        let p = project_layer(&w, &rep, &rep).unwrap();
        assert!((&p.w_bar * &s - &s * &p.w_bar).amax() < 1e-12);
        let again = project_layer(&p.w_bar, &rep, &rep).unwrap();
        assert!(again.w_perp.amax() < 1e-12);
    }

    #[test]
    fn regularizer_examples() {
        let rep = natural(3);
        let g = rep.group().clone();
        let triv = Representation::trivial(&g, 1);
        let eq = DMatrix::identity(3, 3);
        let spec = LayerSpec::new(vec![3, 3, 1], vec![rep.clone(), rep.clone(), triv.clone()], Activation::Relu, vec![eq, DMatrix::from_element(1, 3, 1.0)]).unwrap();
        assert_abs_diff_eq!(regularizer_value(&spec).unwrap(), 0.0, epsilon = 1e-20);

        // Trivial group on the input, anti-symmetric residual of unit norm
        // under the reflection x_1 -> -x_1 (e_1 e_1^T is equivariant; e_1 e_2^T is not).
        let refl = crate::group::first_coordinate_reflection(2).unwrap();
        let mut w = DMatrix::zeros(2, 2);
        w[(0, 1)] = 1.0;
        let one = LayerSpec::new(vec![2, 2], vec![refl.clone(), refl], Activation::Identity, vec![w]).unwrap();
        assert_abs_diff_eq!(regularizer_value(&one).unwrap(), 1.0, epsilon = 1e-15);

        let rand = LayerSpec::random(vec![rep.clone(), rep.clone(), triv], Activation::Relu, 4).unwrap();
        let direct: f64 = rand
            .weights()
            .iter()
            .enumerate()
            .map(|(i, w)| (w - direct_layer_average(w, &rand.reps()[i], &rand.reps()[i + 1]).unwrap()).norm_squared())
            .sum();
        assert_abs_diff_eq!(regularizer_value(&rand).unwrap(), direct, epsilon = 1e-12);
    }

    #[test]
    fn regularizer_gradient_matches_finite_differences() {
        let g = build_group(&GroupDescriptor::Dihedral(4)).unwrap();
        let a = Representation::build(&g, &RepDescriptor::NaturalPermutation).unwrap();
        let b = Representation::trivial(&g, 2);
        let spec = LayerSpec::random(vec![a.clone(), a, b], Activation::Relu, 6).unwrap();
        let grad = regularizer_gradient(&spec).unwrap();
        use rand::Rng;
        let mut rng = stream_rng(7, 0);
        let h = 1e-6;
        for _ in 0..20 {
            let layer = rng.random_range(0..spec.layers());
            let (r, c) = (rng.random_range(0..spec.weights()[layer].nrows()), rng.random_range(0..spec.weights()[layer].ncols()));
            let bump = |delta: f64| {
                let mut s = spec.clone();
                s.weights[layer][(r, c)] += delta;
                regularizer_value(&s).unwrap()
            };
            let fd = (bump(h) - bump(-h)) / (2.0 * h);
            let an = grad[layer][(r, c)];
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{fd} vs {an}");
        }
    }

    #[test]
    fn projected_network_is_equivariant() {
        let rep = natural(3);
        let triv = Representation::trivial(rep.group(), 1);
        let spec = LayerSpec::random(vec![rep.clone(), rep.clone(), rep.clone(), triv], Activation::Relu, 8).unwrap();
        assert!(equivariance_report(&spec, 200, 1).unwrap().violation > 1e-3);
        let report = equivariance_report(&spec.projected().unwrap(), 1000, 1).unwrap();
        assert!(report.violation <= 1e-8, "{report:?}");
        assert!(report.perp_norms.iter().all(|n| *n <= 1e-10));
    }

    #[test]
    fn activation_checks() {
        let g = build_group(&GroupDescriptor::Cyclic(4)).unwrap();
        let rot = Representation::build(&g, &RepDescriptor::RotationBlock(vec![1])).unwrap();
        let triv = Representation::trivial(&g, 1);
        let err = LayerSpec::random(vec![triv.clone(), rot.clone(), triv.clone()], Activation::Relu, 1);
        assert!(matches!(err, Err(Error::ActivationIncompatible { layer: 1, .. })));
        assert!(LayerSpec::random(vec![triv.clone(), rot, triv], Activation::Identity, 1).is_ok());
        assert!(activation_commute_defect(Activation::Tanh, &natural(4), 10, 2) <= 1e-15);
    }

    #[test]
    fn regularisation_bound_examples() {
        let rep = natural(3);
        let eq = DMatrix::identity(3, 3) * 0.3 + DMatrix::from_element(3, 3, 0.1);
        let zero = check_regularisation_bound(&eq, &rep, &rep, Activation::Relu, None, 1000, 1).unwrap();
        assert!(zero.lhs.mean < 1e-24 && zero.middle < 1e-24);
        assert!(zero.verdict.passed());

        let mut rng = stream_rng(9, 0);
        let w = gaussian_matrix(&mut rng, 3, 3);
        let perp = project_layer(&w, &rep, &rep).unwrap().w_perp;
        let sx2 = 2.25;
        let cov = DMatrix::identity(3, 3) * sx2;
        let lin = check_regularisation_bound(&w, &rep, &rep, Activation::Identity, Some(&cov), 20_000, 2).unwrap();
        assert!(lin.lhs.agrees(sx2 * perp.norm_squared(), 4.0), "{lin:?}");
        assert!(lin.lhs.mean < lin.middle);
        assert!(lin.verdict.passed());

        let relu = check_regularisation_bound(&w, &rep, &rep, Activation::Relu, None, 10_000, 3).unwrap();
        assert!(relu.verdict.passed(), "{relu:?}");

        let aniso = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert!(check_regularisation_bound(&w, &rep, &rep, Activation::Relu, Some(&aniso), 100, 3).is_err());
    }

    #[test]
    fn vc_bound_examples() {
        let e = std::f64::consts::E;
        let rep = natural(3);
        let triv = Representation::trivial(rep.group(), 1);
        // widths (3, 1): L = 1, sum i kappa_i = 3
        let alpha = (4.0 * e * (6.0 * e).log2() * 3.0).log2();
        assert_abs_diff_eq!(vc_bound(&[3, 1], &[rep.clone(), triv.clone()]).unwrap(), 1.0 + alpha, epsilon = 1e-12);

        // widths (3, 3, 1): L = 2, sum i kappa_i = 3 + 6 = 9, max inner product 2
        let alpha = (4.0 * e * (18.0 * e).log2() * 9.0).log2();
        let got = vc_bound(&[3, 3, 1], &[rep.clone(), rep.clone(), triv.clone()]).unwrap();
        assert_abs_diff_eq!(got, 2.0 + 0.5 * alpha * 6.0 * 2.0, epsilon = 1e-12);

        // trivial representations: inner product is the product of widths
        let g = rep.group().clone();
        let t4 = Representation::trivial(&g, 4);
        let t2 = Representation::trivial(&g, 2);
        let alpha = (4.0 * e * (8.0 * e).log2() * 4.0).log2();
        assert_abs_diff_eq!(vc_bound(&[4, 2], &[t4, t2]).unwrap(), 1.0 + alpha * 8.0, epsilon = 1e-12);
        assert!(vc_bound(&[3], &[rep]).is_err());
    }

    #[test]
    fn read_weight_matrix() {
        let m = read_matrix("1 2 3\n4,5,6\n".as_bytes()).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
    }
}
