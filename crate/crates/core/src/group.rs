//! Finite groups (and equispaced quadratures of SO(2)) with their orthogonal
//! representations and characters.
//!
//! Elements are dense integer ids `0..order`, with id 0 always the identity.
//! Composition is computed from the element structure, so no
//! `order x order` table is stored. [`FiniteGroup::composition_table`]
//! materialises one on request.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::stream_rng;

/// Largest group the library will enumerate.
pub const MAX_GROUP_ORDER: usize = 5040;

/// Groups up to this order are checked exhaustively, larger ones by sampling.
const EXHAUSTIVE_CHECK_ORDER: usize = 64;

const SAMPLED_CHECKS: usize = 1000;

/// Default homomorphism / orthogonality tolerance.
pub const REP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupDescriptor {
    Cyclic(usize),
    Symmetric(usize),
    Dihedral(usize),
    Product(Box<GroupDescriptor>, Box<GroupDescriptor>),
    /// `M` equispaced rotations standing in for Haar measure on SO(2).
    So2Quadrature(usize),
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cyclic(m) => write!(f, "C{m}"),
            Self::Symmetric(m) => write!(f, "S{m}"),
            Self::Dihedral(m) => write!(f, "D{m}"),
            Self::Product(a, b) => write!(f, "{a}x{b}"),
            Self::So2Quadrature(m) => write!(f, "SO2q{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Quadrature { nodes: usize },
}

#[derive(Debug, Clone)]
enum Structure {
    /// Element `i` is the `i`-th power of a generator of order `order`.
    Cyclic { order: usize },
    /// Permutations of `0..m` in lexicographic order.
    Symmetric { perms: Vec<Vec<usize>> },
    /// Element `k + m * b` is `r^k s^b`.
    Dihedral { m: usize },
    /// Element `a * |right| + b` is the pair `(a, b)`.
    Product { left: Box<FiniteGroup>, right: Box<FiniteGroup> },
}

#[derive(Debug, Clone)]
pub struct FiniteGroup {
    descriptor: GroupDescriptor,
    structure: Structure,
    order: usize,
    inverses: Vec<usize>,
    weights: Vec<f64>,
    exactness: Exactness,
}

impl FiniteGroup {
    pub fn build(descriptor: &GroupDescriptor) -> Result<Self> {
        let (structure, exactness) = match descriptor {
            GroupDescriptor::Cyclic(m) => {
                require(*m >= 1, "cyclic order must be >= 1")?;
                (Structure::Cyclic { order: *m }, Exactness::Exact)
            }
            GroupDescriptor::So2Quadrature(m) => {
                require(*m >= 2, "SO(2) quadrature needs at least 2 nodes")?;
                (Structure::Cyclic { order: *m }, Exactness::Quadrature { nodes: *m })
            }
            GroupDescriptor::Symmetric(m) => {
                require(*m >= 1, "symmetric degree must be >= 1")?;
                let size = factorial_capped(*m);
                if size > MAX_GROUP_ORDER {
                    return Err(Error::GroupTooLarge { size, cap: MAX_GROUP_ORDER });
                }
                let perms = (0..size).map(|r| unrank_permutation(r, *m)).collect();
                (Structure::Symmetric { perms }, Exactness::Exact)
            }
            GroupDescriptor::Dihedral(m) => {
                require(*m >= 1, "dihedral order must be >= 1")?;
                (Structure::Dihedral { m: *m }, Exactness::Exact)
            }
            GroupDescriptor::Product(a, b) => {
                let left = Self::build(a)?;
                let right = Self::build(b)?;
                let size = left.order.saturating_mul(right.order);
                if size > MAX_GROUP_ORDER {
                    return Err(Error::GroupTooLarge { size, cap: MAX_GROUP_ORDER });
                }
                let exactness = match (left.exactness, right.exactness) {
                    (Exactness::Exact, Exactness::Exact) => Exactness::Exact,
                    _ => Exactness::Quadrature { nodes: size },
                };
                (Structure::Product { left: Box::new(left), right: Box::new(right) }, exactness)
            }
        };
        let order = match &structure {
            Structure::Cyclic { order } => *order,
            Structure::Symmetric { perms, .. } => perms.len(),
            Structure::Dihedral { m } => 2 * m,
            Structure::Product { left, right } => left.order * right.order,
        };
        if order > MAX_GROUP_ORDER {
            return Err(Error::GroupTooLarge { size: order, cap: MAX_GROUP_ORDER });
        }
        let mut group = FiniteGroup {
            descriptor: descriptor.clone(),
            structure,
            order,
            inverses: Vec::new(),
            weights: vec![1.0 / order as f64; order],
            exactness,
        };
        group.inverses = (0..order).map(|g| group.compute_inverse(g)).collect();
        Ok(group)
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    /// Haar weights, one per element, summing to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, g: usize) -> f64 {
        self.weights[g]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    /// The product `g * h` (apply `h` first).
    pub fn compose(&self, g: usize, h: usize) -> usize {
        match &self.structure {
            Structure::Cyclic { order } => (g + h) % order,
            Structure::Symmetric { perms, .. } => {
                let (p, q) = (&perms[g], &perms[h]);
                let composed: Vec<usize> = q.iter().map(|&i| p[i]).collect();
                rank_permutation(&composed)
            }
            Structure::Dihedral { m } => {
                let (k1, b1) = (g % m, g / m);
                let (k2, b2) = (h % m, h / m);
                let k = if b1 == 0 { (k1 + k2) % m } else { (k1 + m - k2) % m };
                k + m * (b1 ^ b2)
            }
            Structure::Product { left, right } => {
                let (a1, b1) = (g / right.order, g % right.order);
                let (a2, b2) = (h / right.order, h % right.order);
                left.compose(a1, a2) * right.order + right.compose(b1, b2)
            }
        }
    }

    fn compute_inverse(&self, g: usize) -> usize {
        match &self.structure {
            Structure::Cyclic { order } => (order - g) % order,
            Structure::Symmetric { perms, .. } => {
                let p = &perms[g];
                let mut inv = vec![0; p.len()];
                for (i, &pi) in p.iter().enumerate() {
                    inv[pi] = i;
                }
                rank_permutation(&inv)
            }
            Structure::Dihedral { m } => {
                if g < *m {
                    (m - g) % m
                } else {
                    g
                }
            }
            Structure::Product { left, right } => {
                let (a, b) = (g / right.order, g % right.order);
                left.compute_inverse(a) * right.order + right.compute_inverse(b)
            }
        }
    }

    /// Draws an element from the Haar weights.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (g, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return g;
            }
        }
        self.order - 1
    }

    /// Dense `order x order` table. Quadratic in memory; meant for small groups.
    pub fn composition_table(&self) -> Vec<Vec<usize>> {
        (0..self.order).map(|g| (0..self.order).map(|h| self.compose(g, h)).collect()).collect()
    }

    /// Permutation of `0..degree` for a symmetric-group element.
    pub fn permutation(&self, g: usize) -> Option<&[usize]> {
        match &self.structure {
            Structure::Symmetric { perms, .. } => Some(&perms[g]),
            _ => None,
        }
    }

    /// Checks closure, associativity, identity, inverses and the Haar weights.
    pub fn validate(&self) -> Result<()> {
        let n = self.order;
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 || self.weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidGroup(format!("Haar weights sum to {sum}")));
        }
        for g in 0..n {
            if self.compose(self.identity(), g) != g || self.compose(g, self.identity()) != g {
                return Err(Error::InvalidGroup(format!("identity fails on element {g}")));
            }
            if self.compose(g, self.inverse(g)) != self.identity() {
                return Err(Error::InvalidGroup(format!("inverse fails on element {g}")));
            }
        }
        let check = |g: usize, h: usize, k: usize| -> Result<()> {
            let lhs = self.compose(self.compose(g, h), k);
            let rhs = self.compose(g, self.compose(h, k));
            if lhs != rhs || lhs >= n {
                return Err(Error::InvalidGroup(format!("associativity fails at ({g}, {h}, {k})")));
            }
            // left translation by g permutes the weights
            if (self.weight(self.compose(g, h)) - self.weight(h)).abs() > 1e-12 {
                return Err(Error::InvalidGroup("weights not left-invariant".into()));
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_CHECK_ORDER {
            for g in 0..n {
                for h in 0..n {
                    for k in 0..n {
                        check(g, h, k)?;
                    }
                }
            }
        } else {
            let mut rng = stream_rng(0x5EED, n as u64);
            for _ in 0..SAMPLED_CHECKS {
                check(rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n))?;
            }
        }
        Ok(())
    }

    fn same_as(&self, other: &FiniteGroup) -> bool {
        std::ptr::eq(self, other) || self.descriptor == other.descriptor
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidGroup(msg.to_string()))
    }
}

fn factorial_capped(m: usize) -> usize {
    (1..=m).fold(1usize, |acc, i| acc.saturating_mul(i))
}

/// Lexicographic rank (Lehmer code) of a permutation.
fn rank_permutation(p: &[usize]) -> usize {
    let n = p.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count();
        rank = rank * (n - i) + smaller;
    }
    rank
}

fn unrank_permutation(mut rank: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for i in (0..n).rev() {
        let base = n - i;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<usize> = (0..n).collect();
    digits.into_iter().map(|d| pool.remove(d)).collect()
}

pub fn build_group(descriptor: &GroupDescriptor) -> Result<Arc<FiniteGroup>> {
    let group = FiniteGroup::build(descriptor)?;
    group.validate()?;
    Ok(Arc::new(group))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepDescriptor {
    NaturalPermutation,
    Trivial(usize),
    /// 2x2 rotation blocks, one per listed frequency.
    RotationBlock(Vec<i64>),
    Sign,
    DirectSum(Vec<RepDescriptor>),
    /// Pull back a representation of one factor of a product group.
    Factor { index: usize, rep: Box<RepDescriptor> },
    /// One matrix per element, in element order, each given as rows.
    Explicit(Vec<Vec<Vec<f64>>>),
}

/// A real representation `g -> matrix(g)` of a [`FiniteGroup`].
#[derive(Debug, Clone)]
pub struct Representation {
    group: Arc<FiniteGroup>,
    dim: usize,
    matrices: Vec<DMatrix<f64>>,
    orthogonal: bool,
}

impl Representation {
    /// Builds and validates a representation. Matrices must be orthogonal.
    pub fn build(group: &Arc<FiniteGroup>, descriptor: &RepDescriptor) -> Result<Self> {
        let matrices = rep_matrices(group, descriptor)?;
        Self::from_matrices(group, matrices)
    }

    /// Wraps per-element matrices after checking the homomorphism and
    /// orthogonality properties.
    pub fn from_matrices(group: &Arc<FiniteGroup>, matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let rep = Self::checked(group, matrices)?;
        rep.check_orthogonal(REP_TOLERANCE)?;
        Ok(Representation { orthogonal: true, ..rep })
    }

    /// Like [`Representation::from_matrices`] but accepts non-orthogonal
    /// matrices. Only the layer-projection code consumes these.
    pub fn from_matrices_non_orthogonal(
        group: &Arc<FiniteGroup>,
        matrices: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let mut rep = Self::checked(group, matrices)?;
        rep.orthogonal = rep.check_orthogonal(REP_TOLERANCE).is_ok();
        Ok(rep)
    }

    fn checked(group: &Arc<FiniteGroup>, matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::IncompatibleRepresentation(format!(
                "{} matrices supplied for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        let dim = matrices[0].nrows();
        if dim == 0 || matrices.iter().any(|m| m.shape() != (dim, dim)) {
            return Err(Error::IncompatibleRepresentation("matrices must be square of one size".into()));
        }
        let rep = Representation { group: Arc::clone(group), dim, matrices, orthogonal: false };
        rep.check_homomorphism(REP_TOLERANCE)?;
        let id_dev = (&rep.matrices[group.identity()] - DMatrix::identity(dim, dim)).amax();
        if id_dev > REP_TOLERANCE {
            return Err(Error::NotHomomorphism { g: 0, h: 0, deviation: id_dev });
        }
        Ok(rep)
    }

    fn check_homomorphism(&self, tol: f64) -> Result<()> {
        let n = self.group.order();
        let check = |g: usize, h: usize| -> Result<()> {
            let gh = self.group.compose(g, h);
            let dev = (&self.matrices[gh] - &self.matrices[g] * &self.matrices[h]).amax();
            if dev > tol {
                Err(Error::NotHomomorphism { g, h, deviation: dev })
            } else {
                Ok(())
            }
        };
        if n <= EXHAUSTIVE_CHECK_ORDER {
            for g in 0..n {
                for h in 0..n {
                    check(g, h)?;
                }
            }
        } else {
            let mut rng = stream_rng(0x0E9, n as u64);
            for _ in 0..SAMPLED_CHECKS {
                check(rng.random_range(0..n), rng.random_range(0..n))?;
            }
        }
        Ok(())
    }

    fn check_orthogonal(&self, tol: f64) -> Result<()> {
        let eye = DMatrix::identity(self.dim, self.dim);
        for (g, m) in self.matrices.iter().enumerate() {
            let dev = (m * m.transpose() - &eye).amax();
            if dev > tol {
                return Err(Error::NotOrthogonal { element: g, deviation: dev });
            }
        }
        Ok(())
    }

    pub fn trivial(group: &Arc<FiniteGroup>, dim: usize) -> Self {
        let eye = DMatrix::identity(dim, dim);
        Representation {
            group: Arc::clone(group),
            dim,
            matrices: vec![eye; group.order()],
            orthogonal: true,
        }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn matrix(&self, g: usize) -> &DMatrix<f64> {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    /// True when every matrix is a 0/1 permutation matrix.
    pub fn is_permutation(&self) -> bool {
        self.matrices.iter().all(|m| {
            m.iter().all(|&x| x == 0.0 || x == 1.0)
                && m.row_iter().all(|r| r.sum() == 1.0)
                && m.column_iter().all(|c| c.sum() == 1.0)
        })
    }

    pub fn act(&self, g: usize, x: &DVector<f64>) -> DVector<f64> {
        &self.matrices[g] * x
    }

    /// `[matrix(g) x for g in G]` in element order.
    pub fn orbit(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        self.matrices.iter().map(|m| m * x).collect()
    }

    /// `chi(g) = trace(matrix(g))` per element.
    pub fn character(&self) -> Vec<f64> {
        self.matrices.iter().map(|m| m.trace()).collect()
    }

    pub fn same_group(&self, other: &Representation) -> bool {
        self.group.same_as(&other.group)
    }

    pub fn direct_sum(&self, other: &Representation) -> Result<Representation> {
        if !self.same_group(other) {
            return Err(Error::GroupMismatch);
        }
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| block_diag(&[a.clone(), b.clone()]))
            .collect();
        Ok(Representation {
            group: Arc::clone(&self.group),
            dim: self.dim + other.dim,
            matrices,
            orthogonal: self.orthogonal && other.orthogonal,
        })
    }
}

/// `<chi_1, chi_2> = sum_g w(g) chi_1(g) chi_2(g)`.
pub fn character_inner(a: &Representation, b: &Representation) -> Result<f64> {
    if !a.same_group(b) {
        return Err(Error::GroupMismatch);
    }
    let weights = a.group.weights();
    Ok(a
        .matrices
        .iter()
        .zip(&b.matrices)
        .zip(weights)
        .map(|((x, y), w)| w * x.trace() * y.trace())
        .sum())
}

fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((at, at), (k, k)).copy_from(b);
        at += k;
    }
    out
}

fn rotation(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

fn permutation_matrix(p: &[usize]) -> DMatrix<f64> {
    let n = p.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, &pi) in p.iter().enumerate() {
        m[(pi, i)] = 1.0;
    }
    m
}

fn parity(p: &[usize]) -> f64 {
    let inversions: usize =
        (0..p.len()).map(|i| p[i + 1..].iter().filter(|&&x| x < p[i]).count()).sum();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn rep_matrices(group: &FiniteGroup, descriptor: &RepDescriptor) -> Result<Vec<DMatrix<f64>>> {
    let incompatible =
        |what: &str| Error::IncompatibleRepresentation(format!("{what} on {}", group.descriptor()));
    let n = group.order();
    match descriptor {
        RepDescriptor::Trivial(dim) => {
            if *dim == 0 {
                return Err(incompatible("zero-dimensional trivial rep"));
            }
            Ok(vec![DMatrix::identity(*dim, *dim); n])
        }
        RepDescriptor::NaturalPermutation => match &group.structure {
            Structure::Cyclic { order } => Ok((0..n)
                .map(|g| permutation_matrix(&(0..*order).map(|i| (i + g) % order).collect::<Vec<_>>()))
                .collect()),
            Structure::Symmetric { perms, .. } => Ok(perms.iter().map(|p| permutation_matrix(p)).collect()),
            Structure::Dihedral { m } => Ok((0..n)
                .map(|g| {
                    let (k, b) = (g % m, g / m);
                    let p: Vec<usize> = (0..*m)
                        .map(|i| if b == 0 { (k + i) % m } else { (k + m - i) % m })
                        .collect();
                    permutation_matrix(&p)
                })
                .collect()),
            Structure::Product { left, right } => {
                let l = rep_matrices(left, descriptor)?;
                let r = rep_matrices(right, descriptor)?;
                Ok((0..n)
                    .map(|g| block_diag(&[l[g / right.order].clone(), r[g % right.order].clone()]))
                    .collect())
            }
        },
        RepDescriptor::RotationBlock(freqs) => {
            if freqs.is_empty() {
                return Err(incompatible("empty frequency list"));
            }
            let (m, dihedral) = match &group.structure {
                Structure::Cyclic { order } => (*order, false),
                Structure::Dihedral { m } => (*m, true),
                _ => return Err(incompatible("rotation blocks")),
            };
            let flip = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
            Ok((0..n)
                .map(|g| {
                    let (k, b) = (g % m, g / m);
                    let blocks: Vec<DMatrix<f64>> = freqs
                        .iter()
                        .map(|&f| {
                            let steps = (k as i64 * f).rem_euclid(m as i64) as f64;
                            let r = rotation(TAU * steps / m as f64);
                            if dihedral && b == 1 {
                                r * &flip
                            } else {
                                r
                            }
                        })
                        .collect();
                    block_diag(&blocks)
                })
                .collect())
        }
        RepDescriptor::Sign => match &group.structure {
            Structure::Symmetric { perms, .. } => {
                Ok(perms.iter().map(|p| DMatrix::from_element(1, 1, parity(p))).collect())
            }
            _ => Err(incompatible("sign representation")),
        },
        RepDescriptor::DirectSum(parts) => {
            if parts.is_empty() {
                return Err(incompatible("empty direct sum"));
            }
            let mats: Vec<Vec<DMatrix<f64>>> =
                parts.iter().map(|p| rep_matrices(group, p)).collect::<Result<_>>()?;
            Ok((0..n)
                .map(|g| block_diag(&mats.iter().map(|m| m[g].clone()).collect::<Vec<_>>()))
                .collect())
        }
        RepDescriptor::Factor { index, rep } => match &group.structure {
            Structure::Product { left, right } => {
                let r = right.order;
                match index {
                    0 => Ok(rep_matrices(left, rep)?.into_iter().flat_map(|m| vec![m; r]).collect()),
                    1 => {
                        let mats = rep_matrices(right, rep)?;
                        Ok((0..n).map(|g| mats[g % r].clone()).collect())
                    }
                    _ => Err(incompatible("factor index other than 0 or 1")),
                }
            }
            _ => Err(incompatible("factor pullback")),
        },
        RepDescriptor::Explicit(rows) => {
            if rows.len() != n {
                return Err(Error::IncompatibleRepresentation(format!(
                    "{} explicit matrices for a group of order {n}",
                    rows.len()
                )));
            }
            rows.iter()
                .map(|m| {
                    let dim = m.len();
                    if dim == 0 || m.iter().any(|r| r.len() != dim) {
                        return Err(incompatible("ragged explicit matrix"));
                    }
                    Ok(DMatrix::from_row_iterator(dim, dim, m.iter().flatten().cloned()))
                })
                .collect()
        }
    }
}

/// Convenience: the reflection `x_1 -> -x_1` of `R^dim` as a representation
/// of `C_2`.
pub fn first_coordinate_reflection(dim: usize) -> Result<Representation> {
    let group = build_group(&GroupDescriptor::Cyclic(2))?;
    let mut flip = DMatrix::identity(dim, dim);
    flip[(0, 0)] = -1.0;
    Representation::from_matrices(&group, vec![DMatrix::identity(dim, dim), flip])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(d: GroupDescriptor) -> Arc<FiniteGroup> {
        build_group(&d).unwrap()
    }

    #[test]
    fn orders() {
        assert_eq!(group(GroupDescriptor::Cyclic(1)).order(), 1);
        assert_eq!(group(GroupDescriptor::Symmetric(3)).order(), 6);
        assert_eq!(group(GroupDescriptor::Symmetric(4)).order(), 24);
        assert_eq!(group(GroupDescriptor::Dihedral(4)).order(), 8);
        assert_eq!(group(GroupDescriptor::So2Quadrature(64)).order(), 64);
        let p = GroupDescriptor::Product(
            Box::new(GroupDescriptor::Cyclic(2)),
            Box::new(GroupDescriptor::Symmetric(3)),
        );
        assert_eq!(group(p).order(), 12);
    }

    #[test]
    fn trivial_group_is_identity_only() {
        let g = group(GroupDescriptor::Cyclic(1));
        assert_eq!(g.compose(0, 0), 0);
        assert_eq!(g.inverse(0), 0);
        assert_eq!(g.weights(), &[1.0]);
    }

    #[test]
    fn symmetric_three_uniform_weights() {
        let g = group(GroupDescriptor::Symmetric(3));
        assert!(g.weights().iter().all(|&w| (w - 1.0 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn so2_quadrature_composes_by_index_addition() {
        let g = group(GroupDescriptor::So2Quadrature(8));
        let table = g.composition_table();
        for a in 0..8 {
            for b in 0..8 {
                assert_eq!(table[a][b], (a + b) % 8);
            }
        }
        assert_eq!(g.exactness(), Exactness::Quadrature { nodes: 8 });
    }

    #[test]
    fn rejects_oversized_symmetric() {
        assert!(matches!(
            build_group(&GroupDescriptor::Symmetric(8)),
            Err(Error::GroupTooLarge { size: 40320, .. })
        ));
        assert!(build_group(&GroupDescriptor::Symmetric(7)).is_ok());
        assert!(build_group(&GroupDescriptor::Cyclic(0)).is_err());
        assert!(build_group(&GroupDescriptor::So2Quadrature(1)).is_err());
    }

    #[test]
    fn sampled_associativity_on_large_group() {
        // S_7 has 5040 elements and takes the sampled validation path.
        let g = group(GroupDescriptor::Symmetric(7));
        let mut rng = stream_rng(9, 9);
        for _ in 0..1000 {
            let (a, b, c) = (rng.random_range(0..5040), rng.random_range(0..5040), rng.random_range(0..5040));
            assert_eq!(g.compose(g.compose(a, b), c), g.compose(a, g.compose(b, c)));
        }
    }

    #[test]
    fn permutation_rank_roundtrip() {
        for r in 0..120 {
            assert_eq!(rank_permutation(&unrank_permutation(r, 5)), r);
        }
        assert_eq!(unrank_permutation(0, 4), vec![0, 1, 2, 3]);
    }

    #[test]
    fn s3_natural_character() {
        let g = group(GroupDescriptor::Symmetric(3));
        let rep = Representation::build(&g, &RepDescriptor::NaturalPermutation).unwrap();
        let chi = rep.character();
        assert_eq!(chi[0], 3.0);
        // Sorted multiset: three transpositions (1), two 3-cycles (0).
        let mut sorted = chi.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(sorted, vec![3.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
        assert!(rep.is_permutation());
    }

    #[test]
    fn reflection_representation() {
        let rep = first_coordinate_reflection(3).unwrap();
        assert_eq!(rep.character(), vec![3.0, 1.0]);
        let explicit = RepDescriptor::Explicit(vec![
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            vec![vec![-1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        ]);
        let g = group(GroupDescriptor::Cyclic(2));
        assert!(Representation::build(&g, &explicit).is_ok());
    }

    #[test]
    fn c4_rotation_block_has_order_four() {
        let g = group(GroupDescriptor::Cyclic(4));
        let rep = Representation::build(&g, &RepDescriptor::RotationBlock(vec![1])).unwrap();
        for m in rep.matrices() {
            let fourth = m * m * m * m;
            assert!((fourth - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        }
        // element 1 rotates by pi/2
        assert!((rep.matrix(1)[(1, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_character_is_two_cos() {
        let g = group(GroupDescriptor::So2Quadrature(16));
        let rep = Representation::build(&g, &RepDescriptor::RotationBlock(vec![1])).unwrap();
        for (k, chi) in rep.character().into_iter().enumerate() {
            assert!((chi - 2.0 * (TAU * k as f64 / 16.0).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_non_homomorphism_rejected() {
        let g = group(GroupDescriptor::Cyclic(2));
        let bad = RepDescriptor::Explicit(vec![vec![vec![1.0]], vec![vec![0.5]]]);
        assert!(matches!(Representation::build(&g, &bad), Err(Error::NotHomomorphism { .. })));
    }

    #[test]
    fn incompatible_descriptors_rejected() {
        let c3 = group(GroupDescriptor::Cyclic(3));
        assert!(Representation::build(&c3, &RepDescriptor::Sign).is_err());
        let s3 = group(GroupDescriptor::Symmetric(3));
        assert!(Representation::build(&s3, &RepDescriptor::RotationBlock(vec![1])).is_err());
    }

    #[test]
    fn character_inner_products_on_s3() {
        let g = group(GroupDescriptor::Symmetric(3));
        let nat = Representation::build(&g, &RepDescriptor::NaturalPermutation).unwrap();
        let triv = Representation::trivial(&g, 1);
        assert!((character_inner(&triv, &triv).unwrap() - 1.0).abs() < 1e-12);
        assert!((character_inner(&nat, &nat).unwrap() - 2.0).abs() < 1e-12);
        assert!((character_inner(&nat, &triv).unwrap() - 1.0).abs() < 1e-12);
        let sign = Representation::build(&g, &RepDescriptor::Sign).unwrap();
        assert!(character_inner(&sign, &triv).unwrap().abs() < 1e-12);
    }

    #[test]
    fn character_inner_rejects_group_mismatch() {
        let a = Representation::trivial(&group(GroupDescriptor::Cyclic(2)), 1);
        let b = Representation::trivial(&group(GroupDescriptor::Cyclic(3)), 1);
        assert!(matches!(character_inner(&a, &b), Err(Error::GroupMismatch)));
    }

    #[test]
    fn every_builtin_rep_is_valid() {
        let cases = [
            (GroupDescriptor::Cyclic(5), RepDescriptor::NaturalPermutation),
            (GroupDescriptor::Dihedral(4), RepDescriptor::NaturalPermutation),
            (GroupDescriptor::Dihedral(5), RepDescriptor::RotationBlock(vec![1, 2])),
            (GroupDescriptor::Symmetric(4), RepDescriptor::Sign),
            (
                GroupDescriptor::Product(
                    Box::new(GroupDescriptor::Cyclic(2)),
                    Box::new(GroupDescriptor::Cyclic(3)),
                ),
                RepDescriptor::NaturalPermutation,
            ),
            (
                GroupDescriptor::Product(
                    Box::new(GroupDescriptor::Cyclic(2)),
                    Box::new(GroupDescriptor::Symmetric(3)),
                ),
                RepDescriptor::Factor { index: 1, rep: Box::new(RepDescriptor::NaturalPermutation) },
            ),
            (
                GroupDescriptor::So2Quadrature(64),
                RepDescriptor::DirectSum(vec![RepDescriptor::RotationBlock(vec![1, 3]), RepDescriptor::Trivial(1)]),
            ),
        ];
        for (gd, rd) in cases {
            let g = group(gd);
            let rep = Representation::build(&g, &rd).unwrap();
            let inner = character_inner(&rep, &rep).unwrap();
            assert!((inner - inner.round()).abs() < 1e-8, "{rd:?}: {inner}");
            assert!(inner >= 1.0 - 1e-8);
        }
    }
}
