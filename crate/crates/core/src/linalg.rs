//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Moore-Penrose pseudo-inverse via SVD.
///
/// Singular values below `eps * max(rows, cols) * sigma_max` are treated as
/// zero.
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    try_pinv(m).expect("SVD did not converge")
}

/// [`pinv`] that reports SVD non-convergence as `None`.
pub fn try_pinv(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (rows, cols) = m.shape();
    let svd = m.clone().try_svd(true, true, f64::EPSILON, 10_000)?;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = f64::EPSILON * rows.max(cols) as f64 * sigma_max;

    let mut out = DMatrix::zeros(cols, rows);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            // out += v_i u_i^T / s
            let v_i = v_t.row(i).transpose();
            let u_i = u.column(i);
            out.ger(1.0 / s, &v_i, &u_i, 1.0);
        }
    }
    Some(out)
}

/// Solves `A x = B` for symmetric positive-definite `A` by Cholesky.
///
/// On failure adds `1e-12 * trace(A) / n * I` to the diagonal, up to three
/// times, before giving up with a condition-number estimate.
pub fn spd_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if b.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.nrows() });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Factorization { condition: f64::INFINITY });
    }
    let jitter = 1e-12 * a.trace().abs().max(f64::MIN_POSITIVE) / n.max(1) as f64;
    let mut work = a.clone();
    for attempt in 0..=3 {
        if attempt > 0 {
            for i in 0..n {
                work[(i, i)] += jitter;
            }
        }
        if let Some(chol) = work.clone().cholesky() {
            return Ok(chol.solve(b));
        }
    }
    Err(Error::Factorization { condition: condition_estimate(a) })
}

pub fn spd_solve_vec(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let rhs = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    Ok(spd_solve(a, &rhs)?.column(0).into_owned())
}

/// Ratio of extreme absolute eigenvalues of a symmetric matrix.
pub fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    let eig = symmetric_eigenvalues(a);
    let max = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let min = eig.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> DVector<f64> {
    let sym = (a + a.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
}

/// Orthonormal basis (as columns) of the column space of a full-rank
/// `d x n` matrix, `n <= d`.
pub fn orthonormal_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().qr().q()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// `max |a - b|` entrywise.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
