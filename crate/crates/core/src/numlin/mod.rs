//! Dense linear-algebra kernels: least squares, nullspace bases, projections
//! and condition numbers.
//!
//! Every kernel is a pure, deterministic function of its input. Numerical rank
//! is decided by [`Scalar::rank_tol`] relative to the largest singular value.

mod eigen;
mod matrix;
mod svd;

pub use eigen::SymmetricEigen;
pub use matrix::{add, dist2, dot, max_abs, norm2, scale, sub, DenseMatrix};
pub use svd::Svd;

use crate::error::{check_dim, domain, Result};
use crate::scalar::Scalar;

/// Minimum-norm least-squares solution of `A x ≈ b` (pseudo-inverse semantics).
pub fn least_squares<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    check_dim("least_squares", a.rows(), b.len())?;
    let svd = Svd::new(a);
    let r = svd.rank();
    let mut x = vec![T::zero(); a.cols()];
    for k in 0..r {
        let coef = (0..a.rows()).map(|i| svd.u[(i, k)] * b[i]).sum::<T>() / svd.s[k];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += svd.v[(j, k)] * coef;
        }
    }
    Ok(x)
}

/// `‖A x − b‖₂` for the least-squares `x`.
pub fn least_squares_residual<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Result<(Vec<T>, T)> {
    let x = least_squares(a, b)?;
    let r = dist2(&a.matvec(&x)?, b);
    Ok((x, r))
}

pub fn rank<T: Scalar>(a: &DenseMatrix<T>) -> usize {
    Svd::new(a).rank()
}

/// Orthonormal basis of the column span of `A`, as the columns of a
/// `rows × rank` matrix.
pub fn orthonormal_col_basis<T: Scalar>(a: &DenseMatrix<T>) -> DenseMatrix<T> {
    let svd = Svd::new(a);
    let r = svd.rank();
    DenseMatrix::from_fn(a.rows(), r, |i, j| svd.u[(i, j)])
}

/// Rows of the returned `X` are an orthonormal basis of the orthogonal
/// complement of the column span of `A`, so `X A = 0` and `X Xᵀ = I`.
///
/// A full-row-rank `A` yields a `0 × rows` matrix.
pub fn nullspace_basis<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if a.rows() == 0 {
        return domain("nullspace_basis needs at least one row");
    }
    let basis = orthonormal_col_basis(a);
    Ok(orthogonal_complement(&basis).transpose())
}

/// Completes the orthonormal columns of `q` (`m × r`) to an orthonormal basis
/// of `R^m` with Householder reflections, returning the `m × (m − r)` remainder.
fn orthogonal_complement<T: Scalar>(q: &DenseMatrix<T>) -> DenseMatrix<T> {
    let m = q.rows();
    let r = q.cols();
    let mut work = q.clone();
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(r);

    for j in 0..r {
        let x: Vec<T> = (j..m).map(|i| work[(i, j)]).collect();
        let alpha = norm2(&x);
        let mut v = x;
        let sign = if v[0] >= T::zero() { T::one() } else { -T::one() };
        v[0] += sign * alpha;
        let vnorm = norm2(&v);
        if vnorm > T::zero() {
            v.iter_mut().for_each(|e| *e /= vnorm);
            for c in j..r {
                let d: T = (j..m).map(|i| v[i - j] * work[(i, c)]).sum();
                for i in j..m {
                    work[(i, c)] -= (T::one() + T::one()) * v[i - j] * d;
                }
            }
        }
        reflectors.push(v);
    }

    // Q = H_0 H_1 ... H_{r-1}; its trailing columns are Q e_k for k >= r.
    let mut out = DenseMatrix::zeros(m, m - r);
    for (c, k) in (r..m).enumerate() {
        let mut e = vec![T::zero(); m];
        e[k] = T::one();
        for (j, v) in reflectors.iter().enumerate().rev() {
            let d: T = (j..m).map(|i| v[i - j] * e[i]).sum();
            for i in j..m {
                e[i] -= (T::one() + T::one()) * v[i - j] * d;
            }
        }
        for i in 0..m {
            out[(i, c)] = e[i];
        }
    }
    out
}

/// Orthogonal projection of `v` onto the column span of `A`.
pub fn project_col_span<T: Scalar>(a: &DenseMatrix<T>, v: &[T]) -> Result<Vec<T>> {
    check_dim("project_col_span", a.rows(), v.len())?;
    let basis = orthonormal_col_basis(a);
    let coords = basis.tr_matvec(v)?;
    basis.matvec(&coords)
}

/// `σ_max / σ_min` over the non-zero singular values.
pub fn condition_number<T: Scalar>(a: &DenseMatrix<T>) -> Result<T> {
    let svd = Svd::new(a);
    let r = svd.rank();
    if r == 0 {
        return domain("condition number of an all-zero matrix");
    }
    Ok(svd.s[0] / svd.s[r - 1])
}

/// Smallest non-zero singular value.
pub fn sigma_min_nonzero<T: Scalar>(a: &DenseMatrix<T>) -> Result<T> {
    let svd = Svd::new(a);
    let r = svd.rank();
    if r == 0 {
        return domain("all-zero matrix has no non-zero singular value");
    }
    Ok(svd.s[r - 1])
}
