//! Robust regression on planted Gaussian instances via sparsest vectors in a
//! subspace, found by one ℓ1 linear program per coordinate.

mod simplex;

pub use simplex::{lp_solve, LinearProgram, LpSolution};

use rayon::prelude::*;

use crate::error::{check_dim, domain, Error, Result};
use crate::numlin::{least_squares, least_squares_residual, norm2, orthonormal_col_basis, DenseMatrix};
use crate::robust_reg::RobustSolution;
use crate::scalar::Scalar;
use crate::sparse_reg::SparseVector;

/// Default zero threshold relative to `‖w‖∞`.
pub const DEFAULT_TAU: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance<T> {
    pub a: DenseMatrix<T>,
    pub b: Vec<T>,
    /// Bound on the number of corrupted entries of `b`.
    pub k: usize,
}

impl<T: Scalar> PlantedInstance<T> {
    pub fn new(a: DenseMatrix<T>, b: Vec<T>, k: usize) -> Result<Self> {
        check_dim("planted b", a.rows(), b.len())?;
        if k > a.rows() {
            return domain("k exceeds the number of rows");
        }
        Ok(PlantedInstance { a, b, k })
    }
}

/// Sparse candidate from pinning one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PinnedCandidate<T> {
    pub pin: usize,
    pub w: Vec<T>,
    pub nnz: usize,
}

fn count_above<T: Scalar>(w: &[T], tau: T) -> usize {
    let cut = tau * w.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    w.iter().filter(|x| x.abs() > cut).count()
}

/// `min ‖W a‖₁` subject to `(W a)_pin = 1`, with `w = p − q`, `p, q ≥ 0`.
/// Returns `None` when row `pin` of `W` vanishes.
pub fn pinned_l1<T: Scalar>(w: &DenseMatrix<T>, pin: usize) -> Result<Option<Vec<T>>> {
    let (n, m) = (w.rows(), w.cols());
    if pin >= n {
        return domain("pin outside the ambient dimension");
    }
    if w.row(pin).iter().all(|&x| x.abs() <= T::rank_tol()) {
        return Ok(None);
    }
    // Columns: a (free, m), p (n), q (n).
    let vars = m + 2 * n;
    let mut c = vec![T::zero(); vars];
    c[m..].iter_mut().for_each(|v| *v = T::one());
    let a_eq = DenseMatrix::from_fn(n + 1, vars, |i, j| {
        if i < n {
            if j < m {
                w[(i, j)]
            } else if j == m + i {
                -T::one()
            } else if j == m + n + i {
                T::one()
            } else {
                T::zero()
            }
        } else if j < m {
            w[(pin, j)]
        } else {
            T::zero()
        }
    });
    let mut b_eq = vec![T::zero(); n + 1];
    b_eq[n] = T::one();
    let mut bounds = vec![(None, None); m];
    bounds.resize(vars, (Some(T::zero()), None));
    let lp = LinearProgram::new(c).with_eq(a_eq, b_eq).with_bounds(bounds);
    match lp_solve(&lp) {
        Ok(sol) => {
            let mut v = w.matvec(&sol.x[..m])?;
            v[pin] = T::one();
            Ok(Some(v))
        }
        Err(Error::Infeasible) => Ok(None),
        Err(e) => Err(e),
    }
}

/// All pinned ℓ1 candidates, one per coordinate whose LP is feasible.
pub fn pinned_candidates<T: Scalar>(basis: &DenseMatrix<T>, tau: T) -> Result<Vec<PinnedCandidate<T>>> {
    let found: Vec<Option<PinnedCandidate<T>>> = (0..basis.rows())
        .into_par_iter()
        .map(|pin| {
            pinned_l1(basis, pin).map(|w| {
                w.map(|w| PinnedCandidate {
                    pin,
                    nnz: count_above(&w, tau),
                    w,
                })
            })
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Sparsest element of the column span of `basis`, as a unit vector with
/// entries at or below `tau · ‖w‖∞` dropped. Ties go to the lowest pin.
pub fn sparsest_in_subspace<T: Scalar>(basis: &DenseMatrix<T>, tau: T) -> Result<SparseVector<T>> {
    if basis.cols() == 0 {
        return domain("empty basis");
    }
    let cands = pinned_candidates(basis, tau)?;
    let best = cands
        .iter()
        .min_by_key(|c| (c.nnz, c.pin))
        .ok_or_else(|| Error::RecoveryFailed("every pinned program was infeasible".into()))?;
    let cut = tau * best.w.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let kept: Vec<T> = best.w.iter().map(|&x| if x.abs() > cut { x } else { T::zero() }).collect();
    let norm = norm2(&kept);
    Ok(SparseVector::from_dense(&kept).scaled(T::one() / norm))
}

/// Recover the corrupted rows of a planted instance and fit on the rest.
///
/// The mask zeros exactly the recovered support; `x` is refit by least
/// squares on the kept rows.
pub fn solve_planted_robust<T: Scalar>(inst: &PlantedInstance<T>, tau: T) -> Result<RobustSolution<T>> {
    let n = inst.a.rows();
    let bnorm = norm2(&inst.b);
    let (_, ls) = least_squares_residual(&inst.a, &inst.b)?;
    if ls <= T::lit(1e-10) * bnorm.max(T::one()) {
        return RobustSolution::fit(&inst.a, &inst.b, vec![true; n]);
    }
    let mut cols = vec![inst.b.clone()];
    cols.extend((0..inst.a.cols()).map(|j| inst.a.col(j)));
    let joint = DenseMatrix::from_columns(&cols)?;
    let basis = orthonormal_col_basis(&joint);
    let v = sparsest_in_subspace(&basis, tau)?;
    if v.nnz() > inst.k {
        return Err(Error::RecoveryFailed(format!(
            "sparsest vector has {} entries, bound is {}",
            v.nnz(),
            inst.k
        )));
    }
    // v = β b + A y, so b − v/β lies in the span of A.
    let coef = least_squares(&joint, &v.to_dense())?;
    if coef[0].abs() <= T::rank_tol() {
        return Err(Error::RecoveryFailed("recovered vector lies in the span of A".into()));
    }
    let mut mask = vec![true; n];
    for &i in v.support() {
        mask[i] = false;
    }
    RobustSolution::fit(&inst.a, &inst.b, mask)
}
