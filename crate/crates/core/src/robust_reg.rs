//! Robust regression: fit `A x ≈ b` while ignoring `k` rows, by reduction to
//! sparse regression over the orthogonal complement of the column span.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{check_dim, domain, Error, Result};
use crate::numlin::{least_squares, nullspace_basis, rank, DenseMatrix};
use crate::scalar::Scalar;
use crate::sparse_reg::{binomial, solve_sparse_regression, SparseRegInstance, SparseRegOptions};

/// Largest number of masks the brute-force decision procedure will enumerate.
pub const DEFAULT_MASK_CAP: u128 = 20_000_000;

/// Decision slack added to `delta`.
pub const DECISION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RobustInstance<T> {
    pub a: DenseMatrix<T>,
    pub b: Vec<T>,
    /// Number of rows to ignore.
    pub k: usize,
    pub eps: T,
    /// Threshold of the decision version.
    pub delta: T,
}

impl<T: Scalar> RobustInstance<T> {
    pub fn new(a: DenseMatrix<T>, b: Vec<T>, k: usize) -> Result<Self> {
        let inst = Self {
            a,
            b,
            k,
            eps: T::lit(0.1),
            delta: T::zero(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_eps(mut self, eps: T) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn validate(&self) -> Result<()> {
        check_dim("RobustInstance b", self.a.rows(), self.b.len())?;
        if self.k > self.a.rows() {
            return domain(format!("cannot ignore {} of {} rows", self.k, self.a.rows()));
        }
        if !(self.eps > T::zero()) {
            return domain(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.delta >= T::zero()) {
            return domain(format!("delta must be nonnegative, got {}", self.delta));
        }
        if self.b.iter().any(|x| !x.is_finite()) {
            return domain("b has non-finite entries");
        }
        Ok(())
    }
}

/// A fit together with the rows it keeps.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustSolution<T> {
    /// `true` for kept rows; exactly `k` entries are `false`.
    pub keep_mask: Vec<bool>,
    pub x: Vec<T>,
    /// `‖S (A x − b)‖₂`.
    pub residual: T,
}

impl<T: Scalar> RobustSolution<T> {
    pub fn new(a: &DenseMatrix<T>, b: &[T], keep_mask: Vec<bool>, x: Vec<T>) -> Result<Self> {
        let residual = masked_residual(a, b, &keep_mask, &x)?;
        Ok(Self { keep_mask, x, residual })
    }

    /// Least squares on the kept rows.
    pub fn fit(a: &DenseMatrix<T>, b: &[T], keep_mask: Vec<bool>) -> Result<Self> {
        check_dim("keep mask", a.rows(), keep_mask.len())?;
        let kept: Vec<usize> = (0..a.rows()).filter(|&i| keep_mask[i]).collect();
        let x = if kept.is_empty() {
            vec![T::zero(); a.cols()]
        } else {
            let bk: Vec<T> = kept.iter().map(|&i| b[i]).collect();
            least_squares(&a.select_rows(&kept), &bk)?
        };
        Self::new(a, b, keep_mask, x)
    }

    pub fn ignored(&self) -> Vec<usize> {
        (0..self.keep_mask.len()).filter(|&i| !self.keep_mask[i]).collect()
    }
}

pub fn masked_residual<T: Scalar>(a: &DenseMatrix<T>, b: &[T], keep_mask: &[bool], x: &[T]) -> Result<T> {
    check_dim("keep mask", a.rows(), keep_mask.len())?;
    check_dim("masked_residual b", a.rows(), b.len())?;
    let ax = a.matvec(x)?;
    Ok(ax
        .iter()
        .zip(b)
        .zip(keep_mask)
        .filter(|(_, &keep)| keep)
        .map(|((&p, &q), _)| (p - q) * (p - q))
        .sum::<T>()
        .sqrt())
}

/// Mask with `false` exactly at `ignored`.
pub fn mask_from_ignored(n: usize, ignored: &[usize]) -> Vec<bool> {
    let mut mask = vec![true; n];
    for &i in ignored {
        mask[i] = false;
    }
    mask
}

/// The sparse instance `(X, c = −X b, k)` with `X A = 0` and orthonormal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction<T> {
    pub x: DenseMatrix<T>,
    pub c: Vec<T>,
    pub sparse: SparseRegInstance<T>,
}

pub fn reduce_to_sparse<T: Scalar>(inst: &RobustInstance<T>) -> Result<Reduction<T>> {
    inst.validate()?;
    if inst.k == 0 {
        return domain("the sparse reduction needs k >= 1");
    }
    if rank(&inst.a) >= inst.n() {
        return Err(Error::SpansEverything);
    }
    let x = nullspace_basis(&inst.a)?;
    let c: Vec<T> = x.matvec(&inst.b)?.into_iter().map(|v| -v).collect();
    let sparse = SparseRegInstance::new(x.clone(), c.clone(), inst.k, inst.eps)?;
    Ok(Reduction { x, c, sparse })
}

/// Robust regression through the sparse reduction.
///
/// The sparse solver returns `z ≈ −e` for the corruption vector `e`; rows in
/// the support of `z` are ignored (padded to exactly `k` at the lowest unused
/// indices) and `x` is refit on the kept rows.
pub fn solve_robust_regression<T: Scalar>(
    inst: &RobustInstance<T>,
    opts: &SparseRegOptions,
    seed: u64,
) -> Result<RobustSolution<T>> {
    inst.validate()?;
    let n = inst.n();
    if inst.k == 0 {
        return RobustSolution::fit(&inst.a, &inst.b, vec![true; n]);
    }
    let red = match reduce_to_sparse(inst) {
        Err(Error::SpansEverything) => {
            let x = least_squares(&inst.a, &inst.b)?;
            let ignored: Vec<usize> = (0..inst.k).collect();
            return RobustSolution::new(&inst.a, &inst.b, mask_from_ignored(n, &ignored), x);
        }
        other => other?,
    };
    let z = solve_sparse_regression(&red.sparse, opts, seed)?.z;
    let mut ignored: Vec<usize> = z.support().to_vec();
    for i in 0..n {
        if ignored.len() >= inst.k {
            break;
        }
        if !ignored.contains(&i) {
            ignored.push(i);
        }
    }
    ignored.sort_unstable();
    RobustSolution::fit(&inst.a, &inst.b, mask_from_ignored(n, &ignored))
}

/// Yes iff some mask with exactly `k` zeros has least-squares residual at
/// most `delta + 1e-9`.
pub fn robust_decision<T: Scalar>(inst: &RobustInstance<T>, cap: u128) -> Result<bool> {
    inst.validate()?;
    let n = inst.n();
    let count = binomial(n, inst.k);
    if count > cap {
        return Err(Error::Capacity { predicted: count, cap });
    }
    let threshold = inst.delta + T::lit(DECISION_SLACK);
    let sets: Vec<Vec<usize>> = (0..n).combinations(inst.k).collect();
    sets.par_iter()
        .map(|s| RobustSolution::fit(&inst.a, &inst.b, mask_from_ignored(n, s)).map(|f| f.residual <= threshold))
        .try_fold(|| false, |acc, r| r.map(|yes| acc || yes))
        .try_reduce(|| false, |p, q| Ok(p || q))
}
