//! Greedy and alternating-minimization baselines for robust regression, and
//! the exhaustive oracles used to certify every solver.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{check_dim, domain, Error, Result};
use crate::numlin::{least_squares, least_squares_residual, DenseMatrix, SymmetricEigen};
use crate::reductions::{ExactCoverInstance, WeightedGraph};
use crate::robust_reg::{mask_from_ignored, RobustInstance, RobustSolution};
use crate::scalar::Scalar;
use crate::sparse_pca::PcaSolution;
use crate::sparse_reg::{binomial, SparseVector};

/// Largest enumeration any brute-force oracle accepts by default.
pub const DEFAULT_BRUTE_CAP: u128 = 50_000_000;

fn guard(count: u128, cap: u128) -> Result<()> {
    if count > cap {
        return Err(Error::Capacity { predicted: count, cap });
    }
    Ok(())
}

/// Indices of the `k` largest `|r_i|`, lowest index first among ties;
/// magnitudes below `tol` count as zero.
fn largest_k<T: Scalar>(r: &[T], k: usize, tol: T) -> Vec<usize> {
    let mags: Vec<T> = r.iter().map(|&x| if x.abs() <= tol { T::zero() } else { x.abs() }).collect();
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by(|&i, &j| mags[j].partial_cmp(&mags[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    let mut chosen: Vec<usize> = order.into_iter().take(k).collect();
    chosen.sort_unstable();
    chosen
}

fn residual_vector<T: Scalar>(a: &DenseMatrix<T>, b: &[T], x: &[T]) -> Result<Vec<T>> {
    Ok(a.matvec(x)?.into_iter().zip(b).map(|(p, &q)| p - q).collect())
}

fn noise_floor<T: Scalar>(b: &[T]) -> T {
    let scale = b.iter().fold(T::one(), |m, &x| m.max(x.abs()));
    T::lit(1e-10) * scale
}

/// Fit on all rows, then drop the `k` rows with the largest residuals. The
/// returned `x` is the all-rows fit.
pub fn greedy_robust<T: Scalar>(inst: &RobustInstance<T>) -> Result<RobustSolution<T>> {
    inst.validate()?;
    if inst.k >= inst.n() {
        return domain("greedy needs k < n");
    }
    let y = least_squares(&inst.a, &inst.b)?;
    let r = residual_vector(&inst.a, &inst.b, &y)?;
    let drop = largest_k(&r, inst.k, noise_floor(&inst.b));
    RobustSolution::new(&inst.a, &inst.b, mask_from_ignored(inst.n(), &drop), y)
}

/// Greedy's mask with `x` refit on the kept rows.
pub fn greedy_robust_refit<T: Scalar>(inst: &RobustInstance<T>) -> Result<RobustSolution<T>> {
    let g = greedy_robust(inst)?;
    RobustSolution::fit(&inst.a, &inst.b, g.keep_mask)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep<T> {
    pub keep_mask: Vec<bool>,
    pub x: Vec<T>,
    pub loss: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineTrace<T> {
    pub iterations: Vec<TraceStep<T>>,
    /// The last re-selected mask equals the one it was fit on.
    pub converged: bool,
    pub final_solution: RobustSolution<T>,
}

/// Alternate least squares on the kept rows with re-selection of the `k`
/// largest residuals over all rows, for at most `max_iter` fits.
pub fn altmin_robust<T: Scalar>(
    inst: &RobustInstance<T>,
    init_mask: &[bool],
    max_iter: usize,
) -> Result<BaselineTrace<T>> {
    inst.validate()?;
    check_dim("altmin init mask", inst.n(), init_mask.len())?;
    if init_mask.iter().filter(|&&m| !m).count() != inst.k {
        return domain(format!("initial mask must ignore exactly {} rows", inst.k));
    }
    if max_iter == 0 {
        return domain("altmin needs at least one iteration");
    }
    let tol = noise_floor(&inst.b);
    let mut mask = init_mask.to_vec();
    let mut iterations = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let fit = RobustSolution::fit(&inst.a, &inst.b, mask.clone())?;
        let r = residual_vector(&inst.a, &inst.b, &fit.x)?;
        let next = mask_from_ignored(inst.n(), &largest_k(&r, inst.k, tol));
        iterations.push(TraceStep {
            keep_mask: fit.keep_mask,
            x: fit.x,
            loss: fit.residual,
        });
        if next == mask {
            converged = true;
            break;
        }
        mask = next;
    }
    let last = iterations.last().expect("at least one iteration");
    let final_solution = RobustSolution {
        keep_mask: last.keep_mask.clone(),
        x: last.x.clone(),
        residual: last.loss,
    };
    Ok(BaselineTrace {
        iterations,
        converged,
        final_solution,
    })
}

/// Exhaustive sparse regression over supports of size `min(k, d)`; ties go
/// to the lexicographically first support.
pub fn brute_sparse_reg<T: Scalar>(a: &DenseMatrix<T>, b: &[T], k: usize, cap: u128) -> Result<(SparseVector<T>, T)> {
    check_dim("brute_sparse_reg b", a.rows(), b.len())?;
    let d = a.cols();
    let size = k.min(d);
    guard(binomial(d, size), cap)?;
    if size == 0 {
        return Ok((SparseVector::zeros(d), b.iter().map(|&x| x * x).sum::<T>().sqrt()));
    }
    let supports: Vec<Vec<usize>> = (0..d).combinations(size).collect();
    let fits: Vec<(Vec<T>, T)> = supports
        .par_iter()
        .map(|s| least_squares_residual(&a.select_columns(s), b))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, f) in fits.iter().enumerate() {
        if f.1 < fits[best].1 {
            best = i;
        }
    }
    let mut dense = vec![T::zero(); d];
    for (&j, &v) in supports[best].iter().zip(&fits[best].0) {
        dense[j] = v;
    }
    Ok((SparseVector::from_dense(&dense), fits[best].1))
}

/// Exhaustive robust regression over all masks with exactly `k` zeros; ties
/// go to the lexicographically first ignored set.
pub fn brute_robust_reg<T: Scalar>(a: &DenseMatrix<T>, b: &[T], k: usize, cap: u128) -> Result<RobustSolution<T>> {
    check_dim("brute_robust_reg b", a.rows(), b.len())?;
    let n = a.rows();
    if k > n {
        return domain(format!("cannot ignore {k} of {n} rows"));
    }
    guard(binomial(n, k), cap)?;
    let sets: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    let fits: Vec<RobustSolution<T>> = sets
        .par_iter()
        .map(|s| RobustSolution::fit(a, b, mask_from_ignored(n, s)))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, f) in fits.iter().enumerate() {
        if f.residual < fits[best].residual {
            best = i;
        }
    }
    Ok(fits.into_iter().nth(best).expect("at least one mask"))
}

/// Exhaustive sparse PCA: the largest top eigenvalue over principal
/// submatrices of size `min(k, n)`, with its eigenvector.
pub fn brute_sparse_pca<T: Scalar>(a: &DenseMatrix<T>, k: usize, cap: u128) -> Result<PcaSolution<T>> {
    check_dim("brute_sparse_pca square", a.rows(), a.cols())?;
    let n = a.rows();
    let size = k.min(n);
    guard(binomial(n, size), cap)?;
    if size == 0 {
        return Ok(PcaSolution::new(a, SparseVector::zeros(n)));
    }
    let supports: Vec<Vec<usize>> = (0..n).combinations(size).collect();
    let tops: Vec<(T, Vec<T>)> = supports
        .par_iter()
        .map(|s| {
            let eig = SymmetricEigen::new(&a.principal(s));
            (eig.max_value(), eig.top_vector())
        })
        .collect();
    let mut best = 0;
    for (i, t) in tops.iter().enumerate() {
        if t.0 > tops[best].0 {
            best = i;
        }
    }
    let mut dense = vec![T::zero(); n];
    for (&j, &v) in supports[best].iter().zip(&tops[best].1) {
        dense[j] = v;
    }
    Ok(PcaSolution::new(a, SparseVector::from_dense(&dense)))
}

/// Does some subcollection cover every element exactly once?
pub fn brute_exact_cover(inst: &ExactCoverInstance) -> Result<bool> {
    let m = inst.sets.len();
    if m > 30 {
        return Err(Error::Capacity {
            predicted: 1u128 << m,
            cap: 1 << 30,
        });
    }
    let masks: Vec<u64> = inst
        .sets
        .iter()
        .map(|s| s.iter().fold(0u64, |acc, &e| acc | (1 << e)))
        .collect();
    if inst.universe > 64 {
        return domain("exact cover oracle supports universes of at most 64 elements");
    }
    let full = if inst.universe == 64 { u64::MAX } else { (1u64 << inst.universe) - 1 };
    Ok((0u64..1 << m).into_par_iter().any(|pick| {
        let mut covered = 0u64;
        for (i, &s) in masks.iter().enumerate() {
            if pick >> i & 1 == 1 {
                if covered & s != 0 {
                    return false;
                }
                covered |= s;
            }
        }
        covered == full
    }))
}

/// Which `k`-vertex sets count as candidate cliques.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliqueScope {
    Any,
    /// Exactly one vertex in each of the `k` consecutive blocks.
    OnePerBlock,
}

/// Minimum total edge weight over `k`-cliques in scope, or `None`.
pub fn brute_min_weight_clique(g: &WeightedGraph, k: usize, scope: CliqueScope) -> Result<Option<u64>> {
    let n = g.vertex_count();
    if scope == CliqueScope::OnePerBlock && (k == 0 || n % k != 0) {
        return domain(format!("{n} vertices cannot be cut into {k} equal blocks"));
    }
    let mut best: Option<u64> = None;
    'sets: for set in (0..n).combinations(k) {
        if scope == CliqueScope::OnePerBlock && set.iter().enumerate().any(|(i, &v)| g.block_of(v, k) != i) {
            continue;
        }
        let mut total = 0;
        for (p, &u) in set.iter().enumerate() {
            for &v in &set[p + 1..] {
                match g.weight(u, v) {
                    Some(w) => total += w,
                    None => continue 'sets,
                }
            }
        }
        best = Some(best.map_or(total, |b: u64| b.min(total)));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::norm2;

    fn counterexample() -> RobustInstance<f64> {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]]).unwrap();
        RobustInstance::new(a, vec![10.0, 0.0, 0.0, 0.0], 1).unwrap()
    }

    #[test]
    fn greedy_drops_the_wrong_point() {
        let inst = counterexample();
        let g = greedy_robust(&inst).unwrap();
        assert_eq!(g.ignored(), vec![1]);
        assert!((g.x[0] - 7.0).abs() < 1e-9 && (g.x[1] + 3.0).abs() < 1e-9);
        // Residuals of y = 7 − 3x at x = 0, 2, 3 are −3, 1, −2.
        assert!((g.residual - 14f64.sqrt()).abs() < 1e-9);
        let refit = greedy_robust_refit(&inst).unwrap();
        assert!(refit.residual <= g.residual);
        assert!(refit.residual > 1.0);
    }

    #[test]
    fn greedy_on_collinear_points_breaks_ties_low() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]]).unwrap();
        let b = vec![1.0, 3.0, 5.0, 7.0];
        let g = greedy_robust(&RobustInstance::new(a, b, 1).unwrap()).unwrap();
        assert_eq!(g.ignored(), vec![0]);
        assert!(g.residual < 1e-9);
    }

    #[test]
    fn altmin_traps() {
        let inst = counterexample();
        for (init, expect) in [(1, 1), (2, 1), (3, 3)] {
            let trace = altmin_robust(&inst, &mask_from_ignored(4, &[init]), 5).unwrap();
            assert!(trace.converged);
            assert_eq!(trace.final_solution.ignored(), vec![expect]);
            assert!(trace.final_solution.residual > 0.0);
        }
        let first = altmin_robust(&inst, &mask_from_ignored(4, &[1]), 5).unwrap();
        let x = &first.iterations[0].x;
        assert!((x[0] - 9.285714285714).abs() < 1e-9);
        assert!((x[1] + 3.571428571429).abs() < 1e-9);
    }

    #[test]
    fn altmin_on_consistent_system() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]).unwrap();
        let b = a.matvec(&[2.0, -1.0]).unwrap();
        let trace = altmin_robust(&RobustInstance::new(a, b, 1).unwrap(), &[true, false, true], 5).unwrap();
        assert!(trace.iterations[0].loss < 1e-12);
    }

    #[test]
    fn brute_sparse_on_identity() {
        let a = DenseMatrix::<f64>::identity(5);
        let b = [0.5, -3.0, 1.0, 2.0, 0.1];
        let (z, r) = brute_sparse_reg(&a, &b, 2, DEFAULT_BRUTE_CAP).unwrap();
        assert_eq!(z.support(), &[1, 3]);
        assert!((r - norm2(&[0.5, 1.0, 0.1])).abs() < 1e-12);
        let (z0, r0) = brute_sparse_reg(&a, &[0.0; 5], 2, DEFAULT_BRUTE_CAP).unwrap();
        assert_eq!((z0.nnz(), r0), (0, 0.0));
    }

    #[test]
    fn brute_robust_counterexample_and_zero_k() {
        let inst = counterexample();
        let best = brute_robust_reg(&inst.a, &inst.b, 1, DEFAULT_BRUTE_CAP).unwrap();
        assert_eq!(best.ignored(), vec![0]);
        assert!(best.residual < 1e-12);
        let none = brute_robust_reg(&inst.a, &inst.b, 0, DEFAULT_BRUTE_CAP).unwrap();
        let (_, ls) = least_squares_residual(&inst.a, &inst.b).unwrap();
        assert!((none.residual - ls).abs() < 1e-12);
    }

    #[test]
    fn brute_pca_on_diagonal_and_full_support() {
        let a = DenseMatrix::from_diag(&[1.0f64, 5.0, 3.0, 0.5]);
        let sol = brute_sparse_pca(&a, 2, DEFAULT_BRUTE_CAP).unwrap();
        assert_eq!(sol.value, 5.0);
        let all = brute_sparse_pca(&a, 4, DEFAULT_BRUTE_CAP).unwrap();
        assert!((all.value - 5.0).abs() < 1e-12);
        assert!((all.norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_cover_small() {
        assert!(brute_exact_cover(&ExactCoverInstance::new(2, vec![vec![0], vec![1]]).unwrap()).unwrap());
        assert!(!brute_exact_cover(&ExactCoverInstance::new(2, vec![vec![0]]).unwrap()).unwrap());
        assert!(brute_exact_cover(&ExactCoverInstance::new(0, vec![vec![]]).unwrap()).unwrap());
    }

    #[test]
    fn clique_oracle() {
        let tri = WeightedGraph::from_edges(3, &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]).unwrap();
        assert_eq!(brute_min_weight_clique(&tri, 3, CliqueScope::Any).unwrap(), Some(3));
        assert_eq!(brute_min_weight_clique(&tri, 3, CliqueScope::OnePerBlock).unwrap(), Some(3));
        assert_eq!(brute_min_weight_clique(&WeightedGraph::new(3), 3, CliqueScope::Any).unwrap(), None);
        // Triangle {0, 1, 2} sits in blocks 0, 0, 1 of a 6-vertex graph.
        let g = WeightedGraph::from_edges(6, &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]).unwrap();
        assert_eq!(brute_min_weight_clique(&g, 3, CliqueScope::Any).unwrap(), Some(3));
        assert_eq!(brute_min_weight_clique(&g, 3, CliqueScope::OnePerBlock).unwrap(), None);
    }

    #[test]
    fn oversized_enumerations_are_refused() {
        let a = DenseMatrix::<f64>::zeros(60, 60);
        assert!(matches!(brute_sparse_reg(&a, &[0.0; 60], 10, 1000), Err(Error::Capacity { .. })));
    }
}
