//! Seeded instance generators. Every generator draws from a `ChaCha8Rng`
//! seeded with the given `u64`, so equal seeds give equal instances.

use itertools::Itertools;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::numlin::DenseMatrix;
use crate::reductions::{ExactCoverInstance, Max3LinInstance, WeightedGraph};
use crate::scalar::Scalar;
use crate::sparse_reg::SparseVector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<T: Scalar>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<T> {
    DenseMatrix::from_fn(rows, cols, |_, _| T::lit(rng.sample(StandardNormal)))
}

fn gaussian_vec<T: Scalar>(len: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..len).map(|_| T::lit(rng.sample(StandardNormal))).collect()
}

fn sorted_sample(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut s = index::sample(rng, n, k).into_vec();
    s.sort_unstable();
    s
}

/// `b = A x` for Gaussian `A` and a `k`-sparse Gaussian `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSparse<T> {
    pub a: DenseMatrix<T>,
    pub b: Vec<T>,
    pub x: SparseVector<T>,
}

pub fn planted_sparse<T: Scalar>(n: usize, d: usize, k: usize, seed: u64) -> Result<PlantedSparse<T>> {
    if k > d {
        return domain("k exceeds d");
    }
    let mut rng = rng(seed);
    let a = gaussian_matrix(n, d, &mut rng);
    let support = sorted_sample(&mut rng, d, k);
    let x = SparseVector::new(d, support, gaussian_vec(k, &mut rng))?;
    let b = x.apply(&a)?;
    Ok(PlantedSparse { a, b, x })
}

/// Gaussian regression `b = A x` with `k` entries shifted by `±magnitude`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptedRegression<T> {
    pub a: DenseMatrix<T>,
    pub b: Vec<T>,
    pub x: Vec<T>,
    /// Sorted corrupted rows.
    pub corrupted: Vec<usize>,
}

pub fn corrupted_regression<T: Scalar>(
    n: usize,
    d: usize,
    k: usize,
    magnitude: T,
    seed: u64,
) -> Result<CorruptedRegression<T>> {
    if k > n {
        return domain("k exceeds n");
    }
    let mut rng = rng(seed);
    let a = gaussian_matrix(n, d, &mut rng);
    let x: Vec<T> = gaussian_vec(d, &mut rng);
    let mut b = a.matvec(&x)?;
    let corrupted = sorted_sample(&mut rng, n, k);
    for &i in &corrupted {
        let sign = if rng.random_bool(0.5) { T::one() } else { -T::one() };
        b[i] += sign * magnitude;
    }
    Ok(CorruptedRegression { a, b, x, corrupted })
}

/// `Gᵀ G` for a Gaussian `r × n` matrix `G`.
pub fn random_psd<T: Scalar>(n: usize, r: usize, seed: u64) -> DenseMatrix<T> {
    let mut rng = rng(seed);
    let g: DenseMatrix<T> = gaussian_matrix(r, n, &mut rng);
    g.transpose().matmul(&g).expect("shapes agree")
}

/// Integer system whose unique `k`-sparse alphabet solution is `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphabetInstance<T> {
    pub a: DenseMatrix<T>,
    pub b: Vec<T>,
    pub x: SparseVector<T>,
    /// Draws rejected for having a second solution.
    pub rejected: usize,
}

/// Number of vectors with at most `k` nonzeros, all in `alphabet`, solving
/// `A z = b` exactly. Stops counting at `limit`.
pub fn count_alphabet_solutions<T: Scalar>(a: &DenseMatrix<T>, b: &[T], k: usize, alphabet: &[T], limit: usize) -> usize {
    let d = a.cols();
    let mut count = 0;
    for s in 0..=k.min(d) {
        for support in (0..d).combinations(s) {
            for vals in (0..s).map(|_| alphabet.iter().copied()).multi_cartesian_product() {
                let hit = (0..a.rows()).all(|i| {
                    support.iter().zip(&vals).fold(T::zero(), |acc, (&j, &v)| acc + a[(i, j)] * v) == b[i]
                });
                if hit {
                    count += 1;
                    if count >= limit {
                        return count;
                    }
                }
            }
        }
    }
    count
}

/// Entries of `A` uniform in `[-range, range]`, `x` with exactly `k` entries
/// drawn from `alphabet`; redrawn until the solution is unique.
pub fn alphabet_instance<T: Scalar>(
    m: usize,
    d: usize,
    k: usize,
    range: i32,
    alphabet: &[i32],
    seed: u64,
) -> Result<AlphabetInstance<T>> {
    if k > d || k == 0 || alphabet.is_empty() || alphabet.contains(&0) {
        return domain("need 0 < k ≤ d and a nonempty alphabet without zero");
    }
    let alpha: Vec<T> = alphabet.iter().map(|&u| T::lit(u as f64)).collect();
    let mut rng = rng(seed);
    for rejected in 0..1000 {
        let a = DenseMatrix::from_fn(m, d, |_, _| T::lit(rng.random_range(-range..=range) as f64));
        let support = sorted_sample(&mut rng, d, k);
        let values = (0..k).map(|_| alpha[rng.random_range(0..alpha.len())]).collect();
        let x = SparseVector::new(d, support, values)?;
        let b = x.apply(&a)?;
        if count_alphabet_solutions(&a, &b, k, &alpha, 2) == 1 {
            return Ok(AlphabetInstance { a, b, x, rejected });
        }
    }
    domain("no instance with a unique solution in 1000 draws")
}

/// Robust-regression instance from the planted LP model: Gaussian `A`,
/// `b = A x + e` with `e` supported on `k` rows with Gaussian values scaled
/// by `magnitude`.
pub fn planted_lp_instance<T: Scalar>(
    n: usize,
    d: usize,
    k: usize,
    magnitude: T,
    seed: u64,
) -> Result<CorruptedRegression<T>> {
    if k > n {
        return domain("k exceeds n");
    }
    let mut rng = rng(seed);
    let a = gaussian_matrix(n, d, &mut rng);
    let x: Vec<T> = gaussian_vec(d, &mut rng);
    let mut b = a.matvec(&x)?;
    let corrupted = sorted_sample(&mut rng, n, k);
    for &i in &corrupted {
        let g: f64 = rng.sample(StandardNormal);
        // Keep corruptions away from zero so the support is well defined.
        b[i] += magnitude * T::lit(g.signum() * (1.0 + g.abs()));
    }
    Ok(CorruptedRegression { a, b, x, corrupted })
}

/// Each edge present with probability `p`, weight uniform in `weights`.
pub fn random_graph(n: usize, p: f64, weights: &[u64], seed: u64) -> Result<WeightedGraph> {
    if weights.is_empty() || !(0.0..=1.0).contains(&p) {
        return domain("need nonempty weights and p in [0, 1]");
    }
    let mut rng = rng(seed);
    let mut g = WeightedGraph::new(n);
    for (u, v) in (0..n).tuple_combinations() {
        if rng.random_bool(p) {
            g.add_edge(u, v, weights[rng.random_range(0..weights.len())])?;
        }
    }
    Ok(g)
}

/// `sets` random nonempty subsets of a `universe`-element ground set.
pub fn random_exact_cover(universe: usize, sets: usize, seed: u64) -> Result<ExactCoverInstance> {
    if universe == 0 {
        return ExactCoverInstance::new(0, vec![Vec::new(); sets]);
    }
    let mut rng = rng(seed);
    let family = (0..sets)
        .map(|_| {
            let size = rng.random_range(1..=universe);
            sorted_sample(&mut rng, universe, size)
        })
        .collect();
    ExactCoverInstance::new(universe, family)
}

/// Random equations over distinct variables with right-hand sides in
/// `[-bound, bound]`.
pub fn random_max3lin(vars: usize, equations: usize, bound: i64, seed: u64) -> Result<Max3LinInstance> {
    if vars < 3 {
        return domain("need at least three variables");
    }
    let mut rng = rng(seed);
    let eqs = (0..equations)
        .map(|_| {
            let s = sorted_sample(&mut rng, vars, 3);
            ([s[0], s[1], s[2]], rng.random_range(-bound..=bound))
        })
        .collect();
    Max3LinInstance::new(vars, eqs, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::norm2;

    #[test]
    fn planted_sparse_is_consistent_and_deterministic() {
        let p = planted_sparse::<f64>(16, 10, 2, 7).unwrap();
        assert_eq!(p.x.nnz(), 2);
        let r: Vec<f64> = p.x.apply(&p.a).unwrap().iter().zip(&p.b).map(|(x, y)| x - y).collect();
        assert!(norm2(&r) < 1e-12);
        assert_eq!(p, planted_sparse(16, 10, 2, 7).unwrap());
        assert_ne!(p.b, planted_sparse::<f64>(16, 10, 2, 8).unwrap().b);
    }

    #[test]
    fn corruptions_have_requested_magnitude() {
        let c = corrupted_regression::<f64>(14, 3, 2, 10.0, 3).unwrap();
        let clean = c.a.matvec(&c.x).unwrap();
        for i in 0..14 {
            let gap = (c.b[i] - clean[i]).abs();
            if c.corrupted.contains(&i) {
                assert!((gap - 10.0).abs() < 1e-12);
            } else {
                assert!(gap < 1e-12);
            }
        }
    }

    #[test]
    fn psd_has_rank_r() {
        let a = random_psd::<f64>(8, 4, 1);
        assert!(a.is_symmetric(1e-12));
        assert_eq!(crate::numlin::rank(&a), 4);
    }

    #[test]
    fn alphabet_solution_is_unique() {
        let inst = alphabet_instance::<f64>(12, 14, 4, 3, &[1], 5).unwrap();
        assert_eq!(count_alphabet_solutions(&inst.a, &inst.b, 4, &[1.0], 10), 1);
        assert!(inst.a.is_integral());
    }

    #[test]
    fn solution_counter_sees_ties() {
        let a = DenseMatrix::from_rows(&[[1.0f64, 1.0]]).unwrap();
        assert_eq!(count_alphabet_solutions(&a, &[1.0], 1, &[1.0], 10), 2);
        assert_eq!(count_alphabet_solutions(&a, &[0.0], 1, &[1.0], 10), 1);
    }

    #[test]
    fn combinatorial_generators() {
        let g = random_graph(6, 1.0, &[1, 2, 3], 0).unwrap();
        assert_eq!(g.edges().len(), 15);
        let e = random_exact_cover(5, 4, 0).unwrap();
        assert_eq!(e.sets.len(), 4);
        let m = random_max3lin(5, 6, 2, 0).unwrap();
        assert_eq!(m.equations.len(), 6);
    }
}
