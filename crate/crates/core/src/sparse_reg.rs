//! Sparse regression by meet-in-the-middle: nets over the images of half
//! supports, paired through a nearest-neighbour index, plus the exact
//! finite-alphabet variant keyed by a hash table.

use std::cmp::Ordering;

use itertools::Itertools;
use rayon::prelude::*;

use crate::ann::{build_exact_table, build_index, AnnBackend, AnnConfig};
use crate::error::{check_dim, domain, Error, Result};
use crate::nets::{image_net, NetEntry, NetSpec, DEFAULT_NET_CAP};
use crate::numlin::{dist2, norm2, DenseMatrix, Svd};
use crate::scalar::Scalar;

/// A vector stored by its nonzero coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector<T> {
    dim: usize,
    support: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseVector<T> {
    pub fn new(dim: usize, support: Vec<usize>, values: Vec<T>) -> Result<Self> {
        check_dim("SparseVector values", support.len(), values.len())?;
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return domain("sparse support must be strictly increasing");
        }
        if support.last().is_some_and(|&j| j >= dim) {
            return domain(format!("support index out of range for dimension {dim}"));
        }
        Ok(Self { dim, support, values })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            support: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Keeps the coordinates that are not exactly zero.
    pub fn from_dense(v: &[T]) -> Self {
        let (support, values) = v
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != T::zero())
            .map(|(i, &x)| (i, x))
            .unzip();
        Self {
            dim: v.len(),
            support,
            values,
        }
    }

    fn from_parts(dim: usize, support: &[usize], values: &[T]) -> Self {
        let mut pairs: Vec<(usize, T)> = support.iter().copied().zip(values.iter().copied()).collect();
        pairs.sort_by_key(|p| p.0);
        Self::from_pairs(dim, pairs)
    }

    fn from_pairs(dim: usize, pairs: Vec<(usize, T)>) -> Self {
        let mut combined: Vec<(usize, T)> = Vec::with_capacity(pairs.len());
        for (j, x) in pairs {
            match combined.last_mut() {
                Some(last) if last.0 == j => last.1 += x,
                _ => combined.push((j, x)),
            }
        }
        let (support, values) = combined.into_iter().filter(|p| p.1 != T::zero()).unzip();
        Self { dim, support, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.support.len()
    }

    pub fn get(&self, j: usize) -> T {
        match self.support.binary_search(&j) {
            Ok(p) => self.values[p],
            Err(_) => T::zero(),
        }
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut v = vec![T::zero(); self.dim];
        for (&j, &x) in self.support.iter().zip(&self.values) {
            v[j] = x;
        }
        v
    }

    /// Coordinatewise sum; coinciding coordinates add, exact zeros drop out.
    pub fn merge(&self, other: &Self) -> Self {
        let pairs = self
            .support
            .iter()
            .copied()
            .zip(self.values.iter().copied())
            .merge_by(
                other.support.iter().copied().zip(other.values.iter().copied()),
                |a, b| a.0 <= b.0,
            )
            .collect();
        Self::from_pairs(self.dim.max(other.dim), pairs)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::from_pairs(
            self.dim,
            self.support.iter().copied().zip(self.values.iter().map(|&x| x * s)).collect(),
        )
    }

    /// `A z`.
    pub fn apply(&self, a: &DenseMatrix<T>) -> Result<Vec<T>> {
        check_dim("SparseVector::apply", a.cols(), self.dim)?;
        let mut out = vec![T::zero(); a.rows()];
        for (i, o) in out.iter_mut().enumerate() {
            let row = a.row(i);
            for (&j, &x) in self.support.iter().zip(&self.values) {
                *o += row[j] * x;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRegInstance<T> {
    pub a: DenseMatrix<T>,
    pub b: Vec<T>,
    pub k: usize,
    /// Target residual relative to `‖b‖₂`.
    pub eps: T,
    /// ANN approximation factor budgeted by the hashed backend.
    pub c: T,
    /// Radius of the half-support image nets; `None` means `2‖b‖₂`.
    pub net_radius: Option<T>,
}

impl<T: Scalar> SparseRegInstance<T> {
    pub fn new(a: DenseMatrix<T>, b: Vec<T>, k: usize, eps: T) -> Result<Self> {
        let inst = Self {
            a,
            b,
            k,
            eps,
            c: T::one(),
            net_radius: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_c(mut self, c: T) -> Self {
        self.c = c;
        self
    }

    pub fn with_net_radius(mut self, radius: T) -> Self {
        self.net_radius = Some(radius);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_dim("SparseRegInstance b", self.a.rows(), self.b.len())?;
        if self.k == 0 || self.k > self.a.cols() {
            return domain(format!("sparsity k = {} must lie in 1..={}", self.k, self.a.cols()));
        }
        if !(self.eps > T::zero()) {
            return domain(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.c >= T::one()) {
            return domain(format!("ANN factor c must be >= 1, got {}", self.c));
        }
        if let Some(r) = self.net_radius {
            if !(r >= T::zero()) {
                return domain(format!("net radius must be nonnegative, got {r}"));
            }
        }
        if self.b.iter().any(|x| !x.is_finite()) {
            return domain("b has non-finite entries");
        }
        Ok(())
    }

    /// Sizes of the query half and the indexed half.
    pub fn halves(&self) -> (usize, usize) {
        (self.k.div_ceil(2), self.k / 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseRegOptions {
    pub backend: AnnBackend,
    pub net_cap: u128,
    pub tables: usize,
    pub hashes_per_table: usize,
    /// Hash bucket width as a multiple of the net spacing δ.
    pub hash_width_factor: f64,
}

impl Default for SparseRegOptions {
    fn default() -> Self {
        Self {
            backend: AnnBackend::Exact,
            net_cap: DEFAULT_NET_CAP,
            tables: 12,
            hashes_per_table: 4,
            hash_width_factor: 8.0,
        }
    }
}

impl SparseRegOptions {
    pub fn hashed() -> Self {
        Self {
            backend: AnnBackend::Hashed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseRegStats {
    /// Net entries enumerated on the query side, over all half supports.
    pub candidates: usize,
    /// Net entries stored in the index (equal to `candidates` for even k).
    pub indexed: usize,
    /// Covering radius δ of the nets, in the unscaled units of `b`.
    pub net_delta: f64,
    pub net_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRegSolution<T> {
    pub z: SparseVector<T>,
    pub residual: T,
    pub stats: SparseRegStats,
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn half_nets<T: Scalar>(
    a: &DenseMatrix<T>,
    size: usize,
    radius: T,
    delta: T,
    cap: u128,
) -> Result<Vec<NetEntry<T>>> {
    let n = a.rows();
    if size == 0 {
        return Ok(vec![NetEntry {
            image_point: vec![T::zero(); n],
            coeffs: Vec::new(),
            support: Vec::new(),
        }]);
    }
    let per_support = NetSpec::new(size.min(n), radius, delta)?.predicted_count();
    let predicted = per_support.saturating_mul(binomial(a.cols(), size));
    if predicted > cap {
        return Err(Error::Capacity { predicted, cap });
    }
    let supports: Vec<Vec<usize>> = (0..a.cols()).combinations(size).collect();
    let nets: Vec<Vec<NetEntry<T>>> = supports
        .par_iter()
        .map(|s| image_net(a, s, radius, delta, cap))
        .collect::<Result<_>>()?;
    Ok(nets.into_iter().flatten().collect())
}

fn entry_vector<T: Scalar>(dim: usize, e: &NetEntry<T>) -> SparseVector<T> {
    SparseVector::from_parts(dim, &e.support, &e.coeffs)
}

/// Meet-in-the-middle sparse regression.
///
/// Returns the best `k`-sparse candidate `y + ỹ` where `y` ranges over net
/// points of the query half and `ỹ` is the index's answer for `b − A y`; each
/// `y` is also scored alone. The residual is `‖A z − b‖₂`.
pub fn solve_sparse_regression<T: Scalar>(
    inst: &SparseRegInstance<T>,
    opts: &SparseRegOptions,
    seed: u64,
) -> Result<SparseRegSolution<T>> {
    inst.validate()?;
    let d = inst.a.cols();
    let b_norm = norm2(&inst.b);
    let radius = inst.net_radius.unwrap_or(b_norm + b_norm);
    if b_norm == T::zero() {
        return Ok(SparseRegSolution {
            z: SparseVector::zeros(d),
            residual: T::zero(),
            stats: SparseRegStats {
                candidates: 0,
                indexed: 0,
                net_delta: 0.0,
                net_radius: radius.to_f64_lossy(),
            },
        });
    }
    let b: Vec<T> = inst.b.iter().map(|&x| x / b_norm).collect();
    let radius_s = radius / b_norm;
    let c_eff = match opts.backend {
        AnnBackend::Exact => T::one(),
        AnnBackend::Hashed => inst.c,
    };
    let delta = inst.eps / (T::lit(2.0) * c_eff + T::lit(2.0));

    let (k1, k2) = inst.halves();
    let queries = half_nets(&inst.a, k1, radius_s, delta, opts.net_cap)?;
    let table_owned;
    let table: &[NetEntry<T>] = if k1 == k2 {
        &queries
    } else {
        table_owned = half_nets(&inst.a, k2, radius_s, delta, opts.net_cap)?;
        &table_owned
    };

    let cfg = AnnConfig::new(
        c_eff,
        opts.tables,
        opts.hashes_per_table,
        delta * T::lit(opts.hash_width_factor),
        seed,
    )?;
    let index = build_index(
        table
            .iter()
            .enumerate()
            .map(|(i, e)| (e.image_point.clone(), i))
            .collect(),
        opts.backend,
        &cfg,
    )?;

    // (residual², query index, paired table index)
    let best = queries
        .par_iter()
        .enumerate()
        .map(|(qi, e)| {
            let residual_q: Vec<T> = b.iter().zip(&e.image_point).map(|(&x, &y)| x - y).collect();
            let alone = dist2(&residual_q, &vec![T::zero(); residual_q.len()]);
            let hit = index.query(&residual_q).expect("query dimension matches index");
            let paired = hit.distance;
            if paired < alone {
                (paired, qi, Some(*hit.payload))
            } else {
                (alone, qi, None)
            }
        })
        .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal).then(x.1.cmp(&y.1)))
        .expect("query side is never empty");

    let mut z = entry_vector(d, &queries[best.1]);
    if let Some(ti) = best.2 {
        z = z.merge(&entry_vector(d, &table[ti]));
    }
    let z = z.scaled(b_norm);
    let az = z.apply(&inst.a)?;
    let residual = dist2(&az, &inst.b);
    Ok(SparseRegSolution {
        z,
        residual,
        stats: SparseRegStats {
            candidates: queries.len(),
            indexed: table.len(),
            net_delta: (delta * b_norm).to_f64_lossy(),
            net_radius: radius.to_f64_lossy(),
        },
    })
}

/// Which singular-value floor converts a residual bound into a distance
/// bound for recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionMode {
    /// Smallest nonzero singular value of the whole matrix; meaningful when
    /// the columns are independent.
    Global,
    /// Smallest singular value over all column subsets of size `min(2k, d)`.
    Submatrix,
}

/// Lower bound on `‖A w‖₂ / ‖w‖₂` over the vectors the mode covers.
pub fn sigma_floor<T: Scalar>(a: &DenseMatrix<T>, k: usize, mode: ConditionMode) -> Result<T> {
    match mode {
        ConditionMode::Global => {
            let svd = Svd::new(a);
            let r = svd.rank();
            if r < a.cols() {
                return domain("global condition mode needs linearly independent columns");
            }
            Ok(svd.s[r - 1])
        }
        ConditionMode::Submatrix => {
            let size = (2 * k).min(a.cols());
            let floors: Vec<T> = (0..a.cols())
                .combinations(size)
                .collect::<Vec<_>>()
                .par_iter()
                .map(|s| {
                    let svd = Svd::new(&a.select_columns(s));
                    if svd.s.len() < size {
                        T::zero()
                    } else {
                        svd.s[size - 1]
                    }
                })
                .collect();
            let floor = floors.into_iter().fold(T::infinity(), T::min);
            if !(floor > T::zero()) {
                return domain("some 2k columns are linearly dependent; k-sparse solutions are not identifiable");
            }
            Ok(floor)
        }
    }
}

/// Recovery of the planted vector to within `inst.eps` in ℓ₂ distance.
///
/// Runs the solver with the residual target `eps · σ_floor`, which forces
/// `‖z − x‖₂ ≤ eps` because `z − x` is `2k`-sparse.
pub fn recover_sparse_vector<T: Scalar>(
    inst: &SparseRegInstance<T>,
    opts: &SparseRegOptions,
    mode: ConditionMode,
    seed: u64,
) -> Result<SparseRegSolution<T>> {
    inst.validate()?;
    let b_norm = norm2(&inst.b);
    if b_norm == T::zero() {
        return solve_sparse_regression(inst, opts, seed);
    }
    let floor = sigma_floor(&inst.a, inst.k, mode)?;
    let mut tight = inst.clone();
    tight.eps = inst.eps * floor / b_norm;
    solve_sparse_regression(&tight, opts, seed)
}

/// How finite-alphabet vectors are keyed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KeyMode<T> {
    /// Integer `A`, `b` and alphabet; keys are the exact integer images.
    Integer,
    /// Round images to multiples of this unit.
    Quantized(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSolution<T> {
    pub x: SparseVector<T>,
    /// Entries inserted into the hash table on the successful pass.
    pub table_size: usize,
    /// Sparsity of the successful pass (below `k` when `x` has fewer nonzeros).
    pub sparsity: usize,
}

/// Exact recovery of a sparse vector with entries in `{0} ∪ U`.
///
/// Tries sparsity `k` first and then smaller sparsities, returning the first
/// collision (in lexicographic query order) whose merged vector has all
/// entries in `U` and reproduces `b`.
pub fn solve_finite_alphabet<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &[T],
    k: usize,
    alphabet: &[T],
    mode: KeyMode<T>,
) -> Result<FiniteSolution<T>> {
    check_dim("solve_finite_alphabet b", a.rows(), b.len())?;
    if k > a.cols() {
        return domain(format!("sparsity k = {k} exceeds {} columns", a.cols()));
    }
    if alphabet.is_empty() || alphabet.iter().any(|&u| u == T::zero() || !u.is_finite()) {
        return domain("alphabet must be nonempty, finite and exclude zero");
    }
    let q_unit = match mode {
        KeyMode::Integer => {
            if !a.is_integral() || b.iter().chain(alphabet).any(|x| x.fract() != T::zero()) {
                return domain("integer key mode needs integral A, b and alphabet");
            }
            None
        }
        KeyMode::Quantized(q) => Some(q),
    };
    if b.iter().all(|&x| x == T::zero()) {
        return Ok(FiniteSolution {
            x: SparseVector::zeros(a.cols()),
            table_size: 0,
            sparsity: 0,
        });
    }
    for s in (1..=k).rev() {
        if let Some(sol) = finite_pass(a, b, s, alphabet, q_unit)? {
            return Ok(sol);
        }
    }
    Err(Error::NoCollision)
}

fn finite_half<T: Scalar>(a: &DenseMatrix<T>, size: usize, alphabet: &[T]) -> Vec<(Vec<T>, SparseVector<T>)> {
    let d = a.cols();
    if size == 0 {
        return vec![(vec![T::zero(); a.rows()], SparseVector::zeros(d))];
    }
    (0..d)
        .combinations(size)
        .cartesian_product((0..size).map(|_| alphabet.iter().copied()).multi_cartesian_product().collect::<Vec<_>>())
        .map(|(support, w)| {
            let image: Vec<T> = (0..a.rows())
                .map(|i| support.iter().zip(&w).fold(T::zero(), |acc, (&j, &x)| acc + a[(i, j)] * x))
                .collect();
            (image, SparseVector { dim: d, support, values: w })
        })
        .collect()
}

fn finite_pass<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &[T],
    k: usize,
    alphabet: &[T],
    q_unit: Option<T>,
) -> Result<Option<FiniteSolution<T>>> {
    let (k1, k2) = (k.div_ceil(2), k / 2);
    let indexed = finite_half(a, k2, alphabet);
    let table_size = indexed.len();
    let queries = if k1 == k2 { indexed.clone() } else { finite_half(a, k1, alphabet) };
    let table = build_exact_table(indexed, q_unit)?;
    let tol = match q_unit {
        None => T::zero(),
        Some(q) => q * T::from_usize_lossy(a.rows()).sqrt() * T::lit(4.0),
    };

    let found = queries.par_iter().find_map_first(|(image, x1)| {
        let residual: Vec<T> = b.iter().zip(image).map(|(&p, &q)| p - q).collect();
        table.lookup(&residual)?.iter().find_map(|x2| {
            let z = x1.merge(x2);
            if z.nnz() == 0 || !z.values().iter().all(|v| alphabet.contains(v)) {
                return None;
            }
            let az = z.apply(a).ok()?;
            (dist2(&az, b) <= tol).then_some(z)
        })
    });
    Ok(found.map(|x| FiniteSolution {
        x,
        table_size,
        sparsity: k,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    fn dense_dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    #[test]
    fn zero_target_gives_zero_vector() {
        let inst = SparseRegInstance::new(gaussian(6, 4, 1), vec![0.0; 6], 2, 0.1).unwrap();
        let sol = solve_sparse_regression(&inst, &SparseRegOptions::default(), 0).unwrap();
        assert_eq!(sol.z.nnz(), 0);
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn planted_two_sparse_gaussian() {
        let a = gaussian(16, 10, 11);
        let mut x = vec![0.0; 10];
        x[0] = 2.0;
        x[3] = -1.0;
        let b = a.matvec(&x).unwrap();
        let inst = SparseRegInstance::new(a.clone(), b.clone(), 2, 0.1).unwrap();
        let sol = solve_sparse_regression(&inst, &SparseRegOptions::default(), 0).unwrap();
        assert!(sol.z.nnz() <= 2);
        let direct = dense_dist(&a.matvec(&sol.z.to_dense()).unwrap(), &b);
        assert!((direct - sol.residual).abs() < 1e-12);
        assert!(sol.residual <= 0.1 * norm2(&b), "residual {}", sol.residual);
    }

    #[test]
    fn candidate_count_is_supports_times_net() {
        let a = gaussian(12, 10, 5);
        let b = a.matvec(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.5, 0.0, 0.0]).unwrap();
        let inst = SparseRegInstance::new(a, b, 2, 0.2).unwrap();
        let sol = solve_sparse_regression(&inst, &SparseRegOptions::default(), 0).unwrap();
        // One-dimensional lattice of spacing 2δ within radius 2 + δ, in scaled units.
        let delta: f64 = 0.2 / 4.0;
        let h = 2.0 * delta;
        let per_column = 2 * ((2.0 + delta) / h).floor() as usize + 1;
        assert_eq!(sol.stats.candidates, 10 * per_column);
        assert_eq!(sol.stats.indexed, sol.stats.candidates);
    }

    #[test]
    fn identity_recovery_is_within_eps() {
        let a = DenseMatrix::<f64>::identity(5);
        let b = vec![0.0, 1.0, 0.0, 0.0, 0.0];
        let inst = SparseRegInstance::new(a, b.clone(), 2, 0.05).unwrap();
        let sol = recover_sparse_vector(&inst, &SparseRegOptions::default(), ConditionMode::Global, 0)
            .unwrap();
        assert!(dense_dist(&sol.z.to_dense(), &b) <= 0.05);
    }

    #[test]
    fn gaussian_recovery_over_seeds() {
        for seed in 0..50 {
            let a = gaussian(20, 8, 100 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
            let mut x = vec![0.0; 8];
            let i = rng.random_range(0..8);
            let j = (i + rng.random_range(1..8)) % 8;
            x[i] = rng.random_range(0.5..2.0);
            x[j] = -rng.random_range(0.5..2.0);
            let b = a.matvec(&x).unwrap();
            let inst = SparseRegInstance::new(a, b, 2, 0.1).unwrap();
            let sol =
                recover_sparse_vector(&inst, &SparseRegOptions::default(), ConditionMode::Global, seed)
                    .unwrap();
            let err = dense_dist(&sol.z.to_dense(), &x);
            assert!(err <= 0.1, "seed {seed}: error {err}");
        }
    }

    #[test]
    fn submatrix_condition_tolerates_an_unused_tiny_direction() {
        // Spectrum 1 everywhere except 1e-3 along the all-ones direction, which
        // no two-column difference can reach.
        let d = 6;
        let ones = 1.0 / (d as f64).sqrt();
        let mut a = DenseMatrix::from_fn(8, d, |i, j| {
            if i < d {
                (if i == j { 1.0 } else { 0.0 }) - (1.0 - 1e-3) * ones * ones
            } else {
                0.0
            }
        });
        let q = gaussian(8, 8, 9);
        let q = crate::numlin::orthonormal_col_basis(&q);
        a = q.matmul(&a).unwrap();
        let global = sigma_floor(&a, 1, ConditionMode::Global).unwrap();
        let sub = sigma_floor(&a, 1, ConditionMode::Submatrix).unwrap();
        assert!((global - 1e-3).abs() < 1e-9);
        assert!(sub > 0.5);

        let mut x = vec![0.0; d];
        x[2] = 0.7;
        let b = a.matvec(&x).unwrap();
        let inst = SparseRegInstance::new(a, b, 1, 0.05).unwrap();
        let sol = recover_sparse_vector(&inst, &SparseRegOptions::default(), ConditionMode::Submatrix, 0)
            .unwrap();
        assert!(dense_dist(&sol.z.to_dense(), &x) <= 0.05);
        // The global floor would need a net 500 times finer.
        assert!(sub / global > 500.0);
    }

    #[test]
    fn odd_k_splits_into_unequal_halves() {
        let a = gaussian(10, 6, 3);
        let x = [0.0, 1.0, 0.0, -1.0, 0.0, 0.8];
        let b = a.matvec(&x).unwrap();
        let inst = SparseRegInstance::new(a, b.clone(), 3, 0.3).unwrap();
        assert_eq!(inst.halves(), (2, 1));
        let sol = solve_sparse_regression(&inst, &SparseRegOptions::default(), 0).unwrap();
        assert!(sol.z.nnz() <= 3);
        assert!(sol.stats.indexed < sol.stats.candidates);
        assert!(sol.residual <= 0.3 * norm2(&b));
    }

    #[test]
    fn capacity_is_reported_before_building() {
        let a = gaussian(10, 10, 3);
        let b = a.col(0);
        let inst = SparseRegInstance::new(a, b, 4, 0.01).unwrap();
        let opts = SparseRegOptions {
            net_cap: 1_000,
            ..SparseRegOptions::default()
        };
        match solve_sparse_regression(&inst, &opts, 0) {
            Err(Error::Capacity { predicted, cap }) => {
                assert_eq!(cap, 1_000);
                assert!(predicted > 1_000);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_per_seed_and_backend() {
        let a = gaussian(16, 10, 8);
        let b = a.matvec(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let inst = SparseRegInstance::new(a, b, 2, 0.1).unwrap().with_c(2.0);
        for opts in [SparseRegOptions::default(), SparseRegOptions::hashed()] {
            let one = solve_sparse_regression(&inst, &opts, 4).unwrap();
            let two = solve_sparse_regression(&inst, &opts, 4).unwrap();
            assert_eq!(one, two);
        }
    }

    #[test]
    fn finite_alphabet_unit_vector() {
        let a = DenseMatrix::<f64>::identity(3);
        let sol = solve_finite_alphabet(&a, &[1.0, 0.0, 0.0], 1, &[1.0], KeyMode::Integer).unwrap();
        assert_eq!(sol.x.to_dense(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn finite_alphabet_binary_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a = DenseMatrix::from_fn(12, 14, |_, _| rng.random_range(-3i32..=3) as f64);
        let x = SparseVector::new(14, vec![1, 5, 6, 12], vec![1.0; 4]).unwrap();
        let b = x.apply(&a).unwrap();
        let sol = solve_finite_alphabet(&a, &b, 4, &[1.0], KeyMode::Integer).unwrap();
        assert_eq!(sol.x, x);
        assert_eq!(sol.sparsity, 4);
    }

    #[test]
    fn finite_alphabet_table_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let a = DenseMatrix::from_fn(8, 9, |_, _| rng.random_range(-3i32..=3) as f64);
        let alphabet = [1.0, -1.0, 2.0];
        let x = SparseVector::new(9, vec![0, 4, 7, 8], vec![1.0, -1.0, 2.0, 2.0]).unwrap();
        let b = x.apply(&a).unwrap();
        let sol = solve_finite_alphabet(&a, &b, 4, &alphabet, KeyMode::Integer).unwrap();
        assert_eq!(sol.table_size as u128, binomial(9, 2) * 9);
        assert_eq!(sol.x.apply(&a).unwrap(), b);
    }

    #[test]
    fn finite_alphabet_falls_back_to_lower_sparsity() {
        let a = DenseMatrix::<f64>::identity(5);
        let b = [0.0, 1.0, 0.0, 1.0, 0.0];
        let sol = solve_finite_alphabet(&a, &b, 4, &[1.0], KeyMode::Integer).unwrap();
        assert_eq!(sol.x.support(), &[1, 3]);
        assert_eq!(sol.sparsity, 2);
    }

    #[test]
    fn finite_alphabet_rejects_unreachable_target() {
        let a = DenseMatrix::<f64>::identity(3);
        assert!(matches!(
            solve_finite_alphabet(&a, &[2.0, 0.0, 0.0], 1, &[1.0], KeyMode::Integer),
            Err(Error::NoCollision)
        ));
        assert!(solve_finite_alphabet(&a, &[0.5, 0.0, 0.0], 1, &[1.0], KeyMode::Integer).is_err());
    }

    #[test]
    fn finite_alphabet_quantized_mode() {
        let a = DenseMatrix::from_rows(&[[0.5, 0.25, 1.0], [0.1, -0.3, 0.7]]).unwrap();
        let x = SparseVector::new(3, vec![0, 2], vec![0.5, 0.5]).unwrap();
        let b = x.apply(&a).unwrap();
        let sol = solve_finite_alphabet(&a, &b, 2, &[0.5], KeyMode::Quantized(1e-9)).unwrap();
        assert_eq!(sol.x, x);
    }

    #[test]
    fn merge_adds_overlaps_and_drops_cancellations() {
        let p = SparseVector::new(5, vec![0, 2], vec![1.0, 2.0]).unwrap();
        let q = SparseVector::new(5, vec![2, 4], vec![-2.0, 3.0]).unwrap();
        let m = p.merge(&q);
        assert_eq!(m.support(), &[0, 4]);
        assert_eq!(m.values(), &[1.0, 3.0]);
        assert!(SparseVector::new(3, vec![1, 1], vec![1.0, 1.0]).is_err());
    }
}
