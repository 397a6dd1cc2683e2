//! Sparse PCA through farthest pairs: with `A = BᵀB`, `vᵀAv = ‖B v‖²`, and a
//! `k`-sparse `v` splits into two half-sparse pieces whose images are far apart.

mod geometry;

pub use geometry::{approx_bfp, approx_diameter, FarPair, GeoBackend, EXACT_PAIR_LIMIT};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_dim, domain, Error, Result};
use crate::nets::{ball_net_capped, interval_net, NetSpec, DEFAULT_NET_CAP};
use crate::numlin::{condition_number, norm2, DenseMatrix, SymmetricEigen};
use crate::scalar::Scalar;
use crate::sparse_reg::{binomial, SparseVector};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaInstance<T> {
    pub a: DenseMatrix<T>,
    pub k: usize,
    pub eps: T,
    /// Entry bound `L` of the limited-alphabet variant.
    pub alphabet_bound: u32,
    /// Independent random partitions tried by the net solver.
    pub repeats: usize,
}

impl<T: Scalar> PcaInstance<T> {
    pub fn new(a: DenseMatrix<T>, k: usize, eps: T) -> Result<Self> {
        let inst = Self {
            a,
            k,
            eps,
            alphabet_bound: 1,
            repeats: 10,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_repeats(mut self, repeats: usize) -> Self {
        self.repeats = repeats;
        self
    }

    pub fn with_alphabet_bound(mut self, l: u32) -> Self {
        self.alphabet_bound = l;
        self
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn validate(&self) -> Result<()> {
        check_dim("PcaInstance square", self.a.rows(), self.a.cols())?;
        let scale = T::one().max(self.a.max_abs());
        if !self.a.is_symmetric(T::rank_tol() * scale) {
            return domain("sparse PCA needs a symmetric matrix");
        }
        if self.k > self.n() {
            return domain(format!("sparsity k = {} exceeds n = {}", self.k, self.n()));
        }
        if !(self.eps > T::zero() && self.eps < T::one()) {
            return domain(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if self.repeats == 0 {
            return domain("at least one partition repeat is needed");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaSolution<T> {
    pub u: SparseVector<T>,
    /// `uᵀ A u`.
    pub value: T,
    pub norm: T,
}

impl<T: Scalar> PcaSolution<T> {
    pub fn new(a: &DenseMatrix<T>, u: SparseVector<T>) -> Self {
        let value = quadratic_form(a, &u);
        let norm = norm2(u.values());
        Self { u, value, norm }
    }
}

pub fn quadratic_form<T: Scalar>(a: &DenseMatrix<T>, u: &SparseVector<T>) -> T {
    let mut acc = T::zero();
    for (&i, &x) in u.support().iter().zip(u.values()) {
        for (&j, &y) in u.support().iter().zip(u.values()) {
            acc += x * a[(i, j)] * y;
        }
    }
    acc
}

/// `B` with `r` rows (the numerical rank) such that `BᵀB = A`.
pub fn factor_psd<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    check_dim("factor_psd square", a.rows(), a.cols())?;
    let eig = SymmetricEigen::new(a);
    let top = eig.values.first().copied().unwrap_or(T::zero()).max(T::zero());
    let tol = T::rank_tol() * top;
    if let Some(&low) = eig.values.last() {
        if low < -tol {
            return Err(Error::NotPsd {
                eigenvalue: low.to_f64_lossy(),
            });
        }
    }
    let kept: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > tol).collect();
    Ok(DenseMatrix::from_fn(kept.len(), a.cols(), |r, j| {
        eig.values[kept[r]].sqrt() * eig.vectors[(j, kept[r])]
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaOptions {
    pub backend: GeoBackend,
    pub net_cap: u128,
}

impl Default for PcaOptions {
    fn default() -> Self {
        Self {
            backend: GeoBackend::Auto,
            net_cap: DEFAULT_NET_CAP,
        }
    }
}

struct HalfPoint<T> {
    image: Vec<T>,
    support: Vec<usize>,
    coeffs: Vec<T>,
}

fn image_of<T: Scalar>(b: &DenseMatrix<T>, support: &[usize], coeffs: &[T], sign: T) -> Vec<T> {
    (0..b.rows())
        .map(|r| sign * support.iter().zip(coeffs).fold(T::zero(), |acc, (&j, &y)| acc + b[(r, j)] * y))
        .collect()
}

/// Net points `±B_T y` over size-`size` supports inside `cell`, with
/// `‖y‖² ∈ [target − eps/2, target + eps/2]`.
fn shell_points<T: Scalar>(
    b: &DenseMatrix<T>,
    cell: &[usize],
    size: usize,
    net: &[(Vec<T>, T)],
    target: T,
    half_eps: T,
    sign: T,
) -> Vec<HalfPoint<T>> {
    let coeffs: Vec<&Vec<T>> = net
        .iter()
        .filter(|(_, sq)| (*sq - target).abs() <= half_eps)
        .map(|(y, _)| y)
        .collect();
    if size == 0 {
        return if target.abs() <= half_eps {
            vec![HalfPoint {
                image: vec![T::zero(); b.rows()],
                support: Vec::new(),
                coeffs: Vec::new(),
            }]
        } else {
            Vec::new()
        };
    }
    cell.iter()
        .copied()
        .combinations(size)
        .flat_map(|t| {
            coeffs
                .iter()
                .map(|y| HalfPoint {
                    image: image_of(b, &t, y, sign),
                    support: t.clone(),
                    coeffs: (*y).clone(),
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn best_diagonal<T: Scalar>(a: &DenseMatrix<T>) -> PcaSolution<T> {
    let n = a.rows();
    let mut best = 0;
    for i in 1..n {
        if a[(i, i)] > a[(best, best)] {
            best = i;
        }
    }
    PcaSolution::new(a, SparseVector::new(n, vec![best], vec![T::one()]).expect("valid unit vector"))
}

/// Sparse PCA via random partitions, norm guesses, coefficient nets and
/// bichromatic farthest pairs; the best of `repeats` partitions is returned.
///
/// Splits `k = k₁ + k₂` use `k₁, k₂ ≥ ⌈k(1−ε)/2⌉` clamped to `[1, ⌊k/2⌋]`; the best single
/// coordinate is always a candidate, which covers `k = 1`.
pub fn solve_sparse_pca<T: Scalar>(inst: &PcaInstance<T>, opts: &PcaOptions, seed: u64) -> Result<PcaSolution<T>> {
    inst.validate()?;
    let n = inst.n();
    if inst.k == 0 || n == 0 {
        return Ok(PcaSolution::new(&inst.a, SparseVector::zeros(n)));
    }
    let b = factor_psd(&inst.a)?;
    let mut best = best_diagonal(&inst.a);
    if inst.k == 1 || b.rows() == 0 {
        return Ok(best);
    }

    let kappa = condition_number(&inst.a)?;
    let delta = inst.eps / kappa;
    let half_eps = inst.eps / T::lit(2.0);
    let z_net = interval_net(half_eps)?;
    let min_half = ((T::from_usize_lossy(inst.k) * (T::one() - inst.eps)) / T::lit(2.0))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .clamp(1, inst.k / 2);
    let splits: Vec<(usize, usize)> = (min_half..=inst.k - min_half).map(|k1| (k1, inst.k - k1)).collect();

    let mut nets: Vec<Vec<(Vec<T>, T)>> = vec![Vec::new(); inst.k + 1];
    for &(k1, k2) in &splits {
        for size in [k1, k2] {
            if nets[size].is_empty() {
                let predicted = NetSpec::new(size, T::one(), delta)?
                    .predicted_count()
                    .saturating_mul(binomial(n, size));
                if predicted > opts.net_cap {
                    return Err(Error::Capacity {
                        predicted,
                        cap: opts.net_cap,
                    });
                }
                nets[size] = ball_net_capped(size, T::one(), delta, opts.net_cap)?
                    .into_iter()
                    .map(|y| {
                        let sq = y.iter().map(|&v| v * v).sum();
                        (y, sq)
                    })
                    .collect();
            }
        }
    }

    for rep in 0..inst.repeats {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rep as u64));
        let (u1, u2): (Vec<usize>, Vec<usize>) = (0..n).partition(|_| rng.random::<bool>());
        let jobs: Vec<((usize, usize), T)> = splits
            .iter()
            .flat_map(|&s| z_net.iter().map(move |&z| (s, z)))
            .collect();
        let results: Vec<Option<PcaSolution<T>>> = jobs
            .par_iter()
            .enumerate()
            .map(|(job, &((k1, k2), z))| {
                let s1 = shell_points(&b, &u1, k1, &nets[k1], z, half_eps, T::one());
                let s2 = shell_points(&b, &u2, k2, &nets[k2], T::one() - z, half_eps, -T::one());
                if s1.is_empty() || s2.is_empty() {
                    return Ok(None);
                }
                let p: Vec<Vec<T>> = s1.iter().map(|h| h.image.clone()).collect();
                let q: Vec<Vec<T>> = s2.iter().map(|h| h.image.clone()).collect();
                let pair = approx_bfp(&p, &q, inst.eps, opts.backend, seed ^ (job as u64))?;
                let (h1, h2) = (&s1[pair.i], &s2[pair.j]);
                let support: Vec<usize> = h1.support.iter().chain(&h2.support).copied().collect();
                let values: Vec<T> = h1.coeffs.iter().chain(&h2.coeffs).copied().collect();
                let w = SparseVector::new(n, sorted(&support), reorder(&support, &values))?;
                let norm = norm2(w.values());
                if norm == T::zero() {
                    return Ok(None);
                }
                Ok(Some(PcaSolution::new(&inst.a, w.scaled(T::one() / norm))))
            })
            .collect::<Result<_>>()?;
        for sol in results.into_iter().flatten() {
            if sol.value > best.value {
                best = sol;
            }
        }
    }
    Ok(best)
}

fn sorted(support: &[usize]) -> Vec<usize> {
    let mut s = support.to_vec();
    s.sort_unstable();
    s
}

fn reorder<T: Scalar>(support: &[usize], values: &[T]) -> Vec<T> {
    let mut pairs: Vec<(usize, T)> = support.iter().copied().zip(values.iter().copied()).collect();
    pairs.sort_by_key(|p| p.0);
    pairs.into_iter().map(|p| p.1).collect()
}

fn alphabet_points<T: Scalar>(b: &DenseMatrix<T>, size: usize, l: i64) -> Vec<HalfPoint<T>> {
    let n = b.cols();
    if size == 0 {
        return vec![HalfPoint {
            image: vec![T::zero(); b.rows()],
            support: Vec::new(),
            coeffs: Vec::new(),
        }];
    }
    let assignments: Vec<Vec<T>> = (0..size)
        .map(|_| (-l..=l).map(|v| T::lit(v as f64)))
        .multi_cartesian_product()
        .collect();
    (0..n)
        .combinations(size)
        .flat_map(|t| {
            assignments
                .iter()
                .map(|w| HalfPoint {
                    image: image_of(b, &t, w, T::one()),
                    support: t.clone(),
                    coeffs: w.clone(),
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Limited-alphabet sparse PCA: the farthest pair among `{B y}` over
/// half-sparse `y` with entries in `{−L..L}` gives `u = y − y′` with entries
/// in `{−2L..2L}`. Odd `k` pairs `⌈k/2⌉`-sparse against `⌊k/2⌋`-sparse points.
pub fn solve_sparse_pca_alphabet<T: Scalar>(inst: &PcaInstance<T>, opts: &PcaOptions, seed: u64) -> Result<PcaSolution<T>> {
    inst.validate()?;
    let n = inst.n();
    if inst.alphabet_bound == 0 {
        return domain("alphabet bound L must be at least 1");
    }
    if inst.k == 0 || n == 0 {
        return Ok(PcaSolution::new(&inst.a, SparseVector::zeros(n)));
    }
    let b = factor_psd(&inst.a)?;
    let l = i64::from(inst.alphabet_bound);
    let (k1, k2) = (inst.k.div_ceil(2), inst.k / 2);
    let per = |size: usize| binomial(n, size).saturating_mul((2 * l as u128 + 1).saturating_pow(size as u32));
    let predicted = per(k1).saturating_add(per(k2));
    if predicted > opts.net_cap {
        return Err(Error::Capacity {
            predicted,
            cap: opts.net_cap,
        });
    }
    let s1 = alphabet_points(&b, k1, l);
    let p: Vec<Vec<T>> = s1.iter().map(|h| h.image.clone()).collect();
    let s2;
    let (h1, h2) = if k1 == k2 {
        let pair = approx_diameter(&p, inst.eps, opts.backend, seed)?;
        (&s1[pair.i], &s1[pair.j])
    } else {
        s2 = alphabet_points(&b, k2, l);
        let q: Vec<Vec<T>> = s2.iter().map(|h| h.image.clone()).collect();
        let pair = approx_bfp(&p, &q, inst.eps, opts.backend, seed)?;
        (&s1[pair.i], &s2[pair.j])
    };
    // Supports come from `combinations` and are already increasing.
    let y = SparseVector::new(n, h1.support.clone(), h1.coeffs.clone())?;
    let y2 = SparseVector::new(n, h2.support.clone(), h2.coeffs.clone())?;
    Ok(PcaSolution::new(&inst.a, y.merge(&y2.scaled(-T::one()))))
}
