//! Farthest pairs: diameter of one point set and bichromatic farthest pair of
//! two, each with an exhaustive and a projection-based approximate backend.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{check_dim, domain, Result};
use crate::numlin::{dist2, dot};
use crate::scalar::Scalar;

/// Above this many pairs `Auto` switches from exhaustive to approximate.
pub const EXACT_PAIR_LIMIT: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeoBackend {
    Exact,
    Approximate,
    Auto,
}

/// Indices of the reported pair (into `P` and `Q` for the bichromatic
/// version) and their distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarPair<T> {
    pub i: usize,
    pub j: usize,
    pub distance: T,
}

fn check_points<T: Scalar>(points: &[Vec<T>], dim: usize, context: &'static str) -> Result<()> {
    for p in points {
        check_dim(context, dim, p.len())?;
    }
    Ok(())
}

fn random_directions<T: Scalar>(dim: usize, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect())
        .collect()
}

fn direction_count<T: Scalar>(eps: T, dim: usize) -> usize {
    let per_dim = (T::lit(10.0) / eps).ceil().to_usize().unwrap_or(usize::MAX).max(4);
    per_dim.saturating_mul(dim.max(1)).min(100_000)
}

/// Extreme points of `points` along `u`: (argmin, argmax), lowest index on ties.
fn extremes<T: Scalar>(points: &[Vec<T>], u: &[T]) -> (usize, usize) {
    let mut lo = (0, T::infinity());
    let mut hi = (0, T::neg_infinity());
    for (i, p) in points.iter().enumerate() {
        let s = dot(p, u);
        if s < lo.1 {
            lo = (i, s);
        }
        if s > hi.1 {
            hi = (i, s);
        }
    }
    (lo.0, hi.0)
}

fn farthest_from<T: Scalar>(points: &[Vec<T>], q: &[T]) -> usize {
    let mut best = (0, T::neg_infinity());
    for (i, p) in points.iter().enumerate() {
        let d = dist2(p, q);
        if d > best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// All-pairs maximum over `p_idx × q_idx`, ties to the lexicographically
/// first index pair.
fn exhaustive<T: Scalar>(p: &[Vec<T>], q: &[Vec<T>], p_idx: &[usize], q_idx: &[usize], same_set: bool) -> FarPair<T> {
    let rows: Vec<FarPair<T>> = p_idx
        .par_iter()
        .map(|&i| {
            let mut best = FarPair {
                i,
                j: usize::MAX,
                distance: T::neg_infinity(),
            };
            for &j in q_idx {
                if same_set && j <= i {
                    continue;
                }
                let d = dist2(&p[i], &q[j]);
                if d > best.distance || (d == best.distance && j < best.j) {
                    best = FarPair { i, j, distance: d };
                }
            }
            best
        })
        .collect();
    rows.into_iter()
        .reduce(|a, b| {
            if b.distance > a.distance
                || (b.distance == a.distance && (b.i, b.j) < (a.i, a.j))
            {
                b
            } else {
                a
            }
        })
        .expect("nonempty candidate set")
}

/// Pair of points at (approximately) maximum distance.
///
/// The approximate backend keeps the extreme points along random directions
/// plus a double sweep from the first point, then searches those exhaustively.
pub fn approx_diameter<T: Scalar>(points: &[Vec<T>], eps: T, backend: GeoBackend, seed: u64) -> Result<FarPair<T>> {
    if points.len() < 2 {
        return domain("diameter needs at least two points");
    }
    let dim = points[0].len();
    check_points(points, dim, "approx_diameter")?;
    let exact = match backend {
        GeoBackend::Exact => true,
        GeoBackend::Approximate => false,
        GeoBackend::Auto => points.len() * points.len() / 2 <= EXACT_PAIR_LIMIT,
    };
    let idx: Vec<usize> = if exact {
        (0..points.len()).collect()
    } else {
        if !(eps > T::zero() && eps < T::one()) {
            return domain(format!("eps must lie in (0, 1), got {eps}"));
        }
        let mut cand = Vec::new();
        for u in random_directions::<T>(dim, direction_count(eps, dim), seed) {
            let (lo, hi) = extremes(points, &u);
            cand.push(lo);
            cand.push(hi);
        }
        let a = farthest_from(points, &points[0]);
        let b = farthest_from(points, &points[a]);
        cand.extend([0, a, b]);
        cand.sort_unstable();
        cand.dedup();
        if cand.len() < 2 {
            cand = vec![0, 1];
        }
        cand
    };
    let best = exhaustive(points, points, &idx, &idx, true);
    Ok(best)
}

/// Pair `(p ∈ P, q ∈ Q)` at (approximately) maximum distance.
pub fn approx_bfp<T: Scalar>(p: &[Vec<T>], q: &[Vec<T>], eps: T, backend: GeoBackend, seed: u64) -> Result<FarPair<T>> {
    if p.is_empty() || q.is_empty() {
        return domain("bichromatic farthest pair needs two nonempty sets");
    }
    let dim = p[0].len();
    check_points(p, dim, "approx_bfp P")?;
    check_points(q, dim, "approx_bfp Q")?;
    let exact = match backend {
        GeoBackend::Exact => true,
        GeoBackend::Approximate => false,
        GeoBackend::Auto => p.len().saturating_mul(q.len()) <= EXACT_PAIR_LIMIT,
    };
    let (pi, qi): (Vec<usize>, Vec<usize>) = if exact {
        ((0..p.len()).collect(), (0..q.len()).collect())
    } else {
        if !(eps > T::zero() && eps < T::one()) {
            return domain(format!("eps must lie in (0, 1), got {eps}"));
        }
        let mut pc = Vec::new();
        let mut qc = Vec::new();
        for u in random_directions::<T>(dim, direction_count(eps, dim), seed) {
            let (plo, phi) = extremes(p, &u);
            let (qlo, qhi) = extremes(q, &u);
            pc.extend([plo, phi]);
            qc.extend([qlo, qhi]);
        }
        let a = farthest_from(q, &p[0]);
        let b = farthest_from(p, &q[a]);
        let c = farthest_from(q, &p[b]);
        pc.extend([0, b]);
        qc.extend([a, c]);
        pc.sort_unstable();
        pc.dedup();
        qc.sort_unstable();
        qc.dedup();
        (pc, qc)
    };
    Ok(exhaustive(p, q, &pi, &qi, false))
}
