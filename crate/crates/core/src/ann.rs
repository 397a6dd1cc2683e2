//! Nearest-neighbour indices: exact linear scan, a multi-table random-projection
//! hash index with full-scan fallback, and an exact collision table for
//! finite-alphabet recovery.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, domain, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnnBackend {
    Exact,
    Hashed,
}

/// Configuration of the hashed backend. `c` is the approximation factor the
/// caller budgets for; the exact backend behaves as `c = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnConfig<T> {
    pub c: T,
    pub tables: usize,
    pub hashes_per_table: usize,
    pub hash_width: T,
    pub seed: u64,
}

impl<T: Scalar> AnnConfig<T> {
    pub fn new(c: T, tables: usize, hashes_per_table: usize, hash_width: T, seed: u64) -> Result<Self> {
        if !(c >= T::one()) {
            return domain(format!("ANN factor c must be >= 1, got {c}"));
        }
        if tables == 0 || hashes_per_table == 0 {
            return domain("hashed ANN needs at least one table and one hash per table");
        }
        if !(hash_width > T::zero()) || !hash_width.is_finite() {
            return domain(format!("hash width must be positive, got {hash_width}"));
        }
        Ok(Self {
            c,
            tables,
            hashes_per_table,
            hash_width,
            seed,
        })
    }

    /// Query exponent `1/(2c²−1)` of the optimal data-dependent scheme. Only
    /// reported, never used.
    pub fn rho(&self) -> f64 {
        let c = self.c.to_f64_lossy();
        1.0 / (2.0 * c * c - 1.0)
    }
}

struct HashTables<T> {
    // [table][hash] -> direction
    directions: Vec<Vec<Vec<T>>>,
    offsets: Vec<Vec<T>>,
    width: T,
    buckets: Vec<HashMap<Vec<i64>, Vec<u32>>>,
}

impl<T: Scalar> HashTables<T> {
    fn build(points: &[Vec<T>], dim: usize, cfg: &AnnConfig<T>) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut directions = Vec::with_capacity(cfg.tables);
        let mut offsets = Vec::with_capacity(cfg.tables);
        for _ in 0..cfg.tables {
            let dirs: Vec<Vec<T>> = (0..cfg.hashes_per_table)
                .map(|_| {
                    (0..dim)
                        .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
                        .collect()
                })
                .collect();
            let offs: Vec<T> = (0..cfg.hashes_per_table)
                .map(|_| T::lit(rng.random::<f64>()) * cfg.hash_width)
                .collect();
            directions.push(dirs);
            offsets.push(offs);
        }
        let mut tables = HashTables {
            directions,
            offsets,
            width: cfg.hash_width,
            buckets: Vec::new(),
        };
        tables.buckets = (0..cfg.tables)
            .map(|t| {
                let mut map: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
                for (i, p) in points.iter().enumerate() {
                    map.entry(tables.key(t, p)).or_default().push(i as u32);
                }
                map
            })
            .collect();
        tables
    }

    fn key(&self, table: usize, p: &[T]) -> Vec<i64> {
        self.directions[table]
            .iter()
            .zip(&self.offsets[table])
            .map(|(dir, &off)| {
                let proj = dir.iter().zip(p).fold(T::zero(), |acc, (&a, &x)| acc + a * x);
                ((proj + off) / self.width).floor().to_i64().unwrap_or(i64::MIN)
            })
            .collect()
    }
}

enum Backend<T> {
    Exact,
    Hashed(HashTables<T>),
}

/// Immutable nearest-neighbour index over points with attached payloads.
pub struct AnnIndex<T, P> {
    dim: usize,
    points: Vec<Vec<T>>,
    payloads: Vec<P>,
    backend: Backend<T>,
}

/// Result of a query: the reported point, its payload and its distance.
#[derive(Debug, Clone, Copy)]
pub struct Neighbor<'a, T, P> {
    pub index: usize,
    pub point: &'a [T],
    pub payload: &'a P,
    pub distance: T,
}

pub fn build_index<T: Scalar, P>(
    items: Vec<(Vec<T>, P)>,
    backend: AnnBackend,
    config: &AnnConfig<T>,
) -> Result<AnnIndex<T, P>> {
    if items.is_empty() {
        return domain("cannot build a nearest-neighbour index over zero points");
    }
    let dim = items[0].0.len();
    let mut points = Vec::with_capacity(items.len());
    let mut payloads = Vec::with_capacity(items.len());
    for (p, payload) in items {
        check_dim("build_index", dim, p.len())?;
        points.push(p);
        payloads.push(payload);
    }
    let backend = match backend {
        AnnBackend::Exact => Backend::Exact,
        AnnBackend::Hashed => Backend::Hashed(HashTables::build(&points, dim, config)),
    };
    Ok(AnnIndex {
        dim,
        points,
        payloads,
        backend,
    })
}

impl<T: Scalar, P> AnnIndex<T, P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn payloads(&self) -> &[P] {
        &self.payloads
    }

    pub fn query(&self, q: &[T]) -> Result<Neighbor<'_, T, P>> {
        check_dim("query_index", self.dim, q.len())?;
        let (index, dist_sq) = match &self.backend {
            Backend::Exact => self.scan(q, 0..self.points.len()),
            Backend::Hashed(tables) => {
                let mut cand: Vec<u32> = Vec::new();
                for t in 0..tables.buckets.len() {
                    if let Some(b) = tables.buckets[t].get(&tables.key(t, q)) {
                        cand.extend_from_slice(b);
                    }
                }
                if cand.is_empty() {
                    self.scan(q, 0..self.points.len())
                } else {
                    cand.sort_unstable();
                    cand.dedup();
                    self.scan(q, cand.into_iter().map(|i| i as usize))
                }
            }
        };
        Ok(Neighbor {
            index,
            point: &self.points[index],
            payload: &self.payloads[index],
            distance: dist_sq.sqrt(),
        })
    }

    /// Nearest among `candidates` (visited in increasing order), ties to the
    /// lowest index.
    fn scan(&self, q: &[T], candidates: impl Iterator<Item = usize>) -> (usize, T) {
        let mut best = (usize::MAX, T::infinity());
        for i in candidates {
            let p = &self.points[i];
            let mut acc = T::zero();
            for (&a, &b) in p.iter().zip(q) {
                let d = a - b;
                acc += d * d;
                if acc >= best.1 {
                    break;
                }
            }
            if acc < best.1 {
                best = (i, acc);
            }
        }
        best
    }
}

/// Hash table keyed by quantized vectors.
///
/// With `q_unit = None` keys are the raw integer coordinates and inserting a
/// non-integral vector is an error; otherwise every coordinate is rounded to
/// the nearest multiple of `q_unit`.
pub struct ExactTable<T, P> {
    dim: usize,
    q_unit: Option<T>,
    map: HashMap<Vec<i64>, Vec<P>>,
    len: usize,
}

pub fn build_exact_table<T: Scalar, P>(
    items: impl IntoIterator<Item = (Vec<T>, P)>,
    q_unit: Option<T>,
) -> Result<ExactTable<T, P>> {
    if let Some(q) = q_unit {
        if !(q > T::zero()) || !q.is_finite() {
            return domain(format!("quantization unit must be positive, got {q}"));
        }
    }
    let mut table = ExactTable {
        dim: usize::MAX,
        q_unit,
        map: HashMap::new(),
        len: 0,
    };
    for (v, payload) in items {
        if table.dim == usize::MAX {
            table.dim = v.len();
        }
        check_dim("build_exact_table", table.dim, v.len())?;
        let Some(key) = table.key(&v) else {
            return domain("integer-exact table received a non-integral or out-of-range vector");
        };
        table.map.entry(key).or_default().push(payload);
        table.len += 1;
    }
    Ok(table)
}

impl<T: Scalar, P> ExactTable<T, P> {
    const INT_LIMIT: f64 = 4.0e18;

    fn key(&self, v: &[T]) -> Option<Vec<i64>> {
        v.iter()
            .map(|&x| {
                let scaled = match self.q_unit {
                    None if x.fract() != T::zero() => return None,
                    None => x,
                    Some(q) => (x / q).round(),
                };
                if scaled.abs().to_f64_lossy() > Self::INT_LIMIT {
                    return None;
                }
                scaled.to_i64()
            })
            .collect()
    }

    /// Payloads sharing `q`'s key; `None` when absent (a normal outcome).
    pub fn lookup(&self, q: &[T]) -> Option<&[P]> {
        if self.len > 0 && q.len() != self.dim {
            return None;
        }
        self.key(q)
            .and_then(|k| self.map.get(&k))
            .map(Vec::as_slice)
    }

    /// Number of inserted vectors.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn distinct_keys(&self) -> usize {
        self.map.len()
    }
}
