//! Instance generators for the hardness reductions: exact cover and
//! MAX-3-LIN to robust regression, and the min-weight clique gadget.

use crate::error::{domain, Result};
use crate::numlin::DenseMatrix;
use crate::robust_reg::RobustInstance;
use crate::scalar::Scalar;

/// Universe `{0, …, universe − 1}` and a collection of subsets of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCoverInstance {
    pub universe: usize,
    pub sets: Vec<Vec<usize>>,
}

impl ExactCoverInstance {
    pub fn new(universe: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        for s in &sets {
            if let Some(&e) = s.iter().find(|&&e| e >= universe) {
                return domain(format!("element {e} is outside a universe of size {universe}"));
            }
            let mut sorted = s.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return domain("a set lists the same element twice");
            }
        }
        Ok(Self { universe, sets })
    }

    /// Membership matrix entry: does set `i` contain element `e`?
    pub fn contains(&self, i: usize, e: usize) -> bool {
        self.sets[i].contains(&e)
    }
}

/// Rows `y_i = 0` and `y_i = 1` for every set, then one row per element
/// asking that the chosen sets cover it exactly once. Ignoring `|S|` rows
/// gives zero loss iff an exact cover exists.
pub fn exact_cover_to_robust<T: Scalar>(inst: &ExactCoverInstance) -> Result<RobustInstance<T>> {
    let m = inst.sets.len();
    if m == 0 {
        return domain("exact cover reduction needs at least one set");
    }
    let n = 2 * m + inst.universe;
    let mut a = DenseMatrix::zeros(n, m);
    let mut b = vec![T::zero(); n];
    for i in 0..m {
        a[(2 * i, i)] = T::one();
        a[(2 * i + 1, i)] = T::one();
        b[2 * i + 1] = T::one();
    }
    for e in 0..inst.universe {
        let row = 2 * m + e;
        for i in 0..m {
            if inst.contains(i, e) {
                a[(row, i)] = T::one();
            }
        }
        b[row] = T::one();
    }
    RobustInstance::new(a, b, m)
}

/// Simple undirected graph with nonnegative integer edge weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<Option<u64>>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            weights: vec![None; n * n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize, u64)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(u, v, w) in edges {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: u64) -> Result<()> {
        if u >= self.n || v >= self.n || u == v {
            return domain(format!("invalid edge ({u}, {v}) on {} vertices", self.n));
        }
        self.weights[u * self.n + v] = Some(w);
        self.weights[v * self.n + u] = Some(w);
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<u64> {
        self.weights[u * self.n + v]
    }

    /// Edges `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, u64)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if let Some(w) = self.weight(u, v) {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    pub fn total_weight(&self) -> u64 {
        self.edges().iter().map(|e| e.2).sum()
    }

    /// Number of vertex pairs that are not edges.
    pub fn non_edges(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2 - self.edges().len()
    }

    /// Block of `v` when the vertices are cut into `k` consecutive blocks.
    pub fn block_of(&self, v: usize, k: usize) -> usize {
        v / (self.n / k)
    }
}

/// Scale of the gadget's non-edge rows.
pub fn build_alpha(g: &WeightedGraph, w: u64) -> f64 {
    (1f64.max(g.total_weight() as f64 + 8.0 * w as f64)).sqrt()
}

/// Decision threshold of the gadget.
pub fn build_delta(g: &WeightedGraph, w: u64) -> f64 {
    let alpha = build_alpha(g, w);
    (g.total_weight() as f64 + 8.0 * w as f64 + alpha * alpha * g.non_edges() as f64).sqrt()
}

/// Scale of the block-sum rows, `δ · max(8Z, 50(α²Z + Σw), 1)`.
pub fn build_beta(g: &WeightedGraph, w: u64) -> f64 {
    let alpha = build_alpha(g, w);
    let z = g.non_edges() as f64;
    let sum_w = g.total_weight() as f64;
    build_delta(g, w) * (8.0 * z).max(50.0 * (alpha * alpha * z + sum_w)).max(1.0)
}

/// Reading of the block-sum scale's malformed source expression, recorded in
/// instance metadata.
pub const BETA_FORMULA_NOTE: &str =
    "beta = sqrt(sum_w + 8W + alpha^2 Z) * max(8Z, 50(alpha^2 Z, + sum_w)); read as max(8Z, 50*(alpha^2 Z + sum_w), 1)";

#[derive(Debug, Clone, PartialEq)]
pub struct CliqueGadget<T> {
    pub a: DenseMatrix<T>,
    pub b: Vec<T>,
    pub delta: T,
    pub alpha: T,
    pub beta: T,
    /// Penalty scale of the robust augmentation, if present.
    pub c_tilde: Option<T>,
    pub k: usize,
}

impl<T: Scalar> CliqueGadget<T> {
    /// The robust-regression view: ignore `k` rows, threshold `delta`.
    pub fn robust_instance(&self) -> Result<RobustInstance<T>> {
        Ok(RobustInstance::new(self.a.clone(), self.b.clone(), self.k)?.with_delta(self.delta))
    }
}

/// Sparse-regression gadget for min-weight `k`-clique with threshold `W`.
///
/// Rows: one per vertex pair (`2α` on both endpoints, target `α`, for a
/// non-edge; `2√w` and `√w` for an edge), then one row per block with `β`
/// on the block's vertices and target `β`. In robust mode every block row is
/// repeated `k + 1` times and rows `C̃ x_i = 0` are appended for each vertex;
/// `c_tilde` defaults to `1000 β`.
pub fn clique_gadget<T: Scalar>(
    g: &WeightedGraph,
    k: usize,
    w: u64,
    robust_mode: bool,
    c_tilde: Option<f64>,
) -> Result<CliqueGadget<T>> {
    let n = g.vertex_count();
    if k == 0 || n % k != 0 {
        return domain(format!("{n} vertices cannot be cut into {k} equal blocks"));
    }
    let alpha = build_alpha(g, w);
    let beta = build_beta(g, w);
    let delta = build_delta(g, w);
    let block = n / k;
    let copies = if robust_mode { k + 1 } else { 1 };
    let pairs = n * (n - 1) / 2;
    let rows = pairs + k * copies + if robust_mode { n } else { 0 };
    let mut a = DenseMatrix::zeros(rows, n);
    let mut b = vec![T::zero(); rows];

    let mut r = 0;
    for u in 0..n {
        for v in u + 1..n {
            let (entry, target) = match g.weight(u, v) {
                None => (2.0 * alpha, alpha),
                Some(we) => {
                    let s = (we as f64).sqrt();
                    (2.0 * s, s)
                }
            };
            a[(r, u)] = T::lit(entry);
            a[(r, v)] = T::lit(entry);
            b[r] = T::lit(target);
            r += 1;
        }
    }
    for blk in 0..k {
        for _ in 0..copies {
            for v in blk * block..(blk + 1) * block {
                a[(r, v)] = T::lit(beta);
            }
            b[r] = T::lit(beta);
            r += 1;
        }
    }
    let c_tilde = robust_mode.then(|| c_tilde.unwrap_or(1e3 * beta));
    if let Some(ct) = c_tilde {
        for v in 0..n {
            a[(r, v)] = T::lit(ct);
            r += 1;
        }
    }
    Ok(CliqueGadget {
        a,
        b,
        delta: T::lit(delta),
        alpha: T::lit(alpha),
        beta: T::lit(beta),
        c_tilde: c_tilde.map(T::lit),
        k,
    })
}

/// Equations `x_{i1} + x_{i2} − x_{i3} = rhs` over `vars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Max3LinInstance {
    pub vars: usize,
    pub equations: Vec<([usize; 3], i64)>,
    /// Bound `B` on `|rhs|`.
    pub bound: i64,
}

impl Max3LinInstance {
    pub fn new(vars: usize, equations: Vec<([usize; 3], i64)>, bound: i64) -> Result<Self> {
        for (idx, rhs) in &equations {
            if idx.iter().any(|&i| i >= vars) {
                return domain(format!("equation uses a variable outside 0..{vars}"));
            }
            if rhs.abs() > bound {
                return domain(format!("right-hand side {rhs} exceeds the bound {bound}"));
            }
        }
        Ok(Self { vars, equations, bound })
    }
}

/// Coefficient rows (`+1, +1, −1`, adding where indices repeat), the
/// right-hand sides as target, and `⌊eps · n⌋` ignored rows.
pub fn max3lin_to_robust<T: Scalar>(inst: &Max3LinInstance, eps: f64) -> Result<RobustInstance<T>> {
    let n = inst.equations.len();
    if n == 0 {
        return domain("MAX-3-LIN reduction needs at least one equation");
    }
    if !(0.0..=1.0).contains(&eps) {
        return domain(format!("eps must lie in [0, 1], got {eps}"));
    }
    let mut a = DenseMatrix::zeros(n, inst.vars);
    let mut b = Vec::with_capacity(n);
    for (r, ([i1, i2, i3], rhs)) in inst.equations.iter().enumerate() {
        a[(r, *i1)] += T::one();
        a[(r, *i2)] += T::one();
        a[(r, *i3)] -= T::one();
        b.push(T::lit(*rhs as f64));
    }
    let k = (eps * n as f64).floor() as usize;
    RobustInstance::new(a, b, k)
}
