//! Dense two-phase tableau simplex with Bland's rule.

use crate::error::{check_dim, domain, Error, Result};
use crate::numlin::DenseMatrix;
use crate::scalar::Scalar;

/// `min cᵀx` subject to `A_eq x = b_eq`, `A_ub x ≤ b_ub` and per-variable
/// bounds. A `None` bound is infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub c: Vec<T>,
    pub a_eq: DenseMatrix<T>,
    pub b_eq: Vec<T>,
    pub a_ub: DenseMatrix<T>,
    pub b_ub: Vec<T>,
    pub bounds: Vec<(Option<T>, Option<T>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    pub pivots: usize,
}

impl<T: Scalar> LinearProgram<T> {
    /// Objective only; every variable starts nonnegative.
    pub fn new(c: Vec<T>) -> Self {
        let n = c.len();
        LinearProgram {
            c,
            a_eq: DenseMatrix::zeros(0, n),
            b_eq: Vec::new(),
            a_ub: DenseMatrix::zeros(0, n),
            b_ub: Vec::new(),
            bounds: vec![(Some(T::zero()), None); n],
        }
    }

    pub fn with_eq(mut self, a: DenseMatrix<T>, b: Vec<T>) -> Self {
        self.a_eq = a;
        self.b_eq = b;
        self
    }

    pub fn with_ub(mut self, a: DenseMatrix<T>, b: Vec<T>) -> Self {
        self.a_ub = a;
        self.b_ub = b;
        self
    }

    pub fn with_bounds(mut self, bounds: Vec<(Option<T>, Option<T>)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn vars(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vars();
        check_dim("lp equality columns", n, self.a_eq.cols())?;
        check_dim("lp equality rhs", self.a_eq.rows(), self.b_eq.len())?;
        check_dim("lp inequality columns", n, self.a_ub.cols())?;
        check_dim("lp inequality rhs", self.a_ub.rows(), self.b_ub.len())?;
        check_dim("lp bounds", n, self.bounds.len())?;
        for &(lo, hi) in &self.bounds {
            if let (Some(l), Some(h)) = (lo, hi) {
                if l > h {
                    return domain("lower bound above upper bound");
                }
            }
        }
        Ok(())
    }
}

fn tol<T: Scalar>() -> T {
    T::orth_tol() * T::lit(10.0)
}

/// Original variable `j` equals `offset + Σ coef · y_col`.
struct VarMap<T> {
    offset: T,
    terms: Vec<(usize, T)>,
}

struct Tableau<T> {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<T>>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != T::zero() {
                for (v, &q) in row.iter_mut().zip(&prow) {
                    *v -= f * q;
                }
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn reduced_costs(&self, cost: &[T]) -> Vec<T> {
        let mut d = cost.to_vec();
        d.push(T::zero());
        for (row, &bv) in self.t.iter().zip(&self.basis) {
            let cb = cost[bv];
            if cb != T::zero() {
                for (dj, &a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Bland's rule over columns `< allowed`.
    fn optimize(&mut self, cost: &[T], allowed: usize) -> Result<()> {
        let eps = tol::<T>();
        let rhs = self.cols;
        let mut d = self.reduced_costs(cost);
        loop {
            let Some(enter) = (0..allowed).find(|&j| d[j] < -eps) else {
                return Ok(());
            };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[enter];
                if a > eps {
                    let ratio = row[rhs] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - eps || (ratio <= lr + eps && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, enter);
            let f = d[enter];
            for (dj, &q) in d.iter_mut().zip(&self.t[r]) {
                *dj -= f * q;
            }
        }
    }
}

/// Vertex optimum of `lp`, or [`Error::Infeasible`] / [`Error::Unbounded`].
pub fn lp_solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    lp.validate()?;
    let n = lp.vars();
    let eps = tol::<T>();

    // Standard form: every structural column is a nonnegative variable.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut box_rows: Vec<(usize, T)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        let m = match (lo, hi) {
            (Some(l), h) => {
                if let Some(h) = h {
                    box_rows.push((ncols, h - l));
                }
                ncols += 1;
                VarMap { offset: l, terms: vec![(ncols - 1, T::one())] }
            }
            (None, Some(h)) => {
                ncols += 1;
                VarMap { offset: h, terms: vec![(ncols - 1, -T::one())] }
            }
            (None, None) => {
                ncols += 2;
                VarMap { offset: T::zero(), terms: vec![(ncols - 2, T::one()), (ncols - 1, -T::one())] }
            }
        };
        maps.push(m);
    }
    let structural = ncols;
    let slacks = lp.a_ub.rows() + box_rows.len();
    let ncols = structural + slacks;

    let mut rows: Vec<(Vec<T>, T)> = Vec::new();
    let expand = |coeffs: &[T], rhs: T| -> (Vec<T>, T) {
        let mut row = vec![T::zero(); ncols];
        let mut r = rhs;
        for (j, &a) in coeffs.iter().enumerate() {
            r -= a * maps[j].offset;
            for &(col, s) in &maps[j].terms {
                row[col] += a * s;
            }
        }
        (row, r)
    };
    for i in 0..lp.a_eq.rows() {
        rows.push(expand(lp.a_eq.row(i), lp.b_eq[i]));
    }
    for i in 0..lp.a_ub.rows() {
        let (mut row, r) = expand(lp.a_ub.row(i), lp.b_ub[i]);
        row[structural + i] = T::one();
        rows.push((row, r));
    }
    for (k, &(col, width)) in box_rows.iter().enumerate() {
        let mut row = vec![T::zero(); ncols];
        row[col] = T::one();
        row[structural + lp.a_ub.rows() + k] = T::one();
        rows.push((row, width));
    }

    // Phase one: one artificial per row.
    let m = rows.len();
    let total = ncols + m;
    let mut tab = Tableau {
        t: Vec::with_capacity(m),
        basis: (ncols..total).collect(),
        cols: total,
        pivots: 0,
    };
    for (i, (mut row, mut r)) in rows.into_iter().enumerate() {
        if r < T::zero() {
            row.iter_mut().for_each(|v| *v = -*v);
            r = -r;
        }
        row.resize(total + 1, T::zero());
        row[ncols + i] = T::one();
        row[total] = r;
        tab.t.push(row);
    }
    let mut cost1 = vec![T::zero(); total];
    cost1[ncols..].iter_mut().for_each(|c| *c = T::one());
    tab.optimize(&cost1, total)?;
    let infeas: T = tab.t.iter().zip(&tab.basis).filter(|(_, &b)| b >= ncols).map(|(row, _)| row[total]).sum();
    let scale = tab.t.iter().fold(T::one(), |s, row| s.max(row[total].abs()));
    if infeas > eps * scale {
        return Err(Error::Infeasible);
    }

    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= ncols {
            match (0..ncols).find(|&j| tab.t[i][j].abs() > eps) {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut cost2 = vec![T::zero(); total];
    for (j, map) in maps.iter().enumerate() {
        for &(col, s) in &map.terms {
            cost2[col] += lp.c[j] * s;
        }
    }
    tab.optimize(&cost2, ncols)?;

    let mut y = vec![T::zero(); ncols];
    for (row, &bv) in tab.t.iter().zip(&tab.basis) {
        y[bv] = row[total];
    }
    let x: Vec<T> = maps
        .iter()
        .map(|m| m.terms.iter().fold(m.offset, |acc, &(col, s)| acc + s * y[col]))
        .collect();
    let objective = x.iter().zip(&lp.c).map(|(&a, &b)| a * b).sum();
    Ok(LpSolution { x, objective, pivots: tab.pivots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_is_optimal() {
        let lp = LinearProgram::new(vec![1.0f64]).with_bounds(vec![(Some(3.0), None)]);
        let s = lp_solve(&lp).unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_objective_feasible_point() {
        let lp = LinearProgram::new(vec![0.0f64]).with_eq(DenseMatrix::from_rows(&[[1.0]]).unwrap(), vec![1.0]);
        let s = lp_solve(&lp).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn infeasible_and_unbounded_are_distinct() {
        let bad = LinearProgram::new(vec![1.0f64]).with_ub(DenseMatrix::from_rows(&[[1.0]]).unwrap(), vec![-1.0]);
        assert_eq!(lp_solve(&bad), Err(Error::Infeasible));
        let open = LinearProgram::new(vec![-1.0f64]);
        assert_eq!(lp_solve(&open), Err(Error::Unbounded));
    }

    #[test]
    fn free_and_upper_bounded_variables() {
        // min x + y with x free, x ≥ −2 from a row, y ≤ 5 and y ≥ 1 via bounds.
        let lp = LinearProgram::new(vec![1.0f64, 1.0])
            .with_ub(DenseMatrix::from_rows(&[[-1.0, 0.0]]).unwrap(), vec![2.0])
            .with_bounds(vec![(None, None), (Some(1.0), Some(5.0))]);
        let s = lp_solve(&lp).unwrap();
        assert!((s.x[0] + 2.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        let lp = LinearProgram::new(vec![0.0f64, -1.0]).with_bounds(vec![(Some(0.0), None), (None, Some(5.0))]);
        assert!((lp_solve(&lp).unwrap().x[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let a = DenseMatrix::from_rows(&[[1.0f64, 1.0], [2.0, 2.0]]).unwrap();
        let lp = LinearProgram::new(vec![1.0, 2.0]).with_eq(a, vec![1.0, 2.0]);
        let s = lp_solve(&lp).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under the textbook largest-coefficient rule.
        let a = DenseMatrix::from_rows(&[
            [0.25f64, -60.0, -0.04, 9.0],
            [0.5, -90.0, -0.02, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let lp = LinearProgram::new(vec![-0.75, 150.0, -0.02, 6.0]).with_ub(a, vec![0.0, 0.0, 1.0]);
        let s = lp_solve(&lp).unwrap();
        assert!((s.objective + 0.05).abs() < 1e-9);
    }
}
