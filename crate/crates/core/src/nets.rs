//! ε-nets over the unit interval, Euclidean balls and column-subset images.
//!
//! All nets are axis-aligned grids. A grid of spacing `2δ/√k` in `R^k` puts
//! every point within `δ` of its nearest lattice point, so keeping the lattice
//! points inside the ball inflated by `δ` covers the ball.

use crate::error::{domain, Error, Result};
use crate::numlin::{DenseMatrix, Svd};
use crate::scalar::Scalar;

/// Default refusal threshold on the predicted number of grid points.
pub const DEFAULT_NET_CAP: u128 = 100_000_000;

/// Parameters of a ball net: dimension, ball radius and covering radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetSpec<T> {
    pub ambient_dim: usize,
    pub radius: T,
    pub delta: T,
}

impl<T: Scalar> NetSpec<T> {
    pub fn new(ambient_dim: usize, radius: T, delta: T) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return domain(format!("net covering radius must be positive, got {delta}"));
        }
        if !(radius >= T::zero()) || !radius.is_finite() {
            return domain(format!("net radius must be non-negative, got {radius}"));
        }
        Ok(Self {
            ambient_dim,
            radius,
            delta,
        })
    }

    fn spacing(&self) -> T {
        let two = T::one() + T::one();
        two * self.delta / T::from_usize_lossy(self.ambient_dim.max(1)).sqrt()
    }

    fn half_width(&self) -> i64 {
        let reach = (self.radius + self.delta) * (T::one() + T::lit(1e-12));
        (reach / self.spacing()).floor().to_i64().unwrap_or(i64::MAX / 4)
    }

    /// Number of lattice points in the bounding cube; an upper bound on the
    /// net size, used for the capacity guard.
    pub fn predicted_count(&self) -> u128 {
        let side = 2 * self.half_width() as u128 + 1;
        let mut total: u128 = 1;
        for _ in 0..self.ambient_dim {
            total = total.saturating_mul(side);
        }
        total
    }

    pub fn points(&self, cap: u128) -> Result<Vec<Vec<T>>> {
        let predicted = self.predicted_count();
        if predicted > cap {
            return Err(Error::Capacity { predicted, cap });
        }
        let dim = self.ambient_dim;
        if dim == 0 {
            return Ok(vec![Vec::new()]);
        }
        let h = self.spacing();
        let m = self.half_width();
        let reach = (self.radius + self.delta) * (T::one() + T::lit(1e-12));
        let reach_sq = reach * reach;

        let mut out = Vec::new();
        let mut idx = vec![-m; dim];
        loop {
            let p: Vec<T> = idx
                .iter()
                .map(|&i| h * T::from_i64(i).expect("grid index"))
                .collect();
            if p.iter().map(|&x| x * x).sum::<T>() <= reach_sq {
                out.push(p);
            }
            // Odometer increment, last coordinate fastest.
            let mut pos = dim;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                if idx[pos] < m {
                    idx[pos] += 1;
                    break;
                }
                idx[pos] = -m;
            }
        }
    }
}

/// Points `δ, 3δ, 5δ, …` clipped to `[0, 1]`; every `t ∈ [0, 1]` lies within
/// `δ` of one of them.
pub fn interval_net<T: Scalar>(delta: T) -> Result<Vec<T>> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return domain(format!("interval net needs delta > 0, got {delta}"));
    }
    let two = T::one() + T::one();
    let count = ((T::one() / (two * delta)) - T::lit(1e-9))
        .ceil()
        .max(T::one())
        .to_usize()
        .expect("interval net count");
    Ok((0..count)
        .map(|i| (T::from_usize_lossy(2 * i + 1) * delta).min(T::one()))
        .collect())
}

/// δ-net of the ball of the given radius in `R^dim`.
pub fn ball_net<T: Scalar>(dim: usize, radius: T, delta: T) -> Result<Vec<Vec<T>>> {
    ball_net_capped(dim, radius, delta, DEFAULT_NET_CAP)
}

pub fn ball_net_capped<T: Scalar>(
    dim: usize,
    radius: T,
    delta: T,
    cap: u128,
) -> Result<Vec<Vec<T>>> {
    NetSpec::new(dim, radius, delta)?.points(cap)
}

/// A point `b′ = A_T y` of an image net, with its coefficients and support.
#[derive(Debug, Clone, PartialEq)]
pub struct NetEntry<T> {
    pub image_point: Vec<T>,
    pub coeffs: Vec<T>,
    pub support: Vec<usize>,
}

/// δ-net of `{A_T y : ‖A_T y‖₂ ≤ radius}`.
///
/// The net is a ball net in the coordinates of an orthonormal basis of the
/// column span of `A_T`; coefficients are the minimum-norm preimages.
pub fn image_net<T: Scalar>(
    a: &DenseMatrix<T>,
    support: &[usize],
    radius: T,
    delta: T,
    cap: u128,
) -> Result<Vec<NetEntry<T>>> {
    if let Some(&bad) = support.iter().find(|&&j| j >= a.cols()) {
        return domain(format!("support index {bad} out of range for {} columns", a.cols()));
    }
    let sub = a.select_columns(support);
    let svd = Svd::new(&sub);
    let r = svd.rank();
    let coords = NetSpec::new(r, radius, delta)?.points(cap)?;

    let n = a.rows();
    let t = support.len();
    Ok(coords
        .into_iter()
        .map(|g| {
            let image_point: Vec<T> = (0..n)
                .map(|i| (0..r).map(|k| svd.u[(i, k)] * g[k]).sum())
                .collect();
            let coeffs: Vec<T> = (0..t)
                .map(|j| (0..r).map(|k| svd.v[(j, k)] * g[k] / svd.s[k]).sum())
                .collect();
            NetEntry {
                image_point,
                coeffs,
                support: support.to_vec(),
            }
        })
        .collect())
}

/// Size of an image net over a support of the given rank, without building it.
pub fn image_net_size<T: Scalar>(rank: usize, radius: T, delta: T) -> Result<usize> {
    Ok(NetSpec::new(rank, radius, delta)?.points(DEFAULT_NET_CAP)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::{dist2, norm2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nearest(net: &[Vec<f64>], p: &[f64]) -> f64 {
        net.iter().map(|q| dist2(q, p)).fold(f64::INFINITY, f64::min)
    }

    fn uniform_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
        loop {
            let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-radius..=radius)).collect();
            if norm2(&p) <= radius {
                return p;
            }
        }
    }

    #[test]
    fn interval_examples() {
        assert_eq!(interval_net(0.5).unwrap(), vec![0.5]);
        assert_eq!(interval_net(0.25).unwrap(), vec![0.25, 0.75]);
        let net = interval_net(0.1).unwrap();
        assert_eq!(net.len(), 5);
        for i in 0..=1000 {
            let t = i as f64 * 1e-3;
            let d = net.iter().map(|p| (p - t).abs()).fold(f64::INFINITY, f64::min);
            assert!(d <= 0.1 + 1e-12, "t = {t} uncovered");
        }
        assert!(interval_net(0.0).is_err());
        assert!(interval_net(-1.0).is_err());
    }

    #[test]
    fn interval_uneven_delta_clips_to_one() {
        let net = interval_net(0.3f64).unwrap();
        assert_eq!(net.len(), 2);
        assert!((net[1] - 0.9).abs() < 1e-15);
        let net = interval_net(0.4).unwrap();
        assert_eq!(net, vec![0.4, 1.0]);
    }

    #[test]
    fn ball_net_single_point() {
        let net = ball_net(1, 1.0, 2.0).unwrap();
        assert_eq!(net, vec![vec![0.0]]);
    }

    #[test]
    fn ball_net_2d_covering_and_count() {
        let net = ball_net(2, 1.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let p = uniform_ball(&mut rng, 2, 1.0);
            assert!(nearest(&net, &p) <= 0.5 + 1e-12);
        }
        // Independent count: lattice (h i, h j), h = 1/sqrt(2), kept iff
        // h^2 (i^2 + j^2) <= 1.5^2, i.e. i^2 + j^2 <= 4.5.
        let mut count = 0;
        for i in -5i32..=5 {
            for j in -5i32..=5 {
                if 2 * (i * i + j * j) <= 9 {
                    count += 1;
                }
            }
        }
        assert_eq!(net.len(), count);
    }

    #[test]
    fn ball_net_capacity_guard() {
        let err = ball_net_capped(6, 1.0, 0.01, 1_000).unwrap_err();
        assert!(matches!(err, Error::Capacity { cap: 1_000, .. }));
    }

    #[test]
    fn image_net_unit_column() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let net = image_net(&a, &[0], 1.0, 2.0, DEFAULT_NET_CAP).unwrap();
        assert_eq!(net.len(), 1);
        assert!(norm2(&net[0].image_point) == 0.0);
    }

    #[test]
    fn image_net_identity_covering_and_reconstruction() {
        let a = DenseMatrix::<f64>::identity(2);
        let net = image_net(&a, &[0, 1], 1.0, 0.3, DEFAULT_NET_CAP).unwrap();
        let images: Vec<Vec<f64>> = net.iter().map(|e| e.image_point.clone()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let p = uniform_ball(&mut rng, 2, 1.0);
            assert!(nearest(&images, &p) <= 0.3 + 1e-12);
        }
        for e in &net {
            let rec = a.select_columns(&e.support).matvec(&e.coeffs).unwrap();
            assert!(dist2(&rec, &e.image_point) <= 1e-10);
        }
    }

    #[test]
    fn image_net_rejects_bad_support() {
        let a = DenseMatrix::<f64>::identity(2);
        assert!(image_net(&a, &[2], 1.0, 0.3, DEFAULT_NET_CAP).is_err());
    }

    #[test]
    fn nets_are_deterministic() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [0.5, -1.0], [3.0, 0.0]]).unwrap();
        let first = image_net(&a, &[0, 1], 2.0, 0.4, DEFAULT_NET_CAP).unwrap();
        let second = image_net(&a, &[0, 1], 2.0, 0.4, DEFAULT_NET_CAP).unwrap();
        let bits = |net: &[NetEntry<f64>]| -> Vec<u64> {
            net.iter()
                .flat_map(|e| e.image_point.iter().chain(&e.coeffs).map(|v| v.to_bits()))
                .collect()
        };
        assert_eq!(bits(&first), bits(&second));
    }
}
