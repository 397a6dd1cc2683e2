//! Scalar abstraction shared by every solver.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real floating point scalar: `f32` or `f64`.
///
/// Tolerances that the kernels need are exposed per type, because a relative
/// rank cutoff of `1e-10` is meaningful for `f64` but below `f32` resolution.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Singular values at or below `rank_tol * sigma_max` count as zero.
    fn rank_tol() -> Self;

    /// Orthogonality tolerance used by post-condition checks.
    fn orth_tol() -> Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn rank_tol() -> Self {
        1e-10
    }

    fn orth_tol() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn rank_tol() -> Self {
        1e-5
    }

    fn orth_tol() -> Self {
        1e-4
    }
}
