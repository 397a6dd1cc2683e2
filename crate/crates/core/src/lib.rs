//! Exhaustive and meet-in-the-middle solvers for sparse regression, robust
//! regression and sparse PCA, with the hardness gadgets, baselines and
//! brute-force oracles used to check them.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`.

pub mod ann;
pub mod baselines;
pub mod error;
pub mod instances;
pub mod nets;
pub mod numlin;
pub mod planted;
pub mod reductions;
pub mod robust_reg;
pub mod scalar;
pub mod sparse_pca;
pub mod sparse_reg;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = numlin::DenseMatrix<f64>;
pub type Sparse = sparse_reg::SparseVector<f64>;
pub type SparseRegression = sparse_reg::SparseRegInstance<f64>;
pub type SparseRegResult = sparse_reg::SparseRegSolution<f64>;
pub type RobustRegression = robust_reg::RobustInstance<f64>;
pub type RobustResult = robust_reg::RobustSolution<f64>;
pub type SparsePca = sparse_pca::PcaInstance<f64>;
pub type SparsePcaResult = sparse_pca::PcaSolution<f64>;
pub type Planted = planted::PlantedInstance<f64>;
pub type Lp = planted::LinearProgram<f64>;
