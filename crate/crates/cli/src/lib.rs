//! Batch front-end for the `sparsefit` solvers.

pub mod bench;
pub mod generate;
pub mod instance_file;
pub mod solve;
pub mod verify;

pub use instance_file::{InstanceFile, Kind};
pub use solve::{solve, RunReport, SolveOptions, Verdict};
