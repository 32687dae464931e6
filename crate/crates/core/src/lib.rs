//! Quantum adaptive importance sampling with a classically simulated
//! proposal circuit, gap tiling for debiasing, and a VEGAS baseline.
//!
//! Grid axes are stored in axis order `[x_1, .., x_d]`; axis 1 occupies the
//! least-significant bit block of a linear cell index.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod grid;
pub mod sobol;
pub mod statevector;
pub mod stats;
pub mod target;
pub mod tiling;
pub mod train;
pub mod vegas;

pub use error::{Error, Result};
pub use grid::{GridSpec, HyperRect};
pub use statevector::{run_ansatz, AnsatzSpec, ParamVector, ShotCounts, StateVector};
pub use target::{Integrand, TargetPmf};
