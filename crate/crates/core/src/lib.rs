//! Dense state-vector and density-matrix simulation of small ion-trap
//! graph-state experiments.
//!
//! Qubit 0 is always the most significant bit of a basis index. States are
//! compared through fidelities, so global phases never matter.

pub mod bell;
pub mod correction;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod mbqc;
pub mod pauli;
pub mod pulse;
pub mod qec;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
pub use state::{DensityMatrix, StateVector};
pub use num_complex::Complex64 as C64;
