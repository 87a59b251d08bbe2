//! Low-rank and positive-semidefinite affinity learning for subspace segmentation.
//!
//! The crate learns a coefficient matrix `Z` with `X = XZ (+ E)` whose nuclear norm is
//! minimal, optionally constraining `Z` to the PSD cone, and feeds it to normalized
//! spectral clustering. Modules:
//!
//! - [`linalg`]: dense matrix type, symmetric eigen-decomposition, SVD, norms, rank.
//! - [`prox`]: closed-form proximal maps (SVT, PSD eigenvalue thresholding, shrinkage).
//! - [`solver`]: closed-form clean solution and inexact ALM for the robust problems.
//! - [`segmentation`]: affinities, spectral clustering and accuracy scoring.
//! - [`data`]: synthetic union-of-subspaces generator, corruption, CSV I/O.
//! - [`cli`]: experiment harness behind the `lowrankseg` binary.

pub mod cli;
pub mod data;
mod error;
pub mod linalg;
pub mod prox;
pub mod segmentation;
pub mod solver;

pub use error::{Error, Result, Step};
pub use linalg::Mat;
