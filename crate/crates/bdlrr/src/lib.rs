//! Block-diagonal low-rank representation learning.
//!
//! A training set whose columns are sorted by class admits a
//! self-expressive representation that is ideally block-diagonal: every
//! sample is reconstructed from samples of its own class. This crate
//! learns such representations jointly for training and test data with an
//! ADMM solver that combines a nuclear-norm term, an off-block shrinkage
//! term, a distance-weighted sparsity term and row-group noise
//! separation; classifies through a closed-form ridge model on the learned
//! coefficients; and extends to unseen instances with an elastic-net
//! proximal-gradient solve against the fixed training dictionary.
//!
//! Robust PCA and plain low-rank representation solvers are included as
//! baselines, along with a seeded union-of-subspaces generator and an
//! experiment harness. The `bdlrr` binary exposes all of it on the
//! command line.

pub mod baselines;
pub mod classifier;
pub mod data;
pub mod error;
pub mod io;
pub mod matrix;
pub mod oos;
pub mod prox;
pub mod solver;
pub mod structure;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, SvdResult};
pub use solver::{BdlrrSolution, ConvergenceHistory, SolverConfig, SolverState};
pub use structure::ClassPartition;
