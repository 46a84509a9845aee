//! Sorted-L1 penalized least squares (SLOPE).
//!
//! This crate holds the numerical core: Benjamini-Hochberg style tuning
//! sequences, the sorted-L1 norm and its proximal operator, an accelerated
//! proximal gradient solver with a duality-gap certificate, support
//! diagnostics built on the `H_r` characterization of the selected model
//! size, seeded data generation and selection metrics.
//!
//! Everything here is `no_std` with `alloc`; file formats, the Monte Carlo
//! harness and the command line live in the `slope` crate.

#![no_std]
// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod datagen;
pub mod diagnostics;
mod error;
pub mod linalg;
pub mod metrics;
pub mod normal;
pub mod seqgen;
pub mod solver;
pub mod sorted_l1;

pub use datagen::{generate, generate_orthogonal, GeneratorSpec};
pub use diagnostics::{verify_theorems, QEventReport, SupportDiagnostics};
pub use error::{Error, Result};
pub use linalg::DesignMatrix;
pub use metrics::{bh_orthogonal, fdr_decomposition, selection_metrics, SelectionMetrics};
pub use seqgen::{lambda_bh, lambda_constant, lambda_heuristic, LambdaSequence, SequenceKind};
pub use solver::{solve_slope, support, Dataset, SlopeSolution, SolverOptions, Tolerance};
pub use sorted_l1::{prox_sorted_l1, soft_threshold, sorted_l1_norm};
