//! File formats, the Monte Carlo harness and plotting on top of
//! [`slope_core`].
//!
//! Matrices and vectors are plain CSV without a header (one row per line,
//! vectors one value per line) and every number is written with 12
//! significant digits.

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod experiments;
pub mod io;
pub mod plot;

pub use error::{Error, Result};
pub use experiments::{
    run_grid, AmplitudeRule, DesignKind, ExperimentConfig, ExperimentReport, Method, ReportRow,
};
