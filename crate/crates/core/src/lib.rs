//! Bootstrap of sample-covariance eigenvalues in high dimension.
//!
//! The crate bundles four layers:
//!
//! * [`spectral`]: covariance formation, top-k and full eigenvalues, the
//!   empirical Stieltjes transform;
//! * [`datagen`]: spiked Gaussian and elliptical data with keyed random streams;
//! * [`bootstrap`]: row-resampling bootstrap of spectral statistics with
//!   bias, variance and confidence intervals;
//! * [`rmt`]: Marchenko–Pastur and weighted Stieltjes solvers, edge and spike
//!   formulas, concentration and perturbation bounds;
//!
//! and the [`harness`] that runs the Monte-Carlo study over a grid of
//! `(law, p/n, spike)` cells and writes CSV/JSON tables.

// `!(x > 0.0)` is used throughout on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod rmt;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use rng::RngStream;
pub use spectral::{
    empirical_stieltjes, full_spectrum, sample_covariance, top_eigenvalues, weighted_covariance, CovarianceOptions,
    DataMatrix, Divisor, SpectralSummary,
};
