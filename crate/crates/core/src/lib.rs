//! Inverse Zakharov-Shabat scattering by the generalized Toeplitz
//! inner-bordering (GTIB) method.
//!
//! The potential `q(t)` is reconstructed from left or right spectral data by
//! discretizing the Gelfand-Levitan-Marchenko equations on a uniform grid
//! into a block-Toeplitz system with 2x2 blocks. The system is solved once at
//! a start point with a block Levinson recursion and then bordered one row
//! at a time, which advances the recovery point by half a kernel step at
//! `O(n)` cost per point.
//!
//! Solitons are the hard part: their kernel contributions grow
//! exponentially, so recovery far from a soliton's center becomes unstable.
//! [`cutter`] splits the time axis into stability zones, removes solitons
//! from the kernel outside their zones and stitches the per-zone marches
//! back together.
//!
//! Module map:
//! - [`spectral`]: spectral data and kernel synthesis
//! - [`glme`]: block-Toeplitz assembly, Levinson solve and bordering march
//! - [`cutter`]: stability zones, cut plans and multi-segment recovery
//! - [`oracles`]: reference signals, forward scattering and a dense solver
//! - [`metrics`]: pointwise/RMS errors and convergence sweeps
//! - [`scenarios`]: the reference experiment configurations

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cutter;
pub mod error;
pub mod glme;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod oracles;
pub mod scenarios;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{Signal, TimeGrid};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
