//! Schur measures on partitions with Haar-random unitary (CUE) disorder.
//!
//! The crate is organized bottom-up:
//!
//! - [`partitions`]: partitions, the particle bijection, enumeration
//! - [`symfunc`]: Schur polynomials, Littlewood–Richardson multiplicities
//! - [`cue`]: Haar spectra, cyclotomic spectra, power traces
//! - [`measure`]: partition function, free energy, probabilities for one
//!   disorder realization
//! - [`exact`]: closed forms for expectations, the disorder gap, moments and
//!   the finite-`N` variance
//! - [`scaling`]: near-critical constants `μ_c`, `ν_c`, `σ_c²`
//! - [`montecarlo`]: reproducible replicate harness and verification suites
//!
//! Replicate loops run on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise; results are identical either way.

pub mod cue;
pub mod error;
pub mod exact;
pub mod io;
pub mod measure;
pub mod montecarlo;
pub mod par;
pub mod partitions;
pub mod quad;
pub mod rng;
pub mod scaling;
pub mod special;
pub mod symfunc;

pub use error::{Error, Result};
