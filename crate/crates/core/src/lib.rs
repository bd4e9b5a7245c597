//! Wave-packet tunneling through a rectangular barrier.
//!
//! The transmitted wave of a packet that starts entirely left of the barrier is a
//! sequence of sub-packets: the `l`-th leaves attenuated by `exp(-d(2l+1)γ)` and
//! lagging the freely evolved packet by `2(1+2l)ħ/sqrt(2mV - p0²)`. This crate
//! evaluates those closed forms, the compact-support packet family they are
//! checked against, the inverse-Laplace machinery behind the series, and an
//! independent Crank–Nicolson solver used as the brute-force oracle.
//!
//! Everything inside the crate is dimensionless: `ħ = m = a = 1`, lengths in
//! units of `√a`, momenta in `ħ/√a`, times in `m a/ħ`, energies in `ħ²/(m a)`.
//! [`units::PhysicalScales`] converts at the boundaries.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analytic;
pub mod error;
pub mod laplace;
pub mod oracle;
pub mod packet;
pub mod quad;
pub mod specfun;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Crate version embedded in every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
