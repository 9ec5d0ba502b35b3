//! Direct and inverse q-Sturm-Liouville spectral problems on the geometric
//! lattice `{a q^n}`.
//!
//! The crate computes eigenvalues, eigenfunctions and norming constants of the
//! q-difference Sturm-Liouville operator with Robin-type endpoint conditions,
//! solves the associated Gelfand-Levitan integral equation to rebuild a
//! potential and boundary data from spectral data, and packages both halves as
//! executable round-trip checks.

pub mod cli;
pub mod direct;
pub mod error;
pub mod gl;
pub mod harness;
pub mod qcore;
pub mod qspecial;
pub mod spectral;

pub use error::{QslError, Result};
