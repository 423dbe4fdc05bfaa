//! Numerical laboratory for the overlap of quantum-walk POVMs.
//!
//! The crate builds the Hadamard walk on a cycle, the measurement pair
//! `W = {|w0><w0|, I - |w0><w0|}` and `Z = {I_C (x) |j><j|}`, computes their
//! overlap through operator norms, and evaluates the key-length formulas of
//! the standard and sampling-based entropic uncertainty relations.
//!
//! Modules, bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Jacobi Hermitian eigensolver,
//!   operator norm.
//! - [`walk`]: shift/walk operators, state evolution, position statistics.
//! - [`povm`]: POVM construction and validation, overlaps, analytic spectra.
//! - [`entropy`]: entropy functions, sampling error, key lengths.
//! - [`sweep`]: experiment specs, sweeps, invariant verification, CSV/JSON output.

pub mod entropy;
pub mod error;
pub mod linalg;
pub mod povm;
pub mod sweep;
pub mod walk;

pub use error::{Error, Result};
pub use num_complex::Complex64;
