//! Capacitance operators of periodic subwavelength-resonator lattices,
//! their Bloch spectra, and exponentially localized gap solitons of
//!
//! ```text
//! C a + V a - λ (1 + σ |a|²) a = 0.
//! ```
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! any parallel orchestration live in the `capgap` companion crate.
//!
//! Module map:
//! - [`lattice`]: lattice geometry, block stencils, fields on index windows,
//!   defects, the half-space operator and the nonlinear residual.
//! - [`cell`]: capacitance stencils from disk geometry via quasi-periodic
//!   Laplace cell problems.
//! - [`spectrum`]: Bloch fibers, band structures, gaps and spectral projectors.
//! - [`soliton`]: energy functional, linking construction, Newton refinement,
//!   k-sweeps, decay fits and certification.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cell;
pub mod dft;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod linalg;
pub mod soliton;
pub mod spectrum;

pub use error::{Error, Result};
pub use lattice::{BlockStencil, DiagonalDefect, HalfSpaceStencil, LatticeField, LatticeGeometry, Site, Window};

/// Complex scalar used for all field values.
pub type Complex = num_complex::Complex64;
