//! Spectral Galerkin solver for the rotating-stratified Boussinesq system
//! written in Craya-Herring amplitude variables.
//!
//! The crate is layered bottom-up:
//!
//! * [`lattice`] builds truncated sum-closed frequency sets and their
//!   anisotropic dilations, with exact squared norms.
//! * [`basis`] evaluates the per-mode Craya-Herring frame, the extended
//!   Leray projector and the amplitude decomposition.
//! * [`resonance`] decides triad resonances with exact arithmetic and runs
//!   the admissibility scan and the restricted-convolution census.
//! * [`interaction`] precomputes triad coefficients and evaluates the
//!   resonant, oscillatory and antiderivative bilinear forms.
//! * [`dynamics`] integrates the full, limit, QG and 2D-type systems and
//!   provides physical-space reconstruction and diagnostics.

pub mod basis;
pub mod dynamics;
mod error;
pub mod interaction;
pub mod lattice;
pub mod resonance;

pub use error::{Error, Result};

pub use num_complex::Complex64;
