//! Digital twin of a phase-encoding, intensity-detection optical Ising annealer.
//!
//! The pipeline runs from an Ising coupling matrix to a complex transform `A`
//! (with `AᵀA = J`), through a modified simulated-annealing loop whose
//! Hamiltonian evaluations go through one of four tiers:
//!
//! * [`optics::ExactEvaluator`]: the quadratic form `−½σᵀJσ`.
//! * [`optics::IdealOptical`]: signed intensities of `Aσ`.
//! * [`optics::NoisyOptical`]: the same intensities through a camera noise model.
//! * [`holography::PhysicalOptical`]: scalar diffraction through three SLMs and a pinhole.
//!
//! The [`calibration`] module recovers programmed-vs-actual transform errors
//! from intensity measurements only.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anneal;
pub mod calibration;
pub mod error;
pub mod holography;
pub mod ising;
pub mod optics;

pub use error::{Error, Result};
pub use num_complex::Complex64;
