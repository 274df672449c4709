//! Global-control compilation for mirror-encoded chains of d-level systems.
//!
//! A chain of `N` q-sites is driven only by homogeneous operations: a
//! Fourier layer, a nearest-neighbour controlled-phase layer, Pauli pulses
//! `P(eps)` and global Hamiltonian pulses. Site addressability comes from
//! timing: pulses interleaved with the step operator `T` leave site-dependent
//! phases, and combining them cancels everything except a chosen site and its
//! mirror image.
//!
//! Modules, bottom-up:
//!
//! * [`weyl`]: generalized Pauli operators, Hermitian basis, decomposition.
//! * [`tableau`]: exact exponent-vector evolution of Pauli words.
//! * [`pulses`]: exact pulse-strength solver for single-site peaks.
//! * [`simulator`]: dense state-vector engine, the ground-truth oracle.
//! * [`compiler`]: logical circuits to global pulse programs.
//! * [`cvapprox`]: Fourier-series gate synthesis for continuous variables.

pub mod compiler;
pub mod cvapprox;
mod error;
pub mod linalg;
pub mod modlin;
pub mod pulses;
pub mod ring;
pub mod simulator;
pub mod tableau;
pub mod weyl;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
