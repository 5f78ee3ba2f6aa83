//! Mirror integrals for full flag varieties.
//!
//! The crate builds the Lie-theoretic mirror datum of `G/B` (fibers `Z_h` in
//! reduced-word charts, the superpotential, the holomorphic volume form and
//! the two distinguished integration cycles) and checks numerically that the
//! resulting period integrals are annihilated by the quantum Toda Hamiltonian.
//! It also locates the totally positive and totally negative critical points
//! of the superpotential and cross-checks them against the Kim and Peterson
//! presentations of quantum cohomology.
//!
//! Module map:
//!
//! * [`rootsys`]: Cartan data, roots, Weyl words, braid moves, invariant form.
//! * [`reps`]: exact fundamental representations and the matrix model of `G`.
//! * [`chevgroup`]: coefficient functionals, Gaussian decompositions,
//!   factorization along reduced words, total positivity.
//! * [`mirror`]: mirror points, superpotential, volume-form pullbacks,
//!   Whittaker vectors.
//! * [`integrate`]: compact torus and totally positive cycles, quadrature.
//! * [`toda`]: the Hamiltonian as a finite-difference operator, Bessel oracles.
//! * [`crit`]: critical points, Kim invariants, Peterson check.
//! * [`cli`]: command-line front end.

pub mod chevgroup;
pub mod cli;
pub mod crit;
pub mod error;
pub mod integrate;
pub mod mirror;
pub mod reduce;
pub mod reps;
pub mod rootsys;
pub mod toda;

pub use error::{Error, Result};

/// Complex scalar used for all group-level arithmetic.
pub type C64 = num_complex::Complex64;
