//! Quantum Wasserstein distance of order 1 on finite spin systems.
//!
//! The crate computes the W1 norm of traceless operators together with a
//! primal decomposition and a Lipschitz-normalized dual witness, the
//! site-dependence seminorm and Lipschitz constant of observables, exact
//! Hamming-cost optimal transport for classical distributions, Gibbs states
//! and pressures of translation-invariant interactions, and checkers for the
//! inequalities relating these quantities.
//!
//! Everything here is `no_std` with `alloc`; IO and file formats live in the
//! `qw1` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod classical;
pub mod digest;
pub mod entropy;
pub mod error;
pub mod lattice;
pub mod matrix;
pub mod operator;
pub mod random;
pub mod region;
pub mod solver;

pub use error::{Error, Result};
pub use matrix::{Matrix, C64};
pub use operator::{DensityMatrix, HermitianOperator, ProductState, Spectrum};
pub use region::{Region, Site};
pub use solver::{SolverConfig, TransportCertificate};
