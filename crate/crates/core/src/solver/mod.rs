//! Certified convex solvers for the quantum W1 norm and the site-dependence
//! seminorm `∂_x H = 2 min_A ‖H - A ⊗ I_x‖_∞`.
//!
//! Both solvers are deterministic ADMM iterations that track an explicit
//! feasible primal point and an explicit dual point; the reported values are
//! the bounds those points certify, never extrapolations.

mod partial;
mod spectral;
mod w1;

pub use partial::{lipschitz_constant, lipschitz_profile, partial_dependence, PartialDependence};
pub use w1::{dual_pair_value, w1_distance, w1_norm};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::region::Site;

/// Knobs shared by the solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Relative duality-gap target.
    pub tol_gap: f64,
    pub max_iter: usize,
    /// Initial ADMM penalty.
    pub admm_rho: f64,
    /// Residual-balancing penalty adaptation.
    pub adapt: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_gap: 1e-5,
            max_iter: 200_000,
            admm_rho: 1.0,
            adapt: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_gap > 0.0) {
            return Err(Error::InvalidInput("tol_gap must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if !(self.admm_rho > 0.0) {
            return Err(Error::InvalidInput("admm_rho must be positive".into()));
        }
        Ok(())
    }
}

/// Primal/dual certificate for `‖Δ‖_W1`.
#[derive(Clone, Debug)]
pub struct TransportCertificate {
    /// Value of the returned decomposition: an upper bound on the W1 norm.
    pub primal_value: f64,
    /// `Tr[Δ H]` for the returned witness: a lower bound on the W1 norm.
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Pieces `Δ^(x)` with `Tr_x Δ^(x) = 0` summing to `Δ`.
    pub decomposition: Vec<(Site, HermitianOperator)>,
    /// Observable with certified Lipschitz constant `witness_lipschitz <= 1`.
    pub dual_witness: HermitianOperator,
    pub witness_lipschitz: f64,
}

impl TransportCertificate {
    /// Errors with [`Error::MaxIterExceeded`] unless the gap target was met.
    pub fn ensure_converged(&self) -> Result<&Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::MaxIterExceeded {
                iterations: self.iterations,
                gap: self.gap,
            })
        }
    }

    /// Midpoint of the certified bracket.
    pub fn estimate(&self) -> f64 {
        0.5 * (self.primal_value + self.dual_value)
    }
}
