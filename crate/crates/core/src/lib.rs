//! Floquet analysis of dynamical-decoupling sensing.
//!
//! A sensor spin driven by a CPMG train sees the bath evolve under one of two
//! conditional Hamiltonians. The modules here build the resulting one-period
//! propagators, diagonalize them, and turn the Floquet phases and modes into
//! coherence traces, envelopes and dip positions.
//!
//! - [`linalg`]: dense complex matrices, exponentials, unitary eigenproblems.
//! - [`floquet`]: unit cells, Floquet pairs, general-dimension coherence.
//! - [`pseudospin`]: closed forms for a two-state bath.
//! - [`sensors`]: NV and Si:Bi donor models producing two-state baths.
//! - [`clusters`]: interacting nuclear clusters and independent pairs.

pub mod clusters;
pub mod floquet;
pub mod linalg;
pub mod pseudospin;
pub mod sensors;

use thiserror::Error;

pub use linalg::{ComplexMatrix, LinalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("symmetry violation: {0}")]
    SymmetryViolation(String),
    #[error("numerical instability: {0}")]
    NumericalStability(String),
    #[error("numerical inconsistency: {0}")]
    NumericalConsistency(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("level tracking is ambiguous near B0 = {field} T")]
    Tracking { field: f64 },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("{count} bath spins exceed the supported maximum of {max}")]
    Capacity { count: usize, max: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no average-Hamiltonian prediction: {0}")]
    Divergence(String),
}

impl Error {
    /// True for errors caused by exceeding a size limit.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. } | Error::Linalg(LinalgError::Capacity { .. }))
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::Linalg(LinalgError::NotHermitian { .. })
                | Error::Linalg(LinalgError::NonFinite)
                | Error::Linalg(LinalgError::DimensionMismatch(..))
                | Error::Linalg(LinalgError::InvalidTime(_))
                | Error::DegenerateInput(_)
                | Error::Unsupported(_)
        )
    }
}
