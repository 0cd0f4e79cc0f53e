//! Error type shared across the solver modules.
//!
//! Numerical failures carry enough location information (path and step
//! indices, time-slice index) to reproduce the offending sample.

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// Incompatible shapes or dimensions between inputs.
    #[error("dimension mismatch in {context}: {detail}")]
    Dimension { context: &'static str, detail: String },

    /// A simulation produced a non-finite state value.
    #[error("non-finite value in {module} at path {path}, step {step}")]
    NonFinite {
        module: &'static str,
        path: usize,
        step: usize,
    },

    /// Stochastic exponential left the representable range.
    #[error("stochastic exponential overflow at path {path}, step {step}: |log E| = {log_value}")]
    ExpOverflow {
        path: usize,
        step: usize,
        log_value: f64,
    },

    /// Least-squares fit failed at a given backward time slice.
    #[error("regression failed at time slice {slice}: {detail}")]
    Regression { slice: usize, detail: String },

    /// A regression design could not be repaired by ridge regularization.
    #[error("regression design: {0}")]
    Design(String),

    /// The condition audit was called with an empty sampling grid.
    #[error("empty sample spec: {0}")]
    EmptySampleSpec(String),

    /// Requested array would exceed addressable size.
    #[error("allocation too large: {0}")]
    Allocation(String),

    /// Finite-difference solver failure (grid, stability, domain).
    #[error("pde solver: {0}")]
    Pde(String),

    /// A model definition violates its invariants.
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
