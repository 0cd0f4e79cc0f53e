//! Numerical solvers for coupled forward-backward stochastic differential
//! equations (FBSDEs) with measurable, possibly discontinuous coefficients.
//!
//! The pipeline decouples the system by a Girsanov measure change, solves the
//! resulting backward equation by regression Monte Carlo with Picard
//! iteration, and recouples through the Markovian representation
//! `(Y, Z) = (u(t, X_t), d(t, X_t))`. A one-dimensional finite-difference
//! solver for the associated semilinear parabolic PDE serves as an
//! independent cross-check, and two application presets (pandemic policy
//! control, carbon allowance pricing) exercise the discontinuous-coefficient
//! cases the machinery is built for.

pub mod error;
pub mod girsanov;
pub mod model;
pub mod path;
pub mod stats;

pub use error::{Error, Result};
