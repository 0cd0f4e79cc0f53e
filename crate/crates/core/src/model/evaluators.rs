//! Shared-callable evaluator types for FBSDE coefficients.
//!
//! Evaluators write into caller-provided slices so the hot simulation and
//! regression loops run without per-call allocation. They carry no mutable
//! state and are safe for concurrent read-only use.

use std::sync::Arc;

/// Drift `b(t, x) -> R^m`.
pub type DriftFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// Diffusion `sigma(t, x) -> R^{m x n}`, row-major.
pub type SigmaFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// Driver `f(t, x, y, z) -> R^d`; `z` is row-major `d x n`.
pub type DriverFn = Arc<dyn Fn(f64, &[f64], &[f64], &[f64], &mut [f64]) + Send + Sync>;

/// Coupling `g(t, x, y, z) -> R^n`; `z` is row-major `d x n`.
pub type CouplingFn = Arc<dyn Fn(f64, &[f64], &[f64], &[f64], &mut [f64]) + Send + Sync>;

/// Terminal condition `h(x) -> R^d`.
pub type TerminalFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

pub fn drift_fn(f: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static) -> DriftFn {
    Arc::new(f)
}

pub fn sigma_fn(f: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static) -> SigmaFn {
    Arc::new(f)
}

pub fn driver_fn(
    f: impl Fn(f64, &[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
) -> DriverFn {
    Arc::new(f)
}

pub fn coupling_fn(
    f: impl Fn(f64, &[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
) -> CouplingFn {
    Arc::new(f)
}

pub fn terminal_fn(f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> TerminalFn {
    Arc::new(f)
}
