//! Stochastic exponentials, measure shifts, and martingale diagnostics.
//!
//! The stochastic exponential is accumulated in the log domain to avoid
//! premature under/overflow. Increment shifts keep the base increments and
//! the accumulated shift as separate arrays: a shift followed by its
//! inverse cancels to an exactly-zero shift array (`p + (-p) = 0` is exact
//! in IEEE arithmetic), so the original increments are recovered bitwise.

use ndarray::{Array2, Array3, ArrayView3, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::path::{NoiseBlock, TimeGrid};
use crate::stats::{self, PATH_BLOCK};

/// Guard on |log E| before exponentiation.
const LOG_OVERFLOW: f64 = 700.0;

/// Discrete stochastic exponential of `∫ g^T dW` along an ensemble.
#[derive(Debug, Clone)]
pub struct ExponentialProcess {
    /// Shape `[n_paths, M + 1]`; strictly positive, starts at 1.
    pub values: Array2<f64>,
    /// Same shape; `log` of `values`.
    pub log_values: Array2<f64>,
    /// Label of the integrand that generated the process.
    pub generator_tag: String,
}

/// Diagnostic summary of an exponential process.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleReport {
    pub terminal_mean: f64,
    pub stderr: f64,
    pub max_log: f64,
    pub pass: bool,
}

/// Left-point discretization of the stochastic exponential:
/// `log E_{i+1} = log E_i + g_i^T dW_i - |g_i|^2 dt / 2`.
pub fn stochastic_exponential(
    g_values: &ArrayView3<'_, f64>,
    noise: &NoiseBlock,
    grid: &TimeGrid,
    generator_tag: impl Into<String>,
) -> Result<ExponentialProcess> {
    let (n_paths, steps, channels) = g_values.dim();
    if noise.increments.dim() != (n_paths, steps, channels) {
        return Err(Error::Dimension {
            context: "stochastic_exponential",
            detail: format!(
                "g values {:?} vs increments {:?}",
                g_values.dim(),
                noise.increments.dim()
            ),
        });
    }
    if steps != grid.steps() {
        return Err(Error::Dimension {
            context: "stochastic_exponential",
            detail: format!("{} steps vs grid {}", steps, grid.steps()),
        });
    }
    let dt = grid.dt();
    let mut log_values = Array2::zeros((n_paths, steps + 1));
    let results: Vec<Result<()>> = log_values
        .axis_chunks_iter_mut(Axis(0), PATH_BLOCK)
        .into_par_iter()
        .enumerate()
        .map(|(block, mut chunk)| {
            let path0 = block * PATH_BLOCK;
            for (q, mut row) in chunk.outer_iter_mut().enumerate() {
                let p = path0 + q;
                let mut acc = 0.0;
                row[0] = 0.0;
                for i in 0..steps {
                    let mut dot = 0.0;
                    let mut sq = 0.0;
                    for j in 0..channels {
                        let g = g_values[(p, i, j)];
                        dot += g * noise.increments[(p, i, j)];
                        sq += g * g;
                    }
                    acc += dot - 0.5 * sq * dt;
                    if !acc.is_finite() || acc.abs() > LOG_OVERFLOW {
                        return Err(Error::ExpOverflow {
                            path: p,
                            step: i + 1,
                            log_value: acc,
                        });
                    }
                    row[i + 1] = acc;
                }
            }
            Ok(())
        })
        .collect();
    for r in results {
        r?;
    }
    let values = log_values.mapv(f64::exp);
    Ok(ExponentialProcess {
        values,
        log_values,
        generator_tag: generator_tag.into(),
    })
}

/// Sign of an increment shift.
///
/// `Plus` matches the measure-change direction `B = W - ∫ g ds`
/// (increments decrease by `g dt`); `Minus` is its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftSign {
    Plus,
    Minus,
}

impl ShiftSign {
    fn factor(self) -> f64 {
        match self {
            ShiftSign::Plus => 1.0,
            ShiftSign::Minus => -1.0,
        }
    }
}

/// Brownian increments together with their accumulated drift shift.
///
/// Keeping the shift separate makes shift-then-inverse-shift an exact
/// involution: the accumulated shift returns to bitwise zero and
/// [`ShiftedIncrements::values`] then yields the base increments unchanged.
#[derive(Debug, Clone)]
pub struct ShiftedIncrements {
    base: Array3<f64>,
    shift: Array3<f64>,
}

impl ShiftedIncrements {
    pub fn from_noise(noise: &NoiseBlock) -> Self {
        Self {
            base: noise.increments.clone(),
            shift: Array3::zeros(noise.increments.dim()),
        }
    }

    /// Materialized increments `base - shift`.
    ///
    /// Returns the base array bitwise when the accumulated shift is zero.
    pub fn values(&self) -> Array3<f64> {
        if self.shift.iter().all(|&s| s == 0.0) {
            self.base.clone()
        } else {
            &self.base - &self.shift
        }
    }

    pub fn dim(&self) -> (usize, usize, usize) {
        self.base.dim()
    }

    /// Apply a further shift of `sign * g dt`.
    pub fn shift(&self, g_values: &ArrayView3<'_, f64>, grid: &TimeGrid, sign: ShiftSign) -> Result<Self> {
        if g_values.dim() != self.base.dim() {
            return Err(Error::Dimension {
                context: "shift_noise",
                detail: format!("g values {:?} vs increments {:?}", g_values.dim(), self.base.dim()),
            });
        }
        if g_values.dim().1 != grid.steps() {
            return Err(Error::Dimension {
                context: "shift_noise",
                detail: format!("{} steps vs grid {}", g_values.dim().1, grid.steps()),
            });
        }
        let dt = grid.dt();
        let factor = sign.factor();
        let mut shift = self.shift.clone();
        shift
            .iter_mut()
            .zip(g_values.iter())
            .for_each(|(s, &g)| *s += factor * (g * dt));
        Ok(Self {
            base: self.base.clone(),
            shift,
        })
    }
}

/// Shift Brownian increments by `sign * (-g dt)`:
/// `dB_i = dW_i - sign * g_i dt`, with `Plus` matching `B = W - ∫ g ds`.
pub fn shift_noise(
    noise: &NoiseBlock,
    g_values: &ArrayView3<'_, f64>,
    grid: &TimeGrid,
    sign: ShiftSign,
) -> Result<ShiftedIncrements> {
    ShiftedIncrements::from_noise(noise).shift(g_values, grid, sign)
}

/// Martingale evidence for an exponential process.
///
/// Passes when the terminal mean is within three standard errors of 1 and
/// the largest log value stays below 20 (a uniform-integrability proxy).
/// This is a diagnostic, never an automatic gate on the solver.
pub fn martingale_diagnostic(ep: &ExponentialProcess) -> MartingaleReport {
    let steps = ep.values.shape()[1] - 1;
    let terminal: Vec<f64> = ep.values.index_axis(Axis(1), steps).iter().copied().collect();
    let terminal_mean = stats::mean(&terminal);
    let stderr = stats::stderr_of_mean(&terminal);
    let max_log = ep.log_values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let pass = (terminal_mean - 1.0).abs() <= 3.0 * stderr && max_log <= 20.0;
    MartingaleReport {
        terminal_mean,
        stderr,
        max_log,
        pass,
    }
}
