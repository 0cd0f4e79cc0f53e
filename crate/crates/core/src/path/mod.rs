//! Time grids, reproducible Brownian increments, and Euler-Maruyama
//! simulation of forward SDEs.
//!
//! Paths are independent, so simulation is partitioned by path index across
//! workers; output blocks are written disjointly and no floating-point
//! reduction depends on the worker count.

pub mod rng;

use std::sync::Arc;

use ndarray::{Array3, ArrayView3, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::evaluators::{DriftFn, SigmaFn};
use crate::stats::PATH_BLOCK;

/// Uniform partition of `[0, T]` into `M` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    /// Uniform grid with `steps` intervals on `[0, horizon]`.
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidModel(format!(
                "time grid horizon must be positive and finite, got {horizon}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidModel("time grid needs at least one step".into()));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Node `t_i`; the last node is exactly the horizon.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.steps);
        if i == self.steps {
            self.horizon
        } else {
            i as f64 * self.dt()
        }
    }

    /// All nodes `t_0..t_M`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.node(i)).collect()
    }
}

/// Brownian increments for an ensemble of paths on a shared grid.
///
/// Entry `(p, i, j)` is distributed `N(0, dt)` and is a pure function of
/// `(seed, p, i, j)`.
#[derive(Debug, Clone)]
pub struct NoiseBlock {
    pub seed: u64,
    pub n_paths: usize,
    pub channels: usize,
    grid: TimeGrid,
    /// Shape `[n_paths, M, channels]`.
    pub increments: Array3<f64>,
}

impl NoiseBlock {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
}

/// Generate a reproducible block of Brownian increments.
pub fn sample_noise(grid: &TimeGrid, n_paths: usize, channels: usize, seed: u64) -> Result<NoiseBlock> {
    if n_paths == 0 || channels == 0 {
        return Err(Error::InvalidModel(
            "noise block needs n_paths >= 1 and channels >= 1".into(),
        ));
    }
    let entries = n_paths
        .checked_mul(grid.steps())
        .and_then(|v| v.checked_mul(channels))
        .filter(|&v| v <= isize::MAX as usize / std::mem::size_of::<f64>())
        .ok_or_else(|| {
            Error::Allocation(format!(
                "noise block {} x {} x {} exceeds addressable size",
                n_paths,
                grid.steps(),
                channels
            ))
        })?;
    let _ = entries;
    let sqrt_dt = grid.dt().sqrt();
    let steps = grid.steps();
    let mut increments = Array3::zeros((n_paths, steps, channels));
    increments
        .axis_chunks_iter_mut(Axis(0), PATH_BLOCK)
        .into_par_iter()
        .enumerate()
        .for_each(|(block, mut chunk)| {
            let path0 = block * PATH_BLOCK;
            for (q, mut path_plane) in chunk.outer_iter_mut().enumerate() {
                let p = (path0 + q) as u64;
                for i in 0..steps {
                    for j in 0..channels {
                        path_plane[(i, j)] =
                            sqrt_dt * rng::standard_normal(seed, p, i as u64, j as u64);
                    }
                }
            }
        });
    Ok(NoiseBlock {
        seed,
        n_paths,
        channels,
        grid: grid.clone(),
        increments,
    })
}

/// Forward-state trajectories with the noise that generated them.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub grid: TimeGrid,
    /// Shape `[n_paths, M + 1, m]`.
    pub states: Array3<f64>,
    pub noise: Arc<NoiseBlock>,
    pub drift_tag: String,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.states.shape()[0]
    }

    pub fn state_dim(&self) -> usize {
        self.states.shape()[2]
    }

    /// View of state slice `i` across all paths: shape `[n_paths, m]`.
    pub fn slice_states(&self, i: usize) -> ndarray::ArrayView2<'_, f64> {
        self.states.index_axis(Axis(1), i)
    }
}

/// Explicit Euler-Maruyama over raw increments; returns the state array.
///
/// Coefficients are evaluated at the left endpoint of each step. Initial
/// states are given per path (`[n_paths, m]`).
pub fn euler_paths(
    drift: &DriftFn,
    sigma: &SigmaFn,
    initial: &ndarray::ArrayView2<'_, f64>,
    increments: &ArrayView3<'_, f64>,
    grid: &TimeGrid,
) -> Result<Array3<f64>> {
    let (n_paths, steps, channels) = increments.dim();
    let m = initial.shape()[1];
    if initial.shape()[0] != n_paths {
        return Err(Error::Dimension {
            context: "euler_paths",
            detail: format!(
                "initial states for {} paths but increments carry {}",
                initial.shape()[0],
                n_paths
            ),
        });
    }
    if steps != grid.steps() {
        return Err(Error::Dimension {
            context: "euler_paths",
            detail: format!("increments have {} steps, grid has {}", steps, grid.steps()),
        });
    }
    let dt = grid.dt();
    let mut states = Array3::zeros((n_paths, steps + 1, m));

    let results: Vec<Result<()>> = states
        .axis_chunks_iter_mut(Axis(0), PATH_BLOCK)
        .into_par_iter()
        .enumerate()
        .map(|(block, mut chunk)| {
            let path0 = block * PATH_BLOCK;
            let mut b = vec![0.0; m];
            let mut s = vec![0.0; m * channels];
            let mut x = vec![0.0; m];
            for (q, mut path_plane) in chunk.outer_iter_mut().enumerate() {
                let p = path0 + q;
                x.copy_from_slice(initial.row(p).to_slice().expect("contiguous initial row"));
                for (k, v) in x.iter().enumerate() {
                    path_plane[(0, k)] = *v;
                }
                for i in 0..steps {
                    let t = grid.node(i);
                    drift(t, &x, &mut b);
                    sigma(t, &x, &mut s);
                    for k in 0..m {
                        let mut diffusion = 0.0;
                        for j in 0..channels {
                            diffusion += s[k * channels + j] * increments[(p, i, j)];
                        }
                        x[k] += b[k] * dt + diffusion;
                        if !x[k].is_finite() {
                            return Err(Error::NonFinite {
                                module: "path_engine",
                                path: p,
                                step: i + 1,
                            });
                        }
                        path_plane[(i + 1, k)] = x[k];
                    }
                }
            }
            Ok(())
        })
        .collect();
    for r in results {
        r?;
    }
    Ok(states)
}

/// Simulate `dX = drift dt + sigma dW` from a single starting point.
pub fn simulate_sde(
    drift: &DriftFn,
    sigma: &SigmaFn,
    x0: &[f64],
    noise: &Arc<NoiseBlock>,
    grid: &TimeGrid,
    drift_tag: impl Into<String>,
) -> Result<PathEnsemble> {
    let initial = ndarray::Array2::from_shape_fn((noise.n_paths, x0.len()), |(_, k)| x0[k]);
    let states = euler_paths(drift, sigma, &initial.view(), &noise.increments.view(), grid)?;
    Ok(PathEnsemble {
        grid: grid.clone(),
        states,
        noise: Arc::clone(noise),
        drift_tag: drift_tag.into(),
    })
}

/// Simulate from per-path initial states (used by benchmarks that need the
/// decoupling field resolved over a spatial region at time zero).
pub fn simulate_sde_from(
    drift: &DriftFn,
    sigma: &SigmaFn,
    initial: &ndarray::ArrayView2<'_, f64>,
    noise: &Arc<NoiseBlock>,
    grid: &TimeGrid,
    drift_tag: impl Into<String>,
) -> Result<PathEnsemble> {
    let states = euler_paths(drift, sigma, initial, &noise.increments.view(), grid)?;
    Ok(PathEnsemble {
        grid: grid.clone(),
        states,
        noise: Arc::clone(noise),
        drift_tag: drift_tag.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluators;

    #[test]
    fn grid_endpoints_exact() {
        let g = TimeGrid::new(0.7, 7).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(7), 0.7);
        let nodes = g.nodes();
        for w in nodes.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn noise_is_reproducible_and_keyed() {
        let g = TimeGrid::new(1.0, 8).unwrap();
        let a = sample_noise(&g, 16, 2, 42).unwrap();
        let b = sample_noise(&g, 16, 2, 42).unwrap();
        assert_eq!(a.increments, b.increments);
        let c = sample_noise(&g, 16, 2, 43).unwrap();
        assert!(a.increments.iter().zip(c.increments.iter()).any(|(x, y)| x != y));
    }

    #[test]
    fn deterministic_ode_when_sigma_zero() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let noise = Arc::new(sample_noise(&g, 3, 1, 0).unwrap());
        let drift: DriftFn = evaluators::drift_fn(|_t, _x, out| out[0] = 1.0);
        let sigma: SigmaFn = evaluators::sigma_fn(|_t, _x, out| out[0] = 0.0);
        let paths = simulate_sde(&drift, &sigma, &[0.0], &noise, &g, "unit-drift").unwrap();
        for p in 0..3 {
            for i in 0..=4 {
                assert!((paths.states[(p, i, 0)] - 0.25 * i as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn brownian_paths_are_cumulative_sums() {
        let g = TimeGrid::new(1.0, 16).unwrap();
        let noise = Arc::new(sample_noise(&g, 5, 1, 9).unwrap());
        let drift: DriftFn = evaluators::drift_fn(|_t, _x, out| out[0] = 0.0);
        let sigma: SigmaFn = evaluators::sigma_fn(|_t, _x, out| out[0] = 1.0);
        let paths = simulate_sde(&drift, &sigma, &[0.0], &noise, &g, "bm").unwrap();
        for p in 0..5 {
            let mut acc = 0.0;
            for i in 0..16 {
                acc += noise.increments[(p, i, 0)];
                assert!((paths.states[(p, i + 1, 0)] - acc).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn non_finite_state_is_reported_with_location() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let noise = Arc::new(sample_noise(&g, 2, 1, 0).unwrap());
        let drift: DriftFn = evaluators::drift_fn(|_t, x, out| out[0] = x[0] * f64::INFINITY);
        let sigma: SigmaFn = evaluators::sigma_fn(|_t, _x, out| out[0] = 0.0);
        let err = simulate_sde(&drift, &sigma, &[1.0], &noise, &g, "bad").unwrap_err();
        match err {
            Error::NonFinite { module, path, step } => {
                assert_eq!(module, "path_engine");
                assert_eq!(path, 0);
                assert_eq!(step, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
