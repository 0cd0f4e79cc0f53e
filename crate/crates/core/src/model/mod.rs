//! FBSDE coefficient sets, the augmented driver, the truncation operator,
//! and the hypothesis-catalogue audit.
//!
//! Discontinuous coefficients are evaluated pointwise; indicator conditions
//! are right-closed (`1_{x >= K}` is 1 at `x = K`). Right derivatives of
//! convex model functions are supplied as explicit evaluators, never
//! computed by differencing.

pub mod audit;
pub mod evaluators;

use std::sync::Arc;

use evaluators::{CouplingFn, DriftFn, DriverFn, SigmaFn, TerminalFn};

use crate::error::{Error, Result};

/// State, noise, and backward dimensions of an FBSDE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    /// Forward-state dimension.
    pub m: usize,
    /// Brownian dimension.
    pub n: usize,
    /// Backward-state dimension.
    pub d: usize,
}

impl Dimensions {
    pub fn new(m: usize, n: usize, d: usize) -> Result<Self> {
        if m == 0 || n == 0 || d == 0 {
            return Err(Error::InvalidModel(format!(
                "dimensions must be >= 1, got m={m}, n={n}, d={d}"
            )));
        }
        Ok(Self { m, n, d })
    }

    /// All three dimensions equal to one (both application presets).
    pub fn scalar() -> Self {
        Self { m: 1, n: 1, d: 1 }
    }
}

/// Complete definition of one FBSDE: evaluators, dimensions, horizon, start.
#[derive(Clone)]
pub struct CoefficientSet {
    pub dims: Dimensions,
    pub b: DriftFn,
    pub sigma: SigmaFn,
    pub f: DriverFn,
    pub g: CouplingFn,
    pub h: TerminalFn,
    pub horizon: f64,
    pub x0: Vec<f64>,
}

impl CoefficientSet {
    pub fn new(
        dims: Dimensions,
        b: DriftFn,
        sigma: SigmaFn,
        f: DriverFn,
        g: CouplingFn,
        h: TerminalFn,
        horizon: f64,
        x0: Vec<f64>,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidModel(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if x0.len() != dims.m {
            return Err(Error::Dimension {
                context: "coefficient_set",
                detail: format!("x0 has length {}, expected m = {}", x0.len(), dims.m),
            });
        }
        Ok(Self {
            dims,
            b,
            sigma,
            f,
            g,
            h,
            horizon,
            x0,
        })
    }
}

impl std::fmt::Debug for CoefficientSet {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("CoefficientSet")
            .field("dims", &self.dims)
            .field("horizon", &self.horizon)
            .field("x0", &self.x0)
            .finish_non_exhaustive()
    }
}

/// Declared growth and regularity constants of a coefficient set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants {
    /// Growth bound `C >= 0`.
    pub c: f64,
    /// Polynomial exponent `r >= 0`.
    pub r: f64,
    /// Ellipticity constant `epsilon > 0`.
    pub epsilon: f64,
    /// Drift modulus bound `kappa > 0`.
    pub kappa: f64,
}

impl GrowthConstants {
    pub fn new(c: f64, r: f64, epsilon: f64, kappa: f64) -> Result<Self> {
        if !(c >= 0.0) || !(r >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "growth constants need C >= 0 and r >= 0, got C={c}, r={r}"
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidModel(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidModel(format!("kappa must be positive, got {kappa}")));
        }
        Ok(Self { c, r, epsilon, kappa })
    }
}

/// Forward-coefficient condition variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardCondition {
    /// Bounded drift, locally Lipschitz diffusion.
    F1,
    /// Bounded drift, scalar state, modulus-controlled diffusion.
    F2,
    /// Constant diffusion matrix.
    F3,
}

/// Backward-coefficient condition variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackwardCondition {
    B1,
    B2,
    B3,
    B4,
}

/// Uniqueness condition variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniquenessCondition {
    U1,
    U2,
    B2,
}

impl std::fmt::Display for ForwardCondition {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "{self:?}")
    }
}
impl std::fmt::Display for BackwardCondition {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "{self:?}")
    }
}
impl std::fmt::Display for UniquenessCondition {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UniquenessCondition::U1 => write!(fm, "U1"),
            UniquenessCondition::U2 => write!(fm, "U2"),
            UniquenessCondition::B2 => write!(fm, "B2"),
        }
    }
}

/// Declared condition profile of a coefficient set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionProfile {
    pub forward: Option<ForwardCondition>,
    pub backward: Option<BackwardCondition>,
    pub uniqueness: Option<UniquenessCondition>,
    pub constants: GrowthConstants,
}

impl ConditionProfile {
    pub fn new(
        forward: Option<ForwardCondition>,
        backward: Option<BackwardCondition>,
        uniqueness: Option<UniquenessCondition>,
        constants: GrowthConstants,
    ) -> Self {
        Self {
            forward,
            backward,
            uniqueness,
            constants,
        }
    }

    /// Scalar-backward conditions require `d = 1`.
    pub fn validate(&self, dims: &Dimensions) -> Result<()> {
        let needs_scalar = matches!(self.backward, Some(BackwardCondition::B3))
            || matches!(self.uniqueness, Some(UniquenessCondition::U2));
        if needs_scalar && dims.d != 1 {
            return Err(Error::InvalidModel(format!(
                "B3 and U2 require d = 1, profile declared with d = {}",
                dims.d
            )));
        }
        Ok(())
    }

    /// Whether the declared driver growth is quadratic in `z` (B2 or B3).
    pub fn quadratic_driver(&self) -> bool {
        matches!(
            self.backward,
            Some(BackwardCondition::B2) | Some(BackwardCondition::B3)
        )
    }
}

/// Augmented driver of the decoupled system: `f(t,x,y,z) + z g(t,x,y,z)`.
///
/// The returned evaluator panics on slice-length mismatches between `z`
/// and the coupling output; shapes are a structural error, not a numerical
/// one.
pub fn augmented_driver(coeffs: &CoefficientSet) -> DriverFn {
    let f = Arc::clone(&coeffs.f);
    let g = Arc::clone(&coeffs.g);
    let d = coeffs.dims.d;
    let n = coeffs.dims.n;
    Arc::new(move |t: f64, x: &[f64], y: &[f64], z: &[f64], out: &mut [f64]| {
        assert_eq!(
            z.len(),
            d * n,
            "augmented driver: z has {} entries, expected d*n = {}",
            z.len(),
            d * n
        );
        assert_eq!(out.len(), d, "augmented driver: output length");
        f(t, x, y, z, out);
        let mut gv = vec![0.0; n];
        g(t, x, y, z, &mut gv);
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..n {
                acc += z[i * n + j] * gv[j];
            }
            out[i] += acc;
        }
    })
}

/// Radial projection of `y` onto the closed ball of radius `n_bound`.
///
/// Identity inside the ball, including its boundary.
pub fn project_y(y: &[f64], n_bound: f64, out: &mut [f64]) {
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= n_bound {
        out.copy_from_slice(y);
    } else {
        let scale = n_bound / norm;
        for (o, v) in out.iter_mut().zip(y.iter()) {
            *o = v * scale;
        }
    }
}

/// Replace the `y` argument of `f` and `g` by its radial projection onto
/// the ball of radius `n_bound`. Forward coefficients and the terminal
/// condition are unchanged.
pub fn truncate_coefficients(coeffs: &CoefficientSet, n_bound: f64) -> Result<CoefficientSet> {
    if !(n_bound > 0.0) {
        return Err(Error::InvalidModel(format!(
            "truncation radius must be positive, got {n_bound}"
        )));
    }
    let d = coeffs.dims.d;
    let f = Arc::clone(&coeffs.f);
    let g = Arc::clone(&coeffs.g);
    let f_trunc: DriverFn = Arc::new(move |t, x, y: &[f64], z, out: &mut [f64]| {
        let mut yp = vec![0.0; d];
        project_y(y, n_bound, &mut yp);
        f(t, x, &yp, z, out);
    });
    let g_trunc: CouplingFn = Arc::new(move |t, x, y: &[f64], z, out: &mut [f64]| {
        let mut yp = vec![0.0; d];
        project_y(y, n_bound, &mut yp);
        g(t, x, &yp, z, out);
    });
    Ok(CoefficientSet {
        dims: coeffs.dims,
        b: Arc::clone(&coeffs.b),
        sigma: Arc::clone(&coeffs.sigma),
        f: f_trunc,
        g: g_trunc,
        h: Arc::clone(&coeffs.h),
        horizon: coeffs.horizon,
        x0: coeffs.x0.clone(),
    })
}

/// A-priori bound on `|Y|` for `r = 0` profiles:
/// `exp(C(C+1)T) * sqrt(C^2 + T)`.
pub fn y_bound(c: f64, t: f64) -> f64 {
    assert!(c >= 0.0, "y_bound needs C >= 0");
    assert!(t > 0.0, "y_bound needs T > 0");
    (c * (c + 1.0) * t).exp() * (c * c + t).sqrt()
}

pub use audit::{audit_conditions, AuditReport, AuditStatus, FlagAudit, SampleSpec};

#[cfg(test)]
mod tests {
    use super::*;
    use evaluators::*;

    fn scalar_set(
        f: impl Fn(f64, &[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
        g: impl Fn(f64, &[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> CoefficientSet {
        CoefficientSet::new(
            Dimensions::scalar(),
            drift_fn(|_, _, out| out[0] = 0.0),
            sigma_fn(|_, _, out| out[0] = 1.0),
            driver_fn(f),
            coupling_fn(g),
            terminal_fn(|_, out| out[0] = 0.0),
            1.0,
            vec![0.0],
        )
        .unwrap()
    }

    #[test]
    fn augmented_driver_zero_case() {
        let set = scalar_set(|_, _, _, _, out| out[0] = 0.0, |_, _, _, _, out| out[0] = 0.0);
        let fb = augmented_driver(&set);
        let mut out = [f64::NAN];
        fb(0.3, &[1.0], &[2.0], &[3.0], &mut out);
        assert_eq!(out[0], 0.0);
    }

    #[test]
    fn augmented_driver_scalar_arithmetic() {
        // d = n = 1, f = 1, g = 2, z = 3 -> f + z g = 7
        let set = scalar_set(|_, _, _, _, out| out[0] = 1.0, |_, _, _, _, out| out[0] = 2.0);
        let fb = augmented_driver(&set);
        let mut out = [0.0];
        fb(0.0, &[0.0], &[0.0], &[3.0], &mut out);
        assert_eq!(out[0], 7.0);
    }

    #[test]
    fn augmented_driver_carbon_example() {
        // f = 0, g(e, y) = y / (1 - 0.5 * 1_{e >= 0}); at e=1, y=0.3, z=0.2:
        // f_bar = 0.2 * (0.3 / 0.5) = 0.12
        let set = scalar_set(
            |_, _, _, _, out| out[0] = 0.0,
            |_, x, y, _, out| {
                let denom = if x[0] >= 0.0 { 1.0 - 0.5 } else { 1.0 };
                out[0] = y[0] / denom;
            },
        );
        let fb = augmented_driver(&set);
        let mut out = [0.0];
        fb(0.0, &[1.0], &[0.3], &[0.2], &mut out);
        assert!((out[0] - 0.12).abs() < 1e-15);
    }

    #[test]
    fn truncation_identity_inside_ball() {
        let set = scalar_set(|_, _, y, _, out| out[0] = y[0] * y[0], |_, _, _, _, out| out[0] = 0.0);
        let trunc = truncate_coefficients(&set, 1.0).unwrap();
        let mut a = [0.0];
        let mut b = [0.0];
        // |y| <= N: exact agreement
        (set.f)(0.0, &[0.0], &[0.5], &[0.0], &mut a);
        (trunc.f)(0.0, &[0.0], &[0.5], &[0.0], &mut b);
        assert_eq!(a[0], b[0]);
        // |y| > N: evaluated at the projected point
        (trunc.f)(0.0, &[0.0], &[4.0], &[0.0], &mut b);
        assert_eq!(b[0], 1.0);
    }

    #[test]
    fn truncation_fixes_ball_boundary() {
        let mut out = [0.0, 0.0];
        project_y(&[3.0, 4.0], 5.0, &mut out);
        assert_eq!(out, [3.0, 4.0]);
    }

    #[test]
    fn y_bound_values() {
        assert!((y_bound(0.0, 1.0) - 1.0).abs() < 1e-15);
        let e2_sqrt2 = (2.0f64).exp() * 2.0f64.sqrt();
        assert!((y_bound(1.0, 1.0) - e2_sqrt2).abs() < 1e-12);
        assert!((y_bound(1.0, 1.0) - 10.4525).abs() < 5e-4);
        // independent evaluation of the closed formula at C=1, T=0.25
        let expected = (0.5f64).exp() * (1.25f64).sqrt();
        assert!((y_bound(1.0, 0.25) - expected).abs() < 1e-12);
        assert!((y_bound(1.0, 0.25) - 1.8434).abs() < 5e-4);
    }

    #[test]
    fn y_bound_monotone_on_grid() {
        let cs = [0.0, 0.3, 0.7, 1.0, 1.5];
        let ts = [0.1, 0.5, 1.0, 2.0];
        for w in cs.windows(2) {
            for &t in &ts {
                assert!(y_bound(w[1], t) >= y_bound(w[0], t));
            }
        }
        for &c in &cs {
            for w in ts.windows(2) {
                assert!(y_bound(c, w[1]) >= y_bound(c, w[0]));
            }
        }
    }
}
