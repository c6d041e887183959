//! Radial eigenfunctions `phi_lambda` of the radial Laplacian.
//!
//! `phi_lambda` solves `phi'' + (A'/A) phi' = -(lambda^2 + rho^2) phi` with
//! `phi(0) = 1`, `phi'(0) = 0`. The origin is a regular singular point
//! (`A'/A ~ (2 alpha + 1)/r`), so the solution is launched by its even power
//! series at a small switch radius and continued by adaptive Runge-Kutta
//! integration.
//!
//! Internally the solver integrates the rescaled function
//! `psi(r) = e^{rho r} phi(r)`, which stays O(1) for real `lambda` all the
//! way out (both fundamental solutions decay like `e^{-rho r}`), so the
//! large-radius values used by the c-function extraction never underflow
//! and carry honest relative accuracy.

use crate::error::{Error, Result};
use crate::ode::{integrate_dense, OdeOptions, State};
use crate::space::ModelSpace;
use num_complex::Complex64;

/// Tolerances shared by all eigenfunction evaluations.
#[derive(Clone, Copy, Debug)]
pub struct EigenConfig {
    /// Local error tolerance of the adaptive integrator.
    pub ode_tolerance: f64,
    /// Radius at which the even power series hands over to the integrator.
    /// Shrunk automatically when the quartic term would exceed the tolerance.
    pub series_switch_radius: f64,
    pub max_steps: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            ode_tolerance: 1e-10,
            series_switch_radius: 1e-3,
            max_steps: 2_000_000,
        }
    }
}

impl EigenConfig {
    pub fn with_tolerance(tol: f64) -> Self {
        EigenConfig {
            ode_tolerance: tol,
            ..Default::default()
        }
    }
}

/// A batch evaluation request: one spectral parameter, many radii.
#[derive(Clone, Debug)]
pub struct EigenfunctionRequest {
    pub lambda: Complex64,
    pub r_values: Vec<f64>,
    pub ode_tolerance: f64,
    pub series_switch_radius: f64,
}

impl EigenfunctionRequest {
    pub fn new(lambda: Complex64, r_values: Vec<f64>) -> Self {
        let cfg = EigenConfig::default();
        EigenfunctionRequest {
            lambda,
            r_values,
            ode_tolerance: cfg.ode_tolerance,
            series_switch_radius: cfg.series_switch_radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.re.is_finite() || !self.lambda.im.is_finite() {
            return Err(Error::NonFinite { what: "lambda" });
        }
        if self.r_values.iter().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite { what: "radius" });
        }
        if self.r_values.iter().any(|&r| r < 0.0) {
            return Err(Error::NegativeRadius(
                self.r_values.iter().cloned().fold(0.0, f64::min),
            ));
        }
        if !self.r_values.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::InvalidArgument(
                "r_values must be sorted ascending".into(),
            ));
        }
        if !(self.ode_tolerance > 0.0 && self.series_switch_radius > 0.0) {
            return Err(Error::InvalidArgument(
                "tolerance and switch radius must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn solve(&self, space: &ModelSpace) -> Result<Vec<Complex64>> {
        self.validate()?;
        let cfg = EigenConfig {
            ode_tolerance: self.ode_tolerance,
            series_switch_radius: self.series_switch_radius,
            max_steps: EigenConfig::default().max_steps,
        };
        phi_profile(space, &cfg, self.lambda, &self.r_values)
    }
}

/// Coefficients `[1, a1, a2]` of the even series
/// `phi(r) = 1 + a1 r^2 + a2 r^4 + O(r^6)`.
///
/// `order` is the highest power of r requested (0, 2 or 4).
pub fn series_coefficients(
    space: &ModelSpace,
    lambda: Complex64,
    order: usize,
) -> Result<Vec<Complex64>> {
    if order > 4 || order % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "series order must be 0, 2 or 4, got {order}"
        )));
    }
    let (a1, a2) = series_a1_a2(space, lambda);
    let mut out = vec![Complex64::new(1.0, 0.0)];
    if order >= 2 {
        out.push(a1);
    }
    if order >= 4 {
        out.push(a2);
    }
    Ok(out)
}

/// `a1 = -mu / (4 (alpha + 1))` and
/// `a2 = -a1 (mu + 2 c1) / (8 (alpha + 2))` with `mu = lambda^2 + rho^2`.
fn series_a1_a2(space: &ModelSpace, lambda: Complex64) -> (Complex64, Complex64) {
    let mu = lambda * lambda + space.rho() * space.rho();
    let alpha = space.alpha();
    let c1 = space.log_density_series_c1();
    let a1 = -mu / (4.0 * (alpha + 1.0));
    let a2 = -a1 * (mu + 2.0 * c1) / (8.0 * (alpha + 2.0));
    (a1, a2)
}

/// Pointwise eigenfunction value.
pub fn phi(space: &ModelSpace, cfg: &EigenConfig, lambda: Complex64, r: f64) -> Result<Complex64> {
    Ok(phi_profile(space, cfg, lambda, &[r])?[0])
}

/// Eigenfunction values at a sorted batch of radii from one integration
/// sweep. Shares its dense-output trajectory with pointwise evaluation, so
/// the two agree bit-for-bit at common radii.
pub fn phi_profile(
    space: &ModelSpace,
    cfg: &EigenConfig,
    lambda: Complex64,
    r_values: &[f64],
) -> Result<Vec<Complex64>> {
    let req = EigenfunctionRequest {
        lambda,
        r_values: Vec::new(),
        ode_tolerance: cfg.ode_tolerance,
        series_switch_radius: cfg.series_switch_radius,
    };
    req.validate()?;
    if r_values.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite { what: "radius" });
    }
    if r_values.iter().any(|&r| r < 0.0) {
        return Err(Error::NegativeRadius(
            r_values.iter().cloned().fold(0.0, f64::min),
        ));
    }
    if !r_values.windows(2).all(|w| w[0] <= w[1]) {
        return Err(Error::InvalidArgument(
            "r_values must be sorted ascending".into(),
        ));
    }
    if r_values.is_empty() {
        return Ok(Vec::new());
    }

    let rho = space.rho();
    let mu = lambda * lambda + rho * rho;
    if mu == Complex64::new(0.0, 0.0) {
        // lambda = i rho: the eigenvalue vanishes and the constant function
        // satisfies both initial conditions, so phi = 1 identically.
        return Ok(vec![Complex64::new(1.0, 0.0); r_values.len()]);
    }
    let (a1, a2) = series_a1_a2(space, lambda);
    // Keep the truncated r^6 term of the launch below the local tolerance.
    let r0 = cfg
        .series_switch_radius
        .min((cfg.ode_tolerance / (a2.norm() + 1.0)).powf(0.25))
        .max(1e-6);
    let series = |r: f64| 1.0 + a1 * r * r + a2 * r * r * r * r;

    let mut out = vec![Complex64::default(); r_values.len()];
    let n_series = r_values.partition_point(|&r| r <= r0);
    for (i, &r) in r_values[..n_series].iter().enumerate() {
        out[i] = series(r);
    }
    if n_series == r_values.len() {
        return Ok(out);
    }

    // Launch psi = e^{rho r} phi at r0 and integrate outward.
    let s0 = series(r0);
    let ds0 = 2.0 * a1 * r0 + 4.0 * a2 * r0 * r0 * r0;
    let scale = (rho * r0).exp();
    let y0: State = [scale * s0, scale * (rho * s0 + ds0)];
    let rhs = move |r: f64, y: &State| -> State {
        // log_density_derivative is total for r > 0; integration stays there.
        let ell = match space.log_density_derivative(r) {
            Ok(v) => v,
            Err(_) => f64::NAN,
        };
        let dpsi = y[1];
        let d2psi = -(ell - 2.0 * rho) * y[1] - (mu + rho * rho - rho * ell) * y[0];
        [dpsi, d2psi]
    };
    let opts = OdeOptions {
        rtol: cfg.ode_tolerance,
        atol: cfg.ode_tolerance,
        max_steps: cfg.max_steps,
    };
    let psi = integrate_dense(rhs, r0, y0, &r_values[n_series..], &opts)?;
    for (slot, (&r, y)) in out[n_series..]
        .iter_mut()
        .zip(r_values[n_series..].iter().zip(&psi))
    {
        *slot = (-rho * r).exp() * y[0];
    }
    Ok(out)
}

/// Rescaled profile `psi(r) = e^{rho r} phi_lambda(r)` for real `lambda`.
///
/// This is the quantity whose large-radius oscillation encodes the
/// c-function; it is returned without the `e^{-rho r}` factor so extraction
/// works directly with O(1) numbers.
pub fn psi_profile_real(
    space: &ModelSpace,
    cfg: &EigenConfig,
    lambda: f64,
    r_values: &[f64],
) -> Result<Vec<f64>> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite { what: "lambda" });
    }
    let rho = space.rho();
    let lambda = Complex64::new(lambda, 0.0);
    let (a1, a2) = series_a1_a2(space, lambda);
    let r0 = cfg
        .series_switch_radius
        .min((cfg.ode_tolerance / (a2.norm() + 1.0)).powf(0.25))
        .max(1e-6);
    if r_values.iter().any(|&r| r <= r0) {
        return Err(Error::InvalidArgument(
            "psi profile is meant for radii beyond the series launch".into(),
        ));
    }
    if !r_values.windows(2).all(|w| w[0] <= w[1]) {
        return Err(Error::InvalidArgument(
            "r_values must be sorted ascending".into(),
        ));
    }
    let mu = lambda * lambda + rho * rho;
    let series = 1.0 + a1 * r0 * r0 + a2 * r0 * r0 * r0 * r0;
    let dseries = 2.0 * a1 * r0 + 4.0 * a2 * r0 * r0 * r0;
    let scale = (rho * r0).exp();
    let y0: State = [scale * series, scale * (rho * series + dseries)];
    let rhs = move |r: f64, y: &State| -> State {
        let ell = space.log_density_derivative(r).unwrap_or(f64::NAN);
        [y[1], -(ell - 2.0 * rho) * y[1] - (mu + rho * rho - rho * ell) * y[0]]
    };
    let opts = OdeOptions {
        rtol: cfg.ode_tolerance,
        atol: cfg.ode_tolerance,
        max_steps: cfg.max_steps,
    };
    let psi = integrate_dense(rhs, r0, y0, r_values, &opts)?;
    Ok(psi.iter().map(|y| y[0].re).collect())
}
