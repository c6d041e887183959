//! Spectral side of the transform: the c-function extracted from
//! eigenfunction asymptotics, the tabulated Plancherel density
//! `|c(lambda)|^{-2}`, and the inversion constant `C0`.
//!
//! For real `lambda > 0` the rescaled eigenfunction approaches
//! `psi(r) = e^{rho r} phi_lambda(r) -> c(lambda) e^{i lambda r} + conj ...`
//! with an `O(e^{-2r})` remainder on the model spaces. Sampling psi at two
//! radii a quarter oscillation apart gives a 2x2 linear system for
//! `Re c, Im c` whose determinant is exactly -4; stability is checked by
//! repeating the fit five units further out.

use crate::eigen::{psi_profile_real, EigenConfig};
use crate::error::{Error, Result};
use crate::quad::Panels;
use crate::space::ModelSpace;
use crate::spline::CubicSpline;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

/// Smallest spectral parameter extracted directly; below this the density
/// is filled by the quadratic small-lambda model.
pub const LAMBDA_MIN: f64 = 0.05;

/// Default extraction radius and its escalation step.
pub const EXTRACTION_RADIUS: f64 = 35.0;
const EXTRACTION_RADIUS_ESCALATED: f64 = 45.0;
const STABILITY_TOL: f64 = 1e-5;

/// Panelized quadrature grid on `[0, lambda_max]`, graded so the mass of
/// slowly decaying spectral integrands near `lambda = 0` (large heat times)
/// is resolved as well as the tail.
#[derive(Clone, Debug)]
pub struct SpectralGrid {
    pub panels: Panels,
    pub lambda_max: f64,
}

impl SpectralGrid {
    /// Graded grid with roughly `node_budget` points. The head panels below
    /// `lambda = 5` are fixed; the budget controls the tail panel width.
    pub fn new(lambda_max: f64, node_budget: usize) -> Result<Self> {
        if lambda_max < 10.0 {
            return Err(Error::Config(format!(
                "lambda_max must be at least 10, got {lambda_max}"
            )));
        }
        let pts = 32usize;
        let mut edges = vec![0.0, LAMBDA_MIN];
        let push_range = |edges: &mut Vec<f64>, to: f64, width: f64| {
            let mut x = *edges.last().unwrap();
            while x + width < to - 1e-12 {
                x += width;
                edges.push(x);
            }
            edges.push(to);
        };
        push_range(&mut edges, 0.2f64.min(lambda_max), 0.05);
        if lambda_max > 0.2 {
            push_range(&mut edges, 1.0f64.min(lambda_max), 0.1);
        }
        if lambda_max > 1.0 {
            push_range(&mut edges, 5.0f64.min(lambda_max), 0.25);
        }
        if lambda_max > 5.0 {
            let head_panels = edges.len() - 1;
            if node_budget <= head_panels * pts + pts {
                return Err(Error::Config(format!(
                    "lambda node budget {node_budget} too small for lambda_max {lambda_max}"
                )));
            }
            let tail_panels = (node_budget - head_panels * pts) / pts;
            let width = (lambda_max - 5.0) / tail_panels as f64;
            push_range(&mut edges, lambda_max, width);
        }
        Ok(SpectralGrid {
            panels: Panels::from_edges(edges, pts),
            lambda_max,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.panels.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.panels.weights
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    /// Widest panel, which bounds the resolvable oscillation of integrands.
    pub fn max_panel_width(&self) -> f64 {
        self.panels
            .edges
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// One extracted c-function value with its diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct CExtraction {
    pub c: num_complex::Complex64,
    /// `|c(lambda)|^{-2}`.
    pub density: f64,
    pub radius_used: f64,
    /// Relative change of c between the fits at R and R + 5.
    pub drift: f64,
}

/// Extract `c(lambda)` for real `lambda > 0` by fitting
/// `psi(r) = 2 Re c cos(lambda r) - 2 Im c sin(lambda r)` at `r = R` and
/// `r = R + pi/(2 lambda)`, using `c(-lambda) = conj(c(lambda))`.
pub fn extract_c(
    space: &ModelSpace,
    ecfg: &EigenConfig,
    lambda: f64,
    radius: f64,
    stability_tol: f64,
) -> Result<CExtraction> {
    extract_c_inner(space, ecfg, lambda, radius, stability_tol, true)
}

fn extract_c_inner(
    space: &ModelSpace,
    ecfg: &EigenConfig,
    lambda: f64,
    radius: f64,
    stability_tol: f64,
    may_escalate: bool,
) -> Result<CExtraction> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "extraction needs real lambda > 0, got {lambda}"
        )));
    }
    if lambda < LAMBDA_MIN {
        return Err(Error::ExtractionIllConditioned {
            lambda,
            reason: format!(
                "oscillation period pi/(2 lambda) = {:.1} exceeds the usable radius window",
                std::f64::consts::FRAC_PI_2 / lambda
            ),
        });
    }
    let quarter = std::f64::consts::FRAC_PI_2 / lambda;
    let mut rs = [radius, radius + quarter, radius + 5.0, radius + 5.0 + quarter];
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let psi = psi_profile_real(space, ecfg, lambda, &rs)?;
    let value = |r: f64| psi[rs.iter().position(|&x| x == r).unwrap()];

    let fit = |r1: f64, r2: f64| -> Result<num_complex::Complex64> {
        let (g1, g2) = (value(r1), value(r2));
        // rows: [2 cos(l r), -2 sin(l r)]
        let (c1, s1) = ((lambda * r1).cos(), (lambda * r1).sin());
        let (c2, s2) = ((lambda * r2).cos(), (lambda * r2).sin());
        let det = -4.0 * (c1 * s2 - s1 * c2);
        if det.abs() < 1e-6 {
            return Err(Error::ExtractionIllConditioned {
                lambda,
                reason: format!("fit nodes nearly dependent, det = {det:.2e}"),
            });
        }
        let re = (g1 * (-2.0 * s2) - g2 * (-2.0 * s1)) / det;
        let im = (2.0 * c1 * g2 - 2.0 * c2 * g1) / det;
        Ok(num_complex::Complex64::new(re, im))
    };
    let c_near = fit(radius, radius + quarter)?;
    let c_far = fit(radius + 5.0, radius + 5.0 + quarter)?;
    let scale = c_near.norm().max(1e-300);
    let drift = (c_near - c_far).norm() / scale;
    if drift > stability_tol {
        if may_escalate && radius < EXTRACTION_RADIUS_ESCALATED {
            return extract_c_inner(
                space,
                ecfg,
                lambda,
                EXTRACTION_RADIUS_ESCALATED,
                stability_tol,
                false,
            );
        }
        return Err(Error::ExtractionUnstable {
            lambda,
            drift,
            tol: stability_tol,
            radius,
        });
    }
    let c = c_far; // the further fit has the smaller residual term
    Ok(CExtraction {
        c,
        density: 1.0 / c.norm_sqr(),
        radius_used: radius,
        drift,
    })
}

/// Tabulated Plancherel density with the calibration constant.
#[derive(Debug)]
pub struct PlancherelData {
    space: ModelSpace,
    grid: Arc<SpectralGrid>,
    density: Vec<f64>,
    /// Coefficient of the quadratic fill `kappa lambda^2` below `LAMBDA_MIN`.
    kappa: f64,
    c0: Option<f64>,
    calibration_residual: Option<f64>,
    extraction_radius: f64,
    density_spline: OnceLock<CubicSpline>,
}

impl PlancherelData {
    /// Extract `|c|^{-2}` at every grid node at or above `LAMBDA_MIN`; below,
    /// fill with `kappa lambda^2` where `kappa` is fitted on
    /// `[LAMBDA_MIN, 3 LAMBDA_MIN]`.
    pub fn tabulate(space: &ModelSpace, grid: Arc<SpectralGrid>, ecfg: &EigenConfig) -> Result<Self> {
        let nodes = grid.nodes();
        let extracted: Vec<Option<CExtraction>> = nodes
            .par_iter()
            .map(|&l| {
                if l < LAMBDA_MIN {
                    Ok(None)
                } else {
                    extract_c(space, ecfg, l, EXTRACTION_RADIUS, STABILITY_TOL).map(Some)
                }
            })
            .collect::<Result<_>>()?;
        let mut density: Vec<f64> = extracted
            .iter()
            .map(|e| e.map(|x| x.density).unwrap_or(0.0))
            .collect();
        // kappa from a least-squares fit of d = kappa l^2 on the first nodes.
        let mut num = 0.0;
        let mut den = 0.0;
        for (l, d) in nodes.iter().zip(&density) {
            if (LAMBDA_MIN..=3.0 * LAMBDA_MIN).contains(l) {
                num += d * l * l;
                den += l.powi(4);
            }
        }
        if den == 0.0 {
            return Err(Error::InvalidArgument(
                "spectral grid has no nodes in the kappa fit window".into(),
            ));
        }
        let kappa = num / den;
        for (l, d) in nodes.iter().zip(density.iter_mut()) {
            if *l < LAMBDA_MIN {
                *d = kappa * l * l;
            }
        }
        if density.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::InvalidArgument(
                "Plancherel density must be positive on the grid".into(),
            ));
        }
        Ok(PlancherelData {
            space: *space,
            grid,
            density,
            kappa,
            c0: None,
            calibration_residual: None,
            extraction_radius: EXTRACTION_RADIUS,
            density_spline: OnceLock::new(),
        })
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn density_values(&self) -> &[f64] {
        &self.density
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn extraction_radius(&self) -> f64 {
        self.extraction_radius
    }

    pub fn c0(&self) -> Result<f64> {
        self.c0.ok_or(Error::NotCalibrated)
    }

    pub fn calibration_residual(&self) -> Option<f64> {
        self.calibration_residual
    }

    pub fn is_calibrated(&self) -> bool {
        self.c0.is_some()
    }

    pub(crate) fn set_calibration(&mut self, c0: f64, residual: f64) {
        self.c0 = Some(c0);
        self.calibration_residual = Some(residual);
    }

    /// Density at an off-grid point: quadratic model below `LAMBDA_MIN`,
    /// cubic spline through the tabulated nodes elsewhere. Used when
    /// synthesis has to subdivide the quadrature grid.
    pub fn density_at(&self, lambda: f64) -> f64 {
        if lambda < LAMBDA_MIN {
            return self.kappa * lambda * lambda;
        }
        let spline = self.density_spline.get_or_init(|| {
            CubicSpline::new(self.grid.nodes(), &self.density)
                .expect("grid nodes are sorted and density finite")
        });
        spline.eval(lambda)
    }

    /// `int_0^{lambda_max} f(lambda) |c|^{-2} dlambda` over the grid.
    pub fn integrate_against_density<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(self.grid.weights())
            .zip(&self.density)
            .map(|((l, w), d)| w * d * f(*l))
            .sum()
    }
}

/// Calibrate `C0` against radial test functions with known origin values:
/// `C0 = u(0) / int u_hat(lambda) |c|^{-2} dlambda`, averaged over the
/// family; the maximal relative spread is recorded and must stay below 1e-3.
pub fn calibrate_with(
    mut pdata: PlancherelData,
    ecfg: &EigenConfig,
    family: &[crate::transform::RadialFunction],
) -> Result<PlancherelData> {
    if family.len() < 3 {
        return Err(Error::Precondition(
            "calibration needs at least 3 test functions".into(),
        ));
    }
    let mut estimates = Vec::with_capacity(family.len());
    for f in family {
        let f_hat = crate::transform::spherical_ft(f, &pdata, ecfg)?;
        let mut integral = 0.0;
        for ((w, d), v) in pdata
            .grid()
            .weights()
            .iter()
            .zip(pdata.density_values())
            .zip(f_hat.values())
        {
            integral += w * d * v.re;
        }
        let origin = f.origin().re;
        if !(integral.is_finite() && integral.abs() > 1e-300) {
            return Err(Error::DivergentIntegral(
                "calibration integral vanished or overflowed".into(),
            ));
        }
        estimates.push(origin / integral);
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let spread = estimates
        .iter()
        .map(|e| (e - mean).abs())
        .fold(0.0, f64::max)
        / mean.abs();
    if spread > 1e-3 {
        return Err(Error::CalibrationSpread {
            spread,
            limit: 1e-3,
        });
    }
    pdata.set_calibration(mean, spread);
    Ok(pdata)
}

/// Calibrate against Gaussians `e^{-a r^2}` of the given rates.
pub fn calibrate(
    pdata: PlancherelData,
    ecfg: &EigenConfig,
    gaussian_rates: &[f64],
) -> Result<PlancherelData> {
    let space = *pdata.space();
    let lambda_max = pdata.grid().lambda_max;
    let family: Vec<crate::transform::RadialFunction> = gaussian_rates
        .iter()
        .map(|&a| crate::transform::RadialFunction::gaussian(&space, a, lambda_max, 32))
        .collect::<Result<_>>()?;
    calibrate_with(pdata, ecfg, &family)
}

/// Convenience: graded default grid, tabulation and Gaussian calibration in
/// one call.
pub fn build_calibrated(
    space: &ModelSpace,
    lambda_max: f64,
    node_budget: usize,
    ecfg: &EigenConfig,
) -> Result<PlancherelData> {
    let grid = Arc::new(SpectralGrid::new(lambda_max, node_budget)?);
    let pdata = PlancherelData::tabulate(space, grid, ecfg)?;
    calibrate(pdata, ecfg, &[0.5, 1.0, 2.0])
}

impl Clone for PlancherelData {
    fn clone(&self) -> Self {
        PlancherelData {
            space: self.space,
            grid: Arc::clone(&self.grid),
            density: self.density.clone(),
            kappa: self.kappa,
            c0: self.c0,
            calibration_residual: self.calibration_residual,
            extraction_radius: self.extraction_radius,
            density_spline: OnceLock::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::fit_loglog_slope;

    fn h3() -> ModelSpace {
        ModelSpace::hyperbolic(3).unwrap()
    }

    #[test]
    fn grid_is_graded_and_bounded() {
        let g = SpectralGrid::new(60.0, 4096).unwrap();
        assert!(g.len() <= 4096, "node count {}", g.len());
        assert!(g.nodes()[0] > 0.0 && g.nodes()[0] < LAMBDA_MIN);
        assert!((g.nodes().last().unwrap() - 60.0).abs() < 1.0);
        assert!(g.max_panel_width() < 0.75);
        // integrates a spread-out Gaussian: int_0^inf e^{-200 l^2} l^2 dl
        let vals: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&l| (-200.0 * l * l).exp() * l * l)
            .collect();
        let num = g.panels.integrate(&vals);
        let exact = 0.25 * std::f64::consts::PI.sqrt() * 200.0f64.powf(-1.5);
        assert!((num / exact - 1.0).abs() < 1e-10);
        assert!(SpectralGrid::new(5.0, 4096).is_err());
    }

    #[test]
    fn h3_extraction_matches_closed_form() {
        // c(lambda) = -i / lambda, so |c|^{-2} = lambda^2.
        let space = h3();
        let ecfg = EigenConfig::default();
        for lambda in [0.5, 1.0, 2.0, 7.0] {
            let e = extract_c(&space, &ecfg, lambda, EXTRACTION_RADIUS, STABILITY_TOL).unwrap();
            let expect = num_complex::Complex64::new(0.0, -1.0 / lambda);
            assert!(
                (e.c - expect).norm() < 1e-7 / lambda,
                "lambda = {lambda}: c = {}",
                e.c
            );
            assert!(
                (e.density - lambda * lambda).abs() <= 1e-4 * lambda * lambda,
                "lambda = {lambda}: density {} vs {}",
                e.density,
                lambda * lambda
            );
            assert!(e.drift < STABILITY_TOL);
        }
    }

    #[test]
    fn extraction_rejects_tiny_lambda() {
        let e = extract_c(&h3(), &EigenConfig::default(), 0.01, 35.0, 1e-5);
        assert!(matches!(e, Err(Error::ExtractionIllConditioned { .. })));
    }

    #[test]
    fn large_lambda_slope_is_2alpha_plus_1() {
        let ecfg = EigenConfig::default();
        for (space, expect) in [(h3(), 2.0), (ModelSpace::hyperbolic(5).unwrap(), 4.0)] {
            let lambdas: Vec<f64> = (0..10).map(|i| 20.0 * (50.0f64 / 20.0).powf(i as f64 / 9.0)).collect();
            let dens: Vec<f64> = lambdas
                .iter()
                .map(|&l| {
                    extract_c(&space, &ecfg, l, EXTRACTION_RADIUS, STABILITY_TOL)
                        .unwrap()
                        .density
                })
                .collect();
            let fit = fit_loglog_slope(&lambdas, &dens).unwrap();
            assert!(
                (fit.slope - expect).abs() < 0.05,
                "slope {} vs {expect}",
                fit.slope
            );
        }
    }

    #[test]
    fn tabulated_density_and_fill() {
        let space = h3();
        let grid = Arc::new(SpectralGrid::new(20.0, 2048).unwrap());
        let pd = PlancherelData::tabulate(&space, grid, &EigenConfig::default()).unwrap();
        // kappa should be ~1 for H^3 (density is exactly lambda^2).
        assert!((pd.kappa() - 1.0).abs() < 1e-3, "kappa = {}", pd.kappa());
        for (l, d) in pd.grid().nodes().iter().zip(pd.density_values()) {
            assert!(*d > 0.0);
            if *l >= LAMBDA_MIN {
                assert!((d / (l * l) - 1.0).abs() < 1e-4, "lambda = {l}");
            }
        }
        // fill value below the cutoff follows kappa lambda^2
        let fill = pd.density_at(0.01);
        assert!((fill - pd.kappa() * 1e-4).abs() < 1e-12);
        // spline evaluation between nodes stays close to the truth
        assert!((pd.density_at(3.777) - 3.777f64.powi(2)).abs() < 1e-4 * 3.777f64.powi(2));
        assert!(!pd.is_calibrated());
        assert!(pd.c0().is_err());
    }

    #[test]
    fn extraction_stability_under_radius_shift() {
        // |c(R) - c(R+5)| <= 1e-5 |c| for lambda >= 0.2 at R >= 30.
        let space = ModelSpace::hyperbolic(4).unwrap();
        let ecfg = EigenConfig::default();
        for lambda in [0.2, 1.0, 10.0] {
            let a = extract_c(&space, &ecfg, lambda, 30.0, 1e-3).unwrap();
            let b = extract_c(&space, &ecfg, lambda, 35.0, 1e-3).unwrap();
            assert!(
                (a.c - b.c).norm() <= 1e-5 * a.c.norm(),
                "lambda = {lambda}: {} vs {}",
                a.c,
                b.c
            );
        }
    }
}
