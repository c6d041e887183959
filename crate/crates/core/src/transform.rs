//! Spherical Fourier transform, Plancherel inversion, norms, radial
//! convolution, and the Abel/Radon transform through its Euclidean-Fourier
//! factorization.
//!
//! All integrals are composite Gauss-Legendre sums over the function's own
//! panel grid. Radial functions live on `[0, r_max]` grids sized from their
//! decay hint so the discarded tail of `int |u| A dr` stays below 1e-10;
//! spectral functions share the Plancherel grid. Synthesis (inversion)
//! subdivides the spectral panels on the fly when the requested radii or an
//! oscillatory multiplier would outrun the default panel width.

use crate::eigen::{phi_profile, EigenConfig};
use crate::error::{Error, Result};
use crate::quad::Panels;
use crate::spectral::{PlancherelData, SpectralGrid};
use crate::space::ModelSpace;
use crate::spline::CubicSpline;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::{Arc, OnceLock};

/// Fraction of sum(|w v|) the last panel may carry before an integral is
/// declared truncated/divergent. Sized so that genuine truncation an order
/// below the coarsest norm tolerance (1e-4) is flagged while the
/// `e^{rho r}`-amplified synthesis noise floor of deep heat-kernel tails
/// is not.
pub const TAIL_BUDGET: f64 = 3e-5;

/// Oscillation budget per panel: `frequency x panel width` a 32-point
/// Gauss rule resolves with error far below the quadrature targets.
const PANEL_PHASE_BUDGET: f64 = 35.0;

/// How fast the sampled function decays; drives grid sizing and tail checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayHint {
    /// `|u(r)| <~ e^{-rate r^2}`
    Gaussian { rate: f64 },
    /// `|u(r)| <~ e^{-rate r}`
    Exponential { rate: f64 },
    /// Supported in `[0, radius]`.
    Compact { radius: f64 },
    Unknown,
}

impl DecayHint {
    /// Radius beyond which the tail of `int |u| A dr` is below 1e-10,
    /// accounting for the `e^{2 rho r}` growth of the density.
    pub fn suggested_r_max(&self, space: &ModelSpace) -> Option<f64> {
        let rho = space.rho();
        match *self {
            DecayHint::Gaussian { rate } if rate > 0.0 => {
                let drift = rho / rate;
                Some(drift + (drift * drift + 23.0 / rate).sqrt() + 5.0)
            }
            DecayHint::Exponential { rate } if rate > 2.0 * rho + 0.1 => {
                Some(23.0 / (rate - 2.0 * rho) + 5.0)
            }
            DecayHint::Compact { radius } if radius > 0.0 => Some(radius),
            _ => None,
        }
    }
}

/// Gauss-Legendre panel grid on `[0, r_max]`.
#[derive(Debug)]
pub struct RadialGrid {
    pub panels: Panels,
    pub r_max: f64,
}

impl RadialGrid {
    /// Panel width is capped by the oscillation of `phi_lambda` up to
    /// `lambda_max`, so forward transforms stay accurate on this grid.
    pub fn new(r_max: f64, lambda_max: f64, points_per_panel: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidArgument(format!("bad r_max {r_max}")));
        }
        let width = (PANEL_PHASE_BUDGET / lambda_max.max(1.0)).min(0.5);
        let n_panels = (r_max / width).ceil() as usize;
        Ok(RadialGrid {
            panels: Panels::uniform(0.0, r_max, n_panels.max(2), points_per_panel),
            r_max,
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
}

/// A radial function sampled on a panel grid, with its decay metadata.
#[derive(Debug)]
pub struct RadialFunction {
    space: ModelSpace,
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
    decay: DecayHint,
    origin_value: Option<Complex64>,
    splines: OnceLock<(CubicSpline, CubicSpline)>,
}

impl Clone for RadialFunction {
    fn clone(&self) -> Self {
        RadialFunction {
            space: self.space,
            grid: Arc::clone(&self.grid),
            values: self.values.clone(),
            decay: self.decay,
            origin_value: self.origin_value,
            splines: OnceLock::new(),
        }
    }
}

impl RadialFunction {
    pub fn from_fn<F: Fn(f64) -> Complex64>(
        space: &ModelSpace,
        grid: Arc<RadialGrid>,
        decay: DecayHint,
        f: F,
    ) -> Result<Self> {
        let values: Vec<Complex64> = grid.nodes().iter().map(|&r| f(r)).collect();
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { what: "radial samples" });
        }
        Ok(RadialFunction {
            space: *space,
            grid,
            values,
            decay,
            origin_value: Some(f(0.0)),
            splines: OnceLock::new(),
        })
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(
        space: &ModelSpace,
        grid: Arc<RadialGrid>,
        decay: DecayHint,
        f: F,
    ) -> Result<Self> {
        Self::from_fn(space, grid, decay, |r| Complex64::new(f(r), 0.0))
    }

    /// `u(r) = e^{-rate r^2}` on a grid sized from its own decay.
    pub fn gaussian(space: &ModelSpace, rate: f64, lambda_max: f64, pts: usize) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::InvalidArgument(format!("gaussian rate {rate}")));
        }
        let hint = DecayHint::Gaussian { rate };
        let r_max = hint.suggested_r_max(space).unwrap();
        let grid = Arc::new(RadialGrid::new(r_max, lambda_max, pts)?);
        Self::from_real_fn(space, grid, hint, |r| (-rate * r * r).exp())
    }

    /// Build from sampled values at arbitrary sorted radii by cubic-spline
    /// resampling onto a panel grid.
    pub fn from_samples(
        space: &ModelSpace,
        rs: &[f64],
        values: &[Complex64],
        decay: DecayHint,
        lambda_max: f64,
        pts: usize,
    ) -> Result<Self> {
        if rs.len() != values.len() || rs.len() < 4 {
            return Err(Error::InvalidArgument(
                "need at least 4 samples to resample a radial function".into(),
            ));
        }
        let re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        let sre = CubicSpline::new(rs, &re)?;
        let sim = CubicSpline::new(rs, &im)?;
        let r_max = *rs.last().unwrap();
        let grid = Arc::new(RadialGrid::new(r_max, lambda_max, pts)?);
        let origin = Complex64::new(sre.eval(0.0), sim.eval(0.0));
        let mut out = Self::from_fn(space, grid, decay, |r| {
            Complex64::new(sre.eval(r), sim.eval(r))
        })?;
        out.origin_value = Some(origin);
        Ok(out)
    }

    pub(crate) fn from_values(
        space: &ModelSpace,
        grid: Arc<RadialGrid>,
        decay: DecayHint,
        values: Vec<Complex64>,
        origin_value: Option<Complex64>,
    ) -> Self {
        RadialFunction {
            space: *space,
            grid,
            values,
            decay,
            origin_value,
            splines: OnceLock::new(),
        }
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn decay(&self) -> DecayHint {
        self.decay
    }

    /// Value at the origin (sampled directly when the function was built
    /// from a callable; spline-extrapolated otherwise).
    pub fn origin(&self) -> Complex64 {
        self.origin_value.unwrap_or_else(|| self.eval(0.0))
    }

    /// Interpolated evaluation between grid nodes.
    pub fn eval(&self, r: f64) -> Complex64 {
        let (sre, sim) = self.splines.get_or_init(|| {
            let re: Vec<f64> = self.values.iter().map(|v| v.re).collect();
            let im: Vec<f64> = self.values.iter().map(|v| v.im).collect();
            (
                CubicSpline::new(self.grid.nodes(), &re).expect("grid nodes sorted"),
                CubicSpline::new(self.grid.nodes(), &im).expect("grid nodes sorted"),
            )
        });
        Complex64::new(sre.eval(r), sim.eval(r))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// A function of the spectral parameter sampled on the Plancherel grid.
#[derive(Clone, Debug)]
pub struct SpectralFunction {
    grid: Arc<SpectralGrid>,
    values: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn new(grid: Arc<SpectralGrid>, values: Vec<Complex64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "spectral grid has {} nodes, got {} values",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { what: "spectral samples" });
        }
        Ok(SpectralFunction { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: Arc<SpectralGrid>, f: F) -> Result<Self> {
        let values = grid.nodes().iter().map(|&l| f(l)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise product; both factors must share their grid.
    pub fn product(&self, other: &SpectralFunction) -> Result<SpectralFunction> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.len() != other.grid.len() {
            return Err(Error::GridMismatch(
                "spectral product needs a shared grid".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        SpectralFunction::new(Arc::clone(&self.grid), values)
    }
}

fn check_grid_compat(f: &SpectralFunction, pdata: &PlancherelData) -> Result<()> {
    if Arc::ptr_eq(f.grid(), pdata.grid()) {
        return Ok(());
    }
    if f.grid().len() == pdata.grid().len()
        && (f.grid().lambda_max - pdata.grid().lambda_max).abs() < 1e-12
    {
        return Ok(());
    }
    Err(Error::GridMismatch(
        "spectral function does not live on the Plancherel grid".into(),
    ))
}

/// `phi_lambda(r)` on the product of a lambda set and a radius set, one ODE
/// sweep per lambda, parallel across lambdas. Row-major `[i_l * n_r + j]`.
pub fn phi_table(
    space: &ModelSpace,
    ecfg: &EigenConfig,
    lambdas: &[f64],
    rs: &[f64],
) -> Result<Vec<f64>> {
    let n_r = rs.len();
    let rows: Vec<Vec<f64>> = lambdas
        .par_iter()
        .map(|&l| {
            phi_profile(space, ecfg, Complex64::new(l, 0.0), rs)
                .map(|vals| vals.iter().map(|v| v.re).collect())
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(lambdas.len() * n_r);
    for row in rows {
        out.extend_from_slice(&row);
    }
    Ok(out)
}

/// Spherical Fourier transform
/// `f_hat(lambda) = omega int_0^inf u(r) phi_lambda(r) A(r) dr`
/// evaluated at every node of the Plancherel grid.
pub fn spherical_ft(
    f: &RadialFunction,
    pdata: &PlancherelData,
    ecfg: &EigenConfig,
) -> Result<SpectralFunction> {
    let space = f.space();
    let omega = space.omega();
    let nodes = f.grid().nodes();
    let weights = f.grid().weights();
    // Quadrature moments m_j = omega w_j u_j A(r_j), guarded so an
    // underflowed sample never multiplies an overflowed density.
    let mut moments = Vec::with_capacity(nodes.len());
    for ((&r, &w), &u) in nodes.iter().zip(weights).zip(f.values()) {
        let m = if u == Complex64::new(0.0, 0.0) {
            Complex64::new(0.0, 0.0)
        } else {
            let a = space.density(r)?;
            u * (omega * w * a)
        };
        if !m.re.is_finite() || !m.im.is_finite() {
            return Err(Error::NonFinite { what: "transform integrand" });
        }
        moments.push(m);
    }
    let abs: Vec<f64> = moments
        .iter()
        .zip(weights)
        .map(|(m, w)| m.norm() / w)
        .collect();
    let frac = f.grid().panels.last_panel_fraction(&abs);
    if frac > TAIL_BUDGET {
        return Err(Error::TailBudget {
            what: "spherical transform",
            fraction: frac,
            budget: TAIL_BUDGET,
            hint: format!("; enlarge r_max beyond {}", f.grid().r_max),
        });
    }
    let lambdas = pdata.grid().nodes();
    let table = phi_table(space, ecfg, lambdas, nodes)?;
    let n_r = nodes.len();
    let values: Vec<Complex64> = (0..lambdas.len())
        .map(|i| {
            let row = &table[i * n_r..(i + 1) * n_r];
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, p) in moments.iter().zip(row) {
                acc += m * *p;
            }
            acc
        })
        .collect();
    SpectralFunction::new(Arc::clone(pdata.grid()), values)
}

/// What drives a synthesis: tabulated samples, an analytic multiplier, or
/// samples modulated by a multiplier (applied exactly at subdivided nodes).
pub enum SpectralSource<'a> {
    Samples(&'a SpectralFunction),
    Multiplier(&'a dyn Fn(f64) -> Complex64),
    Modulated {
        samples: &'a SpectralFunction,
        multiplier: &'a dyn Fn(f64) -> Complex64,
    },
}

impl SpectralSource<'_> {
    fn samples(&self) -> Option<&SpectralFunction> {
        match self {
            SpectralSource::Samples(s) => Some(s),
            SpectralSource::Modulated { samples, .. } => Some(samples),
            SpectralSource::Multiplier(_) => None,
        }
    }
}

/// Plancherel inversion at arbitrary radii:
/// `f(r) = C0 int_0^inf F(lambda) phi_lambda(r) |c(lambda)|^{-2} dlambda`.
///
/// `extra_frequency` describes additional oscillation of `F` in lambda
/// (e.g. `2 t lambda_max` for a Schrodinger multiplier) on top of the
/// `e^{i lambda r}` phase of the eigenfunctions; the spectral panels are
/// subdivided until both are resolved.
pub fn synthesize(
    pdata: &PlancherelData,
    source: SpectralSource<'_>,
    rs: &[f64],
    extra_frequency: f64,
    c0_override: Option<f64>,
) -> Result<Vec<Complex64>> {
    let c0 = match c0_override {
        Some(v) => v,
        None => pdata.c0()?,
    };
    if rs.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite { what: "radius" });
    }
    let max_r = rs.iter().cloned().fold(0.0, f64::max);
    let width = pdata.grid().max_panel_width();
    let freq = max_r + extra_frequency.max(0.0);
    let factor = ((freq * width / PANEL_PHASE_BUDGET).ceil() as usize).max(1);

    // Interpolants for off-grid evaluation when panels get subdivided.
    let sample_splines = match (factor > 1, source.samples()) {
        (true, Some(s)) => {
            let re: Vec<f64> = s.values().iter().map(|v| v.re).collect();
            let im: Vec<f64> = s.values().iter().map(|v| v.im).collect();
            Some((
                CubicSpline::new(s.grid().nodes(), &re)?,
                CubicSpline::new(s.grid().nodes(), &im)?,
            ))
        }
        _ => None,
    };

    let sub_panels = (factor > 1).then(|| pdata.grid().panels.subdivided(factor));
    let quad: &Panels = sub_panels.as_ref().unwrap_or(&pdata.grid().panels);
    let (lambdas, weights) = (&quad.nodes[..], &quad.weights[..]);

    // Per-node coefficient w * F * density (C0 applied at the end).
    let mut coeff = Vec::with_capacity(lambdas.len());
    for (i, (&l, &w)) in lambdas.iter().zip(weights).enumerate() {
        let dens = if factor == 1 {
            pdata.density_values()[i]
        } else {
            pdata.density_at(l)
        };
        let f_val = match &source {
            SpectralSource::Samples(s) => {
                if factor == 1 {
                    s.values()[i]
                } else {
                    let (sre, sim) = sample_splines.as_ref().unwrap();
                    Complex64::new(sre.eval(l), sim.eval(l))
                }
            }
            SpectralSource::Multiplier(m) => m(l),
            SpectralSource::Modulated { samples, multiplier } => {
                let base = if factor == 1 {
                    samples.values()[i]
                } else {
                    let (sre, sim) = sample_splines.as_ref().unwrap();
                    Complex64::new(sre.eval(l), sim.eval(l))
                };
                base * multiplier(l)
            }
        };
        coeff.push(f_val * (w * dens));
    }
    // Spectral truncation check against the tail of |F| density.
    let abs: Vec<f64> = coeff.iter().zip(weights).map(|(c, w)| c.norm() / w).collect();
    let frac = quad.last_panel_fraction(&abs);
    if frac > TAIL_BUDGET {
        return Err(Error::TailBudget {
            what: "spectral synthesis",
            fraction: frac,
            budget: TAIL_BUDGET,
            hint: format!("; raise lambda_max beyond {}", pdata.grid().lambda_max),
        });
    }

    // Accumulate C0 sum_i coeff_i phi_{lambda_i}(r_j) in fixed lambda order,
    // computing eigenfunction rows in parallel chunks.
    let space = pdata.space();
    let ecfg = EigenConfig::default();
    let mut acc = vec![Complex64::new(0.0, 0.0); rs.len()];
    let chunk = 256usize;
    let mut sorted_rs = rs.to_vec();
    sorted_rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let order: Vec<usize> = {
        let mut idx: Vec<usize> = (0..rs.len()).collect();
        idx.sort_by(|&a, &b| rs[a].partial_cmp(&rs[b]).unwrap());
        idx
    };
    for (c_chunk, l_chunk) in coeff.chunks(chunk).zip(lambdas.chunks(chunk)) {
        let rows: Vec<Vec<f64>> = l_chunk
            .par_iter()
            .map(|&l| {
                phi_profile(space, &ecfg, Complex64::new(l, 0.0), &sorted_rs)
                    .map(|v| v.iter().map(|z| z.re).collect())
            })
            .collect::<Result<_>>()?;
        for (cf, row) in c_chunk.iter().zip(&rows) {
            for (slot, p) in order.iter().zip(row) {
                acc[*slot] += cf * *p;
            }
        }
    }
    for v in &mut acc {
        *v *= c0;
    }
    Ok(acc)
}

/// Plancherel inversion onto a list of radii.
pub fn inverse_ft(pdata: &PlancherelData, f_hat: &SpectralFunction, rs: &[f64]) -> Result<Vec<Complex64>> {
    check_grid_compat(f_hat, pdata)?;
    synthesize(pdata, SpectralSource::Samples(f_hat), rs, 0.0, None)
}

/// Inversion onto a radial grid, packaged as a `RadialFunction`.
pub fn inverse_ft_on_grid(
    pdata: &PlancherelData,
    f_hat: &SpectralFunction,
    grid: Arc<RadialGrid>,
    decay: DecayHint,
) -> Result<RadialFunction> {
    check_grid_compat(f_hat, pdata)?;
    let mut rs: Vec<f64> = grid.nodes().to_vec();
    rs.push(0.0);
    rs.rotate_right(1); // origin first, still ascending
    let vals = synthesize(pdata, SpectralSource::Samples(f_hat), &rs, 0.0, None)?;
    Ok(RadialFunction::from_values(
        pdata.space(),
        grid,
        decay,
        vals[1..].to_vec(),
        Some(vals[0]),
    ))
}

/// `L^p` norm `(omega int |u|^p A dr)^{1/p}`; `p = inf` is the sup over
/// the grid. Divergence is flagged through the last-panel tail estimate.
pub fn lp_norm(f: &RadialFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("lp norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let space = f.space();
    let mut vals = Vec::with_capacity(f.grid().len());
    for (&r, u) in f.grid().nodes().iter().zip(f.values()) {
        let v = if u.norm() == 0.0 {
            0.0
        } else {
            u.norm().powf(p) * space.density(r)?
        };
        if !v.is_finite() {
            return Err(Error::DivergentIntegral(format!(
                "|u|^{p} A overflows near r = {r}"
            )));
        }
        vals.push(v);
    }
    let frac = f.grid().panels.last_panel_fraction(&vals);
    if frac > TAIL_BUDGET {
        return Err(Error::DivergentIntegral(format!(
            "tail of |u|^{p} A carries fraction {frac:.2e} of the integral on [0, {}]",
            f.grid().r_max
        )));
    }
    let integral = f.grid().panels.integrate(&vals) * space.omega();
    Ok(integral.powf(1.0 / p))
}

/// Spectral norm `(C0 int (lambda^2 + rho^2)^b |F|^2 |c|^{-2} dlambda)^{1/2}`.
pub fn spectral_l2(pdata: &PlancherelData, f_hat: &SpectralFunction, b: f64) -> Result<f64> {
    check_grid_compat(f_hat, pdata)?;
    if b < 0.0 {
        return Err(Error::InvalidArgument(format!("weight exponent b = {b}")));
    }
    let c0 = pdata.c0()?;
    let rho2 = pdata.space().rho().powi(2);
    let mut acc = 0.0;
    for ((&l, &w), (&d, v)) in pdata
        .grid()
        .nodes()
        .iter()
        .zip(pdata.grid().weights())
        .zip(pdata.density_values().iter().zip(f_hat.values()))
    {
        acc += w * d * (l * l + rho2).powf(b) * v.norm_sqr();
    }
    Ok((c0 * acc).sqrt())
}

/// Weighted space-side norm `(omega int r^{2w} |u|^2 A dr)^{1/2}`.
pub fn weighted_l2(f: &RadialFunction, w: f64) -> Result<f64> {
    if w < 0.0 {
        return Err(Error::InvalidArgument(format!("weight exponent {w}")));
    }
    let space = f.space();
    let mut vals = Vec::with_capacity(f.grid().len());
    for (&r, u) in f.grid().nodes().iter().zip(f.values()) {
        let v = if u.norm() == 0.0 {
            0.0
        } else {
            r.powf(2.0 * w) * u.norm_sqr() * space.density(r)?
        };
        if !v.is_finite() {
            return Err(Error::DivergentIntegral(format!(
                "r^{} |u|^2 A overflows near r = {r}",
                2.0 * w
            )));
        }
        vals.push(v);
    }
    let frac = f.grid().panels.last_panel_fraction(&vals);
    if frac > TAIL_BUDGET {
        return Err(Error::DivergentIntegral(format!(
            "tail of r^{} |u|^2 A carries fraction {frac:.2e}",
            2.0 * w
        )));
    }
    Ok((f.grid().panels.integrate(&vals) * space.omega()).sqrt())
}

/// Radial convolution through the transform side:
/// `(f * g)^ = f_hat g_hat`, synthesized back onto a grid sized for the
/// combined decay.
pub fn convolve_radial(
    pdata: &PlancherelData,
    f: &RadialFunction,
    g: &RadialFunction,
    ecfg: &EigenConfig,
) -> Result<RadialFunction> {
    let f_hat = spherical_ft(f, pdata, ecfg)?;
    let g_hat = spherical_ft(g, pdata, ecfg)?;
    let prod = f_hat.product(&g_hat)?;
    let space = pdata.space();
    let (decay, r_max) = match (f.decay(), g.decay()) {
        (DecayHint::Gaussian { rate: a }, DecayHint::Gaussian { rate: b }) => {
            let hint = DecayHint::Gaussian {
                rate: a * b / (a + b),
            };
            let r = hint.suggested_r_max(space).unwrap();
            (hint, r)
        }
        _ => (
            DecayHint::Unknown,
            (f.grid().r_max + g.grid().r_max).min(120.0),
        ),
    };
    let grid = Arc::new(RadialGrid::new(
        r_max,
        pdata.grid().lambda_max,
        f.grid().panels.points_per_panel,
    )?);
    inverse_ft_on_grid(pdata, &prod, grid, decay)
}

/// Precomputed eigenfunction table for one (spectral grid, radial grid)
/// pair. Families of functions sharing a grid pay for the ODE sweeps once;
/// every forward transform or synthesis on the pair is then a dense
/// matrix-vector product.
pub struct TransformPlan {
    pdata: Arc<PlancherelData>,
    grid: Arc<RadialGrid>,
    /// `phi_{lambda_i}(r_j)`, row-major `[i * n_r + j]`.
    table: Vec<f64>,
    /// `omega w_j A(r_j)` at the radial nodes.
    area: Vec<f64>,
}

impl TransformPlan {
    pub fn new(pdata: Arc<PlancherelData>, grid: Arc<RadialGrid>, ecfg: &EigenConfig) -> Result<Self> {
        let space = *pdata.space();
        let table = phi_table(&space, ecfg, pdata.grid().nodes(), grid.nodes())?;
        let area = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(&r, &w)| space.density(r).map(|a| space.omega() * w * a))
            .collect::<Result<Vec<f64>>>()?;
        // Plan-based synthesis has no subdivision escape hatch; reject grid
        // pairs whose oscillation the spectral panels cannot resolve.
        let osc = grid.r_max * pdata.grid().max_panel_width();
        if osc > PANEL_PHASE_BUDGET {
            return Err(Error::OscillationBudget(format!(
                "r_max {} times panel width {:.3} exceeds {PANEL_PHASE_BUDGET}; use synthesize()",
                grid.r_max,
                pdata.grid().max_panel_width()
            )));
        }
        Ok(TransformPlan {
            pdata,
            grid,
            table,
            area,
        })
    }

    pub fn pdata(&self) -> &Arc<PlancherelData> {
        &self.pdata
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Sample a callable on the plan's radial grid.
    pub fn function_from<F: Fn(f64) -> Complex64>(
        &self,
        decay: DecayHint,
        f: F,
    ) -> Result<RadialFunction> {
        RadialFunction::from_fn(self.pdata.space(), Arc::clone(&self.grid), decay, f)
    }

    /// Forward transform of a function living on the plan's radial grid.
    pub fn forward(&self, f: &RadialFunction) -> Result<SpectralFunction> {
        if !Arc::ptr_eq(f.grid(), &self.grid) {
            return Err(Error::GridMismatch(
                "function was not sampled on the plan's radial grid".into(),
            ));
        }
        let moments: Vec<Complex64> = f
            .values()
            .iter()
            .zip(&self.area)
            .map(|(u, a)| u * *a)
            .collect();
        if moments.iter().any(|m| !m.re.is_finite() || !m.im.is_finite()) {
            return Err(Error::NonFinite { what: "transform integrand" });
        }
        let abs: Vec<f64> = moments
            .iter()
            .zip(self.grid.weights())
            .map(|(m, w)| m.norm() / w)
            .collect();
        let frac = self.grid.panels.last_panel_fraction(&abs);
        if frac > TAIL_BUDGET {
            return Err(Error::TailBudget {
                what: "spherical transform",
                fraction: frac,
                budget: TAIL_BUDGET,
                hint: format!("; enlarge r_max beyond {}", self.grid.r_max),
            });
        }
        let n_r = self.grid.len();
        let values: Vec<Complex64> = (0..self.pdata.grid().len())
            .map(|i| {
                let row = &self.table[i * n_r..(i + 1) * n_r];
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, p) in moments.iter().zip(row) {
                    acc += m * *p;
                }
                acc
            })
            .collect();
        SpectralFunction::new(Arc::clone(self.pdata.grid()), values)
    }

    /// Synthesis of spectral samples onto the plan's radial grid (plus the
    /// origin, where `phi_lambda(0) = 1` exactly).
    pub fn synthesize(&self, f_hat: &SpectralFunction, decay: DecayHint) -> Result<RadialFunction> {
        check_grid_compat(f_hat, &self.pdata)?;
        let c0 = self.pdata.c0()?;
        let n_r = self.grid.len();
        let sg = self.pdata.grid();
        let mut acc = vec![Complex64::new(0.0, 0.0); n_r];
        let mut origin = Complex64::new(0.0, 0.0);
        for (i, ((&w, &d), v)) in sg
            .weights()
            .iter()
            .zip(self.pdata.density_values())
            .zip(f_hat.values())
            .enumerate()
        {
            let coef = v * (w * d);
            origin += coef;
            let row = &self.table[i * n_r..(i + 1) * n_r];
            for (slot, p) in acc.iter_mut().zip(row) {
                *slot += coef * *p;
            }
        }
        for v in &mut acc {
            *v *= c0;
        }
        Ok(RadialFunction::from_values(
            self.pdata.space(),
            Arc::clone(&self.grid),
            decay,
            acc,
            Some(origin * c0),
        ))
    }
}

/// Symmetric panel grid on `[-s_max, s_max]` for line functions.
#[derive(Debug)]
pub struct LineGrid {
    pub panels: Panels,
    pub s_max: f64,
}

impl LineGrid {
    pub fn new(s_max: f64, max_frequency: f64, points_per_panel: usize) -> Result<Self> {
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(Error::InvalidArgument(format!("bad s_max {s_max}")));
        }
        let width = (PANEL_PHASE_BUDGET / max_frequency.max(1.0)).min(0.5);
        let half = ((s_max / width).ceil() as usize).max(1);
        Ok(LineGrid {
            panels: Panels::uniform(-s_max, s_max, 2 * half, points_per_panel),
            s_max,
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
}

/// A function on the line sampled on a symmetric panel grid.
#[derive(Clone, Debug)]
pub struct LineFunction {
    grid: Arc<LineGrid>,
    values: Vec<Complex64>,
}

impl LineFunction {
    pub fn new(grid: Arc<LineGrid>, values: Vec<Complex64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::GridMismatch("line grid/value length".into()));
        }
        Ok(LineFunction { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: Arc<LineGrid>, f: F) -> Self {
        let values = grid.nodes().iter().map(|&s| f(s)).collect();
        LineFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<LineGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `int |g(s)|^p ds` to the 1/p.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        let vals: Vec<f64> = self.values.iter().map(|v| v.norm().powf(p)).collect();
        self.grid.panels.integrate(&vals).powf(1.0 / p)
    }
}

/// Euclidean Fourier transform `F(lambda) = int e^{-i lambda s} g(s) ds`
/// by direct quadrature on the line grid.
pub fn euclidean_ft(g: &LineFunction, lambdas: &[f64]) -> Vec<Complex64> {
    lambdas
        .iter()
        .map(|&l| {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((&s, &w), v) in g.grid().nodes().iter().zip(g.grid().weights()).zip(g.values()) {
                acc += v * Complex64::new(0.0, -l * s).exp() * w;
            }
            acc
        })
        .collect()
}

/// Inverse Euclidean transform `(1/2pi) int e^{i lambda s} F d lambda` of an
/// evenly extended spectral sample set: `(1/pi) int_0^inf F cos(lambda s)`.
pub fn euclidean_inverse_even(
    lambdas: &[f64],
    weights: &[f64],
    values: &[Complex64],
    s: f64,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&l, &w), v) in lambdas.iter().zip(weights).zip(values) {
        acc += v * ((l * s).cos() * w);
    }
    acc / std::f64::consts::PI
}

/// Abel/Radon transform of a radial function via the factorization
/// `FourierLine(R f) = f_hat`: forward-transform, then even inverse
/// Euclidean transform onto the line grid.
pub fn abel_transform(
    pdata: &PlancherelData,
    f: &RadialFunction,
    s_grid: Arc<LineGrid>,
    ecfg: &EigenConfig,
) -> Result<LineFunction> {
    let f_hat = spherical_ft(f, pdata, ecfg)?;
    abel_from_spectrum(pdata, &f_hat, s_grid)
}

/// Abel image straight from the spectral samples.
pub fn abel_from_spectrum(
    pdata: &PlancherelData,
    f_hat: &SpectralFunction,
    s_grid: Arc<LineGrid>,
) -> Result<LineFunction> {
    check_grid_compat(f_hat, pdata)?;
    let width = pdata.grid().max_panel_width();
    let factor = ((s_grid.s_max * width / PANEL_PHASE_BUDGET).ceil() as usize).max(1);
    let (lambdas, weights, values): (Vec<f64>, Vec<f64>, Vec<Complex64>) = if factor == 1 {
        (
            pdata.grid().nodes().to_vec(),
            pdata.grid().weights().to_vec(),
            f_hat.values().to_vec(),
        )
    } else {
        let sub = pdata.grid().panels.subdivided(factor);
        let re: Vec<f64> = f_hat.values().iter().map(|v| v.re).collect();
        let im: Vec<f64> = f_hat.values().iter().map(|v| v.im).collect();
        let sre = CubicSpline::new(pdata.grid().nodes(), &re)?;
        let sim = CubicSpline::new(pdata.grid().nodes(), &im)?;
        let vals = sub
            .nodes
            .iter()
            .map(|&l| Complex64::new(sre.eval(l), sim.eval(l)))
            .collect();
        (sub.nodes.clone(), sub.weights.clone(), vals)
    };
    let out: Vec<Complex64> = s_grid
        .nodes()
        .iter()
        .map(|&s| euclidean_inverse_even(&lambdas, &weights, &values, s))
        .collect();
    LineFunction::new(s_grid, out)
}
