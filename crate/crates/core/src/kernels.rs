//! Heat kernel and Schrodinger propagator by spectral synthesis, plus the
//! direct spectral evaluator for `||h_t||_2`.
//!
//! The transform of the heat kernel is `e^{-t (lambda^2 + rho^2)}`, so the
//! kernel itself is a pure synthesis problem; the Schrodinger flow is the
//! unimodular multiplier `e^{-i t (lambda^2 + rho^2)}` applied to the data's
//! transform and never materialized as a space-side oscillatory kernel.

use crate::eigen::EigenConfig;
use crate::error::{Error, Result};
use crate::spectral::PlancherelData;
use crate::transform::{
    spherical_ft, synthesize, DecayHint, RadialFunction, RadialGrid, SpectralFunction,
    SpectralSource,
};
use num_complex::Complex64;
use std::sync::Arc;

/// Which propagator a `KernelSpec` describes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelKind {
    Heat,
    Schrodinger,
}

/// Validated parameters for a kernel synthesis.
#[derive(Clone, Copy, Debug)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub t: f64,
}

impl KernelSpec {
    pub fn heat(t: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Heat,
            t,
        }
    }

    pub fn schrodinger(t: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Schrodinger,
            t,
        }
    }

    pub fn validate(&self, lambda_max: f64) -> Result<()> {
        if !self.t.is_finite() {
            return Err(Error::NonFinite { what: "time" });
        }
        match self.kind {
            KernelKind::Heat => {
                let t_min = min_heat_time(lambda_max);
                if self.t < t_min {
                    return Err(Error::Precondition(format!(
                        "heat time {} below the synthesis floor {t_min:.2e} at lambda_max {lambda_max}; \
                         raise lambda_max to {:.1}",
                        self.t,
                        (18.0 / self.t.max(1e-12)).sqrt()
                    )));
                }
            }
            KernelKind::Schrodinger => {
                if lambda_max * lambda_max * self.t.abs() > 5e3 {
                    return Err(Error::OscillationBudget(format!(
                        "lambda_max^2 |t| = {:.1} exceeds the 5e3 budget",
                        lambda_max * lambda_max * self.t.abs()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Smallest heat time synthesizable at a given spectral cutoff:
/// `e^{-t lambda_max^2} <= 1.5e-8` keeps the truncation below the 1e-6
/// synthesis target.
pub fn min_heat_time(lambda_max: f64) -> f64 {
    18.0 / (lambda_max * lambda_max)
}

/// Radial grid sized for the heat kernel at time `t`.
///
/// The kernel's envelope is `e^{-rho r - r^2/4t}`, so the mass integrand
/// `h_t A` peaks at `r = 2 rho t`; the grid stops where the *true* kernel
/// meets the synthesis noise floor, because past that point the
/// `e^{2 rho r}` growth of `A` would amplify quadrature noise into the
/// `L^1` integral.
pub fn heat_grid(pdata: &PlancherelData, t: f64, pts: usize) -> Result<(Arc<RadialGrid>, DecayHint)> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("bad heat time {t}")));
    }
    let rho = pdata.space().rho();
    let r_max = 2.0 * rho * t + (44.0 * t).sqrt() + 1.0;
    Ok((
        Arc::new(RadialGrid::new(r_max, pdata.grid().lambda_max, pts)?),
        DecayHint::Gaussian { rate: 1.0 / (4.0 * t) },
    ))
}

/// Heat kernel values at arbitrary radii:
/// `h_t(r) = C0 int e^{-t(lambda^2 + rho^2)} phi_lambda(r) |c|^{-2} dlambda`.
pub fn heat_kernel_at(pdata: &PlancherelData, t: f64, rs: &[f64]) -> Result<Vec<f64>> {
    KernelSpec::heat(t).validate(pdata.grid().lambda_max)?;
    let rho2 = pdata.space().rho().powi(2);
    let mult = move |l: f64| Complex64::new((-t * (l * l + rho2)).exp(), 0.0);
    let vals = synthesize(pdata, SpectralSource::Multiplier(&mult), rs, 0.0, None)?;
    Ok(vals.iter().map(|v| v.re).collect())
}

/// Heat kernel on a grid sized for its own decay.
pub fn heat_kernel(pdata: &PlancherelData, t: f64, pts: usize) -> Result<RadialFunction> {
    KernelSpec::heat(t).validate(pdata.grid().lambda_max)?;
    let (grid, hint) = heat_grid(pdata, t, pts)?;
    let mut rs = vec![0.0];
    rs.extend_from_slice(grid.nodes());
    let vals = heat_kernel_at(pdata, t, &rs)?;
    let values: Vec<Complex64> = vals[1..].iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(RadialFunction::from_values(
        pdata.space(),
        grid,
        hint,
        values,
        Some(Complex64::new(vals[0], 0.0)),
    ))
}

/// The transform of the heat kernel, exactly `e^{-t(lambda^2 + rho^2)}`.
pub fn heat_multiplier(pdata: &PlancherelData, t: f64) -> Result<SpectralFunction> {
    let rho2 = pdata.space().rho().powi(2);
    SpectralFunction::from_fn(Arc::clone(pdata.grid()), |l| {
        Complex64::new((-t * (l * l + rho2)).exp(), 0.0)
    })
}

/// `||h_t||_2` evaluated directly on the spectral side:
/// `e^{-t rho^2} (C0 int e^{-2 t lambda^2} |c|^{-2} dlambda)^{1/2}`.
pub fn heat_l2_norm(pdata: &PlancherelData, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("heat time must be positive, got {t}")));
    }
    let c0 = pdata.c0()?;
    let rho2 = pdata.space().rho().powi(2);
    let integral = pdata.integrate_against_density(|l| (-2.0 * t * l * l).exp());
    Ok((-t * rho2).exp() * (c0 * integral).sqrt())
}

/// Same without the `e^{-t rho^2}` factor, for the large-time slope fits.
pub fn heat_l2_norm_deflated(pdata: &PlancherelData, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("heat time must be positive, got {t}")));
    }
    let c0 = pdata.c0()?;
    let integral = pdata.integrate_against_density(|l| (-2.0 * t * l * l).exp());
    Ok((c0 * integral).sqrt())
}

/// Schrodinger evolution `u(t, .) = InvFT(e^{-i t (lambda^2 + rho^2)} f_hat)`
/// of radial initial data with rapidly decaying transform.
pub fn schrodinger_evolve(
    pdata: &PlancherelData,
    f: &RadialFunction,
    t: f64,
    ecfg: &EigenConfig,
) -> Result<RadialFunction> {
    KernelSpec::schrodinger(t).validate(pdata.grid().lambda_max)?;
    let f_hat = spherical_ft(f, pdata, ecfg)?;
    schrodinger_evolve_spectrum(pdata, &f_hat, f.decay(), t)
}

/// Evolution from already-computed spectral samples.
pub fn schrodinger_evolve_spectrum(
    pdata: &PlancherelData,
    f_hat: &SpectralFunction,
    data_decay: DecayHint,
    t: f64,
) -> Result<RadialFunction> {
    KernelSpec::schrodinger(t).validate(pdata.grid().lambda_max)?;
    let rho2 = pdata.space().rho().powi(2);
    let mult = move |l: f64| (-Complex64::i() * t * (l * l + rho2)).exp();
    // |u(t,.)| spreads like the free Gaussian flow; size the output grid for
    // the slowest plausible decay and fall back to the input grid otherwise.
    let (grid, hint) = match data_decay {
        DecayHint::Gaussian { rate } => {
            let spread = rate / (1.0 + 16.0 * rate * rate * t * t);
            let hint = DecayHint::Gaussian { rate: spread };
            let r_max = hint.suggested_r_max(pdata.space()).unwrap();
            (
                Arc::new(RadialGrid::new(r_max, pdata.grid().lambda_max, 32)?),
                hint,
            )
        }
        other => {
            let r_max = (pdata.grid().lambda_max * 2.0 * t.abs() + 20.0).min(120.0);
            (
                Arc::new(RadialGrid::new(r_max, pdata.grid().lambda_max, 32)?),
                other,
            )
        }
    };
    let extra_freq = 2.0 * t.abs() * pdata.grid().lambda_max;
    let mut rs = vec![0.0];
    rs.extend_from_slice(grid.nodes());
    let vals = synthesize(
        pdata,
        SpectralSource::Modulated {
            samples: f_hat,
            multiplier: &mult,
        },
        &rs,
        extra_freq,
        None,
    )?;
    Ok(RadialFunction::from_values(
        pdata.space(),
        grid,
        hint,
        vals[1..].to_vec(),
        Some(vals[0]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::EigenConfig;
    use crate::oracles;
    use crate::space::ModelSpace;
    use crate::spectral::SpectralGrid;
    use crate::transform::{convolve_radial, lp_norm, spectral_l2};
    use std::sync::OnceLock;

    fn h3() -> (ModelSpace, Arc<PlancherelData>, EigenConfig) {
        static CAL: OnceLock<(ModelSpace, Arc<PlancherelData>)> = OnceLock::new();
        let (space, pdata) = CAL.get_or_init(|| {
            let space = ModelSpace::hyperbolic(3).unwrap();
            let ecfg = EigenConfig::default();
            let grid = Arc::new(SpectralGrid::new(40.0, 2560).unwrap());
            let pdata = PlancherelData::tabulate(&space, grid, &ecfg).unwrap();
            let pdata = crate::spectral::calibrate(pdata, &ecfg, &[0.5, 1.0, 2.0]).unwrap();
            (space, Arc::new(pdata))
        });
        (*space, Arc::clone(pdata), EigenConfig::default())
    }

    #[test]
    fn heat_kernel_matches_h3_closed_form() {
        let (_, pdata, _) = h3();
        let rs = [0.0, 0.5, 1.0, 2.0, 4.0];
        let vals = heat_kernel_at(&pdata, 1.0, &rs).unwrap();
        for (r, v) in rs.iter().zip(&vals) {
            let expect = oracles::h3_heat_kernel(1.0, *r);
            assert!(
                (v - expect).abs() < 1e-8,
                "r = {r}: {v} vs {expect}"
            );
        }
        // spot value at the origin
        let expect0 = (4.0 * std::f64::consts::PI).powf(-1.5) * (-1.0f64).exp();
        assert!((vals[0] - expect0).abs() < 1e-9);
    }

    #[test]
    fn heat_kernel_mass_and_positivity() {
        let (_, pdata, _) = h3();
        for t in [0.05, 0.5, 5.0] {
            let h = heat_kernel(&pdata, t, 32).unwrap();
            let mass = lp_norm(&h, 1.0).unwrap();
            assert!((mass - 1.0).abs() <= 1e-4, "t = {t}: mass {mass}");
            let peak = h.origin().re;
            for v in h.values() {
                assert!(v.re > -1e-8 * peak, "negative ringing at t = {t}");
            }
        }
    }

    #[test]
    fn heat_transform_identity() {
        let (_, pdata, ecfg) = h3();
        let t = 0.5;
        let h = heat_kernel(&pdata, t, 32).unwrap();
        let h_hat = spherical_ft(&h, &pdata, &ecfg).unwrap();
        let mut worst = 0.0f64;
        for (l, v) in pdata.grid().nodes().iter().zip(h_hat.values()) {
            let expect = (-t * (l * l + 1.0)).exp();
            worst = worst.max((v.re - expect).abs());
        }
        assert!(worst < 1e-6, "sup gap {worst}");
        // spec spot value: t = 0.5, lambda = 2 -> e^{-2.5}
        let idx = pdata
            .grid()
            .nodes()
            .iter()
            .position(|&l| (l - 2.0).abs() < 0.05)
            .unwrap();
        assert!((h_hat.values()[idx].re - (-0.5 * (pdata.grid().nodes()[idx].powi(2) + 1.0)).exp()).abs() < 1e-7);
    }

    #[test]
    fn heat_time_floor_is_enforced() {
        let (_, pdata, _) = h3();
        let err = heat_kernel(&pdata, 1e-4, 32);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn heat_l2_norm_consistency() {
        let (_, pdata, _) = h3();
        for t in [0.05, 0.5, 5.0] {
            let direct = heat_l2_norm(&pdata, t).unwrap();
            let h = heat_kernel(&pdata, t, 32).unwrap();
            let synthesized = lp_norm(&h, 2.0).unwrap();
            assert!(
                (direct - synthesized).abs() <= 1e-4 * direct,
                "t = {t}: {direct} vs {synthesized}"
            );
        }
    }

    #[test]
    fn heat_semigroup_under_convolution() {
        let (_, pdata, ecfg) = h3();
        let (t, s) = (0.4, 0.7);
        let ht = heat_kernel(&pdata, t, 32).unwrap();
        let hs = heat_kernel(&pdata, s, 32).unwrap();
        let conv = convolve_radial(&pdata, &ht, &hs, &ecfg).unwrap();
        let mut rs: Vec<f64> = vec![0.0, 1.0, 2.0, 5.0];
        rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = heat_kernel_at(&pdata, t + s, &rs).unwrap();
        for (r, e) in rs.iter().zip(&expect) {
            let got = if *r == 0.0 { conv.origin() } else { conv.eval(*r) };
            assert!(
                (got.re - e).abs() <= 1e-5 * expect[0],
                "r = {r}: {} vs {e}",
                got.re
            );
        }
    }

    #[test]
    fn schrodinger_is_unitary_and_composes() {
        let (space, pdata, ecfg) = h3();
        let f = RadialFunction::gaussian(&space, 1.0, pdata.grid().lambda_max, 32).unwrap();
        let n0 = lp_norm(&f, 2.0).unwrap();

        // t = 0 is the identity.
        let u0 = schrodinger_evolve(&pdata, &f, 0.0, &ecfg).unwrap();
        for (r, v) in u0.grid().nodes().iter().zip(u0.values()) {
            assert!((v.re - (-r * r).exp()).abs() < 1e-8 && v.im.abs() < 1e-10);
        }

        let t = 0.2;
        let u = schrodinger_evolve(&pdata, &f, t, &ecfg).unwrap();
        let nt = lp_norm(&u, 2.0).unwrap();
        assert!((nt - n0).abs() <= 1e-4 * n0, "{nt} vs {n0}");
        // L2 conservation holds exactly on the spectral side.
        let u_hat = spherical_ft(&u, &pdata, &ecfg).unwrap();
        let back = spectral_l2(&pdata, &u_hat, 0.0).unwrap();
        assert!((back - n0).abs() <= 1e-4 * n0);

        // Semigroup: two quarter steps equal one half step.
        let u2 = schrodinger_evolve(&pdata, &u, t, &ecfg).unwrap();
        let direct = schrodinger_evolve(&pdata, &f, 2.0 * t, &ecfg).unwrap();
        let scale = direct.max_abs();
        let mut worst = 0.0f64;
        for (r, v) in direct.grid().nodes().iter().zip(direct.values()) {
            if *r <= u2.grid().r_max {
                worst = worst.max((u2.eval(*r) - v).norm());
            }
        }
        assert!(worst <= 1e-5 * scale, "semigroup gap {}", worst / scale);
    }

    #[test]
    fn schrodinger_budget_is_enforced() {
        let (space, pdata, ecfg) = h3();
        let f = RadialFunction::gaussian(&space, 1.0, pdata.grid().lambda_max, 32).unwrap();
        // 40^2 * 10 = 16000 > 5e3
        assert!(matches!(
            schrodinger_evolve(&pdata, &f, 10.0, &ecfg),
            Err(Error::OscillationBudget(_))
        ));
    }

    #[test]
    fn kernel_spec_validation() {
        assert!(KernelSpec::heat(0.5).validate(60.0).is_ok());
        assert!(KernelSpec::heat(1e-4).validate(60.0).is_err());
        assert!(KernelSpec::schrodinger(1.0).validate(60.0).is_ok());
        assert!(KernelSpec::schrodinger(2.0).validate(60.0).is_err());
        assert!(KernelSpec::heat(f64::NAN).validate(60.0).is_err());
    }
}
