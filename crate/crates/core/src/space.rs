//! Rank-one model geometries.
//!
//! A model space is described entirely by its radial volume density `A(r)`:
//! real hyperbolic space `H^n` has `A(r) = sinh^{n-1}(r)` and the Damek-Ricci
//! family has `A(r) = 2^{m+k} sinh^{m+k}(r/2) cosh^k(r/2)`. Both grow like
//! `e^{2 rho r}` with `rho` half the mean curvature of horospheres, and both
//! behave like `r^{2 alpha + 1}` near the origin with `alpha = (n-2)/2`.

use crate::error::{Error, Result};
use serde::Serialize;

const LN_2: f64 = std::f64::consts::LN_2;

/// Which closed-form reference solutions exist for a given space.
///
/// Only `H^3` carries fully elementary expressions for the eigenfunction,
/// heat kernel and c-function; everything else is validated through
/// self-consistency checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleFlags {
    pub eigenfunction: bool,
    pub heat_kernel: bool,
    pub c_function: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum SpaceKind {
    Hyperbolic { n: u32 },
    DamekRicci { m: u32, k: u32 },
}

/// A concrete rank-one model geometry.
///
/// Immutable after construction; all evaluations are pure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpace {
    kind: SpaceKind,
    n: u32,
    rho: f64,
    alpha: f64,
    omega: f64,
    oracle: OracleFlags,
}

impl ModelSpace {
    /// Real hyperbolic space `H^n` with constant curvature -1,
    /// so `A(r) = sinh^{n-1}(r)` and `rho = (n-1)/2`.
    pub fn hyperbolic(n: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let n = n as u32;
        let oracle = OracleFlags {
            eigenfunction: n == 3,
            heat_kernel: n == 3,
            c_function: n == 3,
        };
        Ok(ModelSpace {
            kind: SpaceKind::Hyperbolic { n },
            n,
            rho: (n as f64 - 1.0) / 2.0,
            alpha: (n as f64 - 2.0) / 2.0,
            omega: sphere_area(n),
            oracle,
        })
    }

    /// Damek-Ricci space with `m`-dimensional part of the nilpotent algebra
    /// and `k`-dimensional center: `A(r) = 2^{m+k} sinh^{m+k}(r/2) cosh^k(r/2)`,
    /// `n = m + k + 1` and `rho = (m + 2k)/4`.
    ///
    /// `DamekRicci(0, k)` reduces exactly to `H^{k+1}`.
    pub fn damek_ricci(m: i64, k: i64) -> Result<Self> {
        if m < 0 || k < 1 {
            return Err(Error::InvalidSpace(format!(
                "Damek-Ricci parameters need m >= 0 and k >= 1, got ({m}, {k})"
            )));
        }
        let (m, k) = (m as u32, k as u32);
        let n = m + k + 1;
        if n < 2 {
            return Err(Error::InvalidSpace(format!(
                "Damek-Ricci ({m}, {k}) gives dimension {n} < 2"
            )));
        }
        Ok(ModelSpace {
            kind: SpaceKind::DamekRicci { m, k },
            n,
            rho: (m as f64 + 2.0 * k as f64) / 4.0,
            alpha: (n as f64 - 2.0) / 2.0,
            omega: sphere_area(n),
            oracle: OracleFlags {
                eigenfunction: false,
                heat_kernel: false,
                c_function: false,
            },
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// Dimension `n` of the manifold.
    pub fn dim(&self) -> u32 {
        self.n
    }

    /// Half the mean curvature of horospheres; `A(r) ~ e^{2 rho r}`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `alpha = (n-2)/2`, the exponent in `A(r) ~ r^{2 alpha + 1}` near 0.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Surface area of the unit sphere `S^{n-1}`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn oracle_flags(&self) -> OracleFlags {
        self.oracle
    }

    /// Volume density `A(r)`. Evaluated in log space for large radii so that
    /// `sinh^{n-1}(r)` never overflows intermediate terms.
    pub fn density(&self, r: f64) -> Result<f64> {
        if !r.is_finite() {
            return Err(Error::NonFinite { what: "radius" });
        }
        if r < 0.0 {
            return Err(Error::NegativeRadius(r));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let v = match self.kind {
            SpaceKind::Hyperbolic { n } => {
                let p = (n - 1) as i32;
                if r <= 20.0 {
                    r.sinh().powi(p)
                } else {
                    (p as f64 * ln_sinh(r)).exp()
                }
            }
            SpaceKind::DamekRicci { m, k } => {
                let h = r / 2.0;
                let mk = (m + k) as i32;
                if r <= 40.0 {
                    (2.0 * h.sinh()).powi(mk) * h.cosh().powi(k as i32)
                } else {
                    (mk as f64 * (LN_2 + ln_sinh(h)) + k as f64 * ln_cosh(h)).exp()
                }
            }
        };
        Ok(v)
    }

    /// Logarithmic derivative `A'(r)/A(r)`.
    ///
    /// Computed from `coth`/`tanh` in a form that stays exact for large `r`
    /// (tends to `2 rho` from above) instead of as a ratio of huge numbers.
    pub fn log_density_derivative(&self, r: f64) -> Result<f64> {
        if !r.is_finite() {
            return Err(Error::NonFinite { what: "radius" });
        }
        if r <= 0.0 {
            return Err(Error::NegativeRadius(r));
        }
        let v = match self.kind {
            SpaceKind::Hyperbolic { n } => (n - 1) as f64 * coth(r),
            SpaceKind::DamekRicci { m, k } => {
                let h = r / 2.0;
                0.5 * (m + k) as f64 * coth(h) + 0.5 * k as f64 * h.tanh()
            }
        };
        Ok(v)
    }

    /// Coefficient `c1` in `A'(r)/A(r) = (2 alpha + 1)/r + c1 r + O(r^3)`,
    /// used by the even power-series launch of the eigenfunction ODE.
    pub fn log_density_series_c1(&self) -> f64 {
        match self.kind {
            SpaceKind::Hyperbolic { n } => (n - 1) as f64 / 3.0,
            SpaceKind::DamekRicci { m, k } => (m + k) as f64 / 12.0 + k as f64 / 4.0,
        }
    }

    /// Serializable descriptor used in reports and JSON sidecars.
    pub fn descriptor(&self) -> SpaceDescriptor {
        SpaceDescriptor {
            kind: self.kind,
            n: self.n,
            rho: self.rho,
            alpha: self.alpha,
            omega: self.omega,
            oracle_flags: self.oracle,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpaceDescriptor {
    #[serde(flatten)]
    pub kind: SpaceKind,
    pub n: u32,
    pub rho: f64,
    pub alpha: f64,
    pub omega: f64,
    pub oracle_flags: OracleFlags,
}

/// `ln sinh(r)` without overflow: `r + ln(1 - e^{-2r}) - ln 2`.
fn ln_sinh(r: f64) -> f64 {
    r + (-(-2.0 * r).exp()).ln_1p() - LN_2
}

/// `ln cosh(r)` without overflow.
fn ln_cosh(r: f64) -> f64 {
    r + ((-2.0 * r).exp()).ln_1p() - LN_2
}

/// `coth(r)` for `r > 0`, exact to machine precision over the whole range.
fn coth(r: f64) -> f64 {
    if r < 18.0 {
        1.0 / r.tanh()
    } else {
        let e = (-2.0 * r).exp();
        (1.0 + e) / (1.0 - e)
    }
}

/// Surface area of `S^{n-1}`: `2 pi^{n/2} / Gamma(n/2)`.
///
/// `Gamma(n/2)` is exact for integer and half-integer arguments, so no
/// general gamma routine is needed.
fn sphere_area(n: u32) -> f64 {
    let pi = std::f64::consts::PI;
    2.0 * pi.powf(n as f64 / 2.0) / gamma_half_integer(n)
}

/// `Gamma(n/2)` for integer `n >= 1`.
fn gamma_half_integer(n: u32) -> f64 {
    let mut x = n as f64 / 2.0;
    let mut acc = 1.0;
    while x > 1.0 {
        x -= 1.0;
        acc *= x;
    }
    if (x - 0.5).abs() < 1e-12 {
        acc * std::f64::consts::PI.sqrt()
    } else {
        acc // Gamma(1) = 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_three_constants() {
        let s = ModelSpace::hyperbolic(3).unwrap();
        assert_eq!(s.dim(), 3);
        assert!((s.rho() - 1.0).abs() < 1e-15);
        assert!((s.alpha() - 0.5).abs() < 1e-15);
        assert!((s.omega() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(s.oracle_flags().eigenfunction);
    }

    #[test]
    fn hyperbolic_two_constants() {
        let s = ModelSpace::hyperbolic(2).unwrap();
        assert!((s.rho() - 0.5).abs() < 1e-15);
        assert!((s.alpha() - 0.0).abs() < 1e-15);
        assert!((s.omega() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_low_dimension() {
        assert!(ModelSpace::hyperbolic(1).is_err());
        assert!(ModelSpace::hyperbolic(0).is_err());
        assert!(ModelSpace::damek_ricci(2, 0).is_err());
        assert!(ModelSpace::damek_ricci(-1, 1).is_err());
    }

    #[test]
    fn density_values() {
        let s = ModelSpace::hyperbolic(3).unwrap();
        assert_eq!(s.density(0.0).unwrap(), 0.0);
        let a1 = s.density(1.0).unwrap();
        assert!((a1 - 1.0f64.sinh().powi(2)).abs() < 1e-14);
        assert!((a1 - 1.38109).abs() < 1e-5);
        assert!(s.density(-0.5).is_err());
    }

    #[test]
    fn density_no_overflow_at_large_radius() {
        // sinh^2(400) would overflow if squared naively outside log space.
        let s = ModelSpace::hyperbolic(3).unwrap();
        let a = s.density(300.0).unwrap();
        let expect = (2.0 * (300.0 - LN_2)).exp();
        assert!((a / expect - 1.0).abs() < 1e-12);
        // H^9 near the top of the double range stays finite via the log form.
        let s9 = ModelSpace::hyperbolic(9).unwrap();
        assert!(s9.density(85.0).unwrap().is_finite());
    }

    #[test]
    fn log_derivative_matches_coth_and_limit() {
        let s = ModelSpace::hyperbolic(3).unwrap();
        let d = s.log_density_derivative(1.0).unwrap();
        assert!((d - 2.0 / 1.0f64.tanh()).abs() < 1e-14);
        // (A'/A)(40) = 2 coth(40) = 2 to machine precision, no overflow.
        let d40 = s.log_density_derivative(40.0).unwrap();
        assert!((d40 - 2.0).abs() < 1e-15);
        for r in [30.0, 35.0, 50.0, 200.0] {
            let d = s.log_density_derivative(r).unwrap();
            assert!((d - 2.0 * s.rho()).abs() <= 1e-8);
        }
        assert!(s.log_density_derivative(0.0).is_err());
    }

    #[test]
    fn damek_ricci_rho_limit() {
        // rho = lim (A'/A)/2 = (m + 2k)/4, checked at r = 50.
        for (m, k) in [(4, 3), (8, 1), (0, 2), (5, 7)] {
            let s = ModelSpace::damek_ricci(m, k).unwrap();
            let expect = (m as f64 + 2.0 * k as f64) / 4.0;
            assert!((s.rho() - expect).abs() < 1e-15);
            let half = s.log_density_derivative(50.0).unwrap() / 2.0;
            assert!((half - expect).abs() < 1e-10, "({m},{k}): {half} vs {expect}");
            assert_eq!(s.density(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn damek_ricci_degenerate_matches_hyperbolic() {
        // 2 sinh(r/2) cosh(r/2) = sinh(r), so DR(0,k) has the H^{k+1} density.
        let dr = ModelSpace::damek_ricci(0, 2).unwrap();
        let h3 = ModelSpace::hyperbolic(3).unwrap();
        assert!((dr.rho() - h3.rho()).abs() < 1e-15);
        for r in [0.3, 1.0, 5.0, 17.0, 60.0] {
            let a = dr.density(r).unwrap();
            let b = h3.density(r).unwrap();
            assert!((a / b - 1.0).abs() < 1e-12, "r = {r}");
            let da = dr.log_density_derivative(r).unwrap();
            let db = h3.log_density_derivative(r).unwrap();
            assert!((da - db).abs() < 1e-12 * db.abs());
        }
    }

    #[test]
    fn purely_exponential_growth_window() {
        // A(r)/e^{2 rho r} stays inside fixed bounds on [1, 50].
        for s in [
            ModelSpace::hyperbolic(3).unwrap(),
            ModelSpace::hyperbolic(5).unwrap(),
            ModelSpace::damek_ricci(4, 3).unwrap(),
        ] {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            let mut r = 1.0;
            while r <= 50.0 {
                let ratio = s.density(r).unwrap() / (2.0 * s.rho() * r).exp();
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                r += 0.25;
            }
            assert!(lo > 0.0 && hi.is_finite());
            assert!(hi / lo < 10.0, "ratio window too wide: {lo}..{hi}");
        }
    }

    #[test]
    fn small_radius_power_law() {
        // A(r)/r^{2 alpha + 1} converges to a positive constant near 0.
        for s in [
            ModelSpace::hyperbolic(3).unwrap(),
            ModelSpace::hyperbolic(6).unwrap(),
            ModelSpace::damek_ricci(4, 3).unwrap(),
        ] {
            let p = 2.0 * s.alpha() + 1.0;
            let mut vals = Vec::new();
            let mut r = 1e-6;
            while r <= 1.0001e-4 {
                vals.push(s.density(r).unwrap() / r.powf(p));
                r *= 10.0f64.powf(0.25);
            }
            let first = vals[0];
            for v in &vals {
                assert!((v / first - 1.0).abs() < 1e-6, "variation too large");
            }
            assert!(first > 0.0);
        }
    }

    #[test]
    fn series_c1_consistency() {
        // c1 from the symbolic formula matches a finite-difference estimate of
        // A'/A - (2 alpha + 1)/r near zero.
        for s in [
            ModelSpace::hyperbolic(3).unwrap(),
            ModelSpace::hyperbolic(7).unwrap(),
            ModelSpace::damek_ricci(4, 3).unwrap(),
        ] {
            let p = 2.0 * s.alpha() + 1.0;
            let r = 1e-3;
            let rem = s.log_density_derivative(r).unwrap() - p / r;
            assert!(
                (rem / r - s.log_density_series_c1()).abs() < 1e-4,
                "c1 mismatch for {:?}",
                s.kind()
            );
        }
    }

    #[test]
    fn sphere_areas() {
        let pi = std::f64::consts::PI;
        assert!((sphere_area(2) - 2.0 * pi).abs() < 1e-12);
        assert!((sphere_area(3) - 4.0 * pi).abs() < 1e-12);
        assert!((sphere_area(4) - 2.0 * pi * pi).abs() < 1e-12);
        assert!((sphere_area(5) - 8.0 * pi * pi / 3.0).abs() < 1e-12);
    }
}
