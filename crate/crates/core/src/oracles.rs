//! Closed-form reference solutions used to validate the numerical pipeline.
//!
//! Everything here is elementary: the `H^3` radial eigenfunction and heat
//! kernel, the Euclidean Gaussian Fourier pairs, and the free Schrodinger
//! evolution of a Gaussian on the line. These functions back the test
//! suites and the verification checks that call for an independent oracle;
//! no production code path depends on them.

use num_complex::Complex64;

/// `H^3` radial eigenfunction: `phi_lambda(r) = sin(lambda r) / (lambda sinh r)`,
/// extended by `r / sinh r` at `lambda = 0` and by 1 at `r = 0`.
pub fn h3_phi(lambda: Complex64, r: f64) -> Complex64 {
    if r == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    if lambda.norm() < 1e-12 {
        return Complex64::new(r / r.sinh(), 0.0);
    }
    (lambda * r).sin() / (lambda * r.sinh())
}

/// `H^3` Plancherel density `|c(lambda)|^{-2} = lambda^2`.
pub fn h3_c_density(lambda: f64) -> f64 {
    lambda * lambda
}

/// `H^3` inversion constant `C0 = 1/(2 pi^2)`.
pub fn h3_c0() -> f64 {
    0.5 / (std::f64::consts::PI * std::f64::consts::PI)
}

/// `H^3` heat kernel `(4 pi t)^{-3/2} e^{-t} (r / sinh r) e^{-r^2 / 4t}`.
pub fn h3_heat_kernel(t: f64, r: f64) -> f64 {
    let pref = (4.0 * std::f64::consts::PI * t).powf(-1.5) * (-t).exp();
    let shape = if r == 0.0 { 1.0 } else { r / r.sinh() };
    pref * shape * (-r * r / (4.0 * t)).exp()
}

/// Spherical transform on `H^3` of the Gaussian `u(r) = e^{-a r^2}`:
/// `(2 pi / lambda) sqrt(pi / a) e^{(1 - lambda^2)/(4a)} sin(lambda / 2a)`.
pub fn h3_gaussian_ft(a: f64, lambda: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let envelope = (pi / a).sqrt() * ((1.0 - lambda * lambda) / (4.0 * a)).exp();
    if lambda.abs() < 1e-8 {
        // limit of sin(lambda/2a)/lambda
        2.0 * pi * envelope / (2.0 * a)
    } else {
        2.0 * pi / lambda * envelope * (lambda / (2.0 * a)).sin()
    }
}

/// Radon/Abel image of the `H^3` heat kernel:
/// `e^{-t} (4 pi t)^{-1/2} e^{-s^2 / 4t}` (the `rho^2 = 1` case).
pub fn h3_heat_abel(t: f64, s: f64) -> f64 {
    (-t).exp() / (4.0 * std::f64::consts::PI * t).sqrt() * (-s * s / (4.0 * t)).exp()
}

/// Euclidean pair with the convention `F(l) = int e^{-i l s} g(s) ds`:
/// `g(s) = e^{-a s^2}` maps to `sqrt(pi/a) e^{-l^2 / 4a}`.
pub fn line_gaussian_ft(a: f64, lambda: f64) -> f64 {
    (std::f64::consts::PI / a).sqrt() * (-lambda * lambda / (4.0 * a)).exp()
}

/// Modulus of the free Schrodinger evolution of `e^{-a s^2}` on the line at
/// time `t`: `(1 + 16 a^2 t^2)^{-1/4} e^{-b s^2}` with `b = a/(1 + 16 a^2 t^2)`.
pub fn line_schrodinger_gaussian_abs(a: f64, t: f64, s: f64) -> f64 {
    let den = 1.0 + 16.0 * a * a * t * t;
    den.powf(-0.25) * (-a * s * s / den).exp()
}

/// Decay rate of the modulus above; the fitter validation target.
pub fn line_schrodinger_rate(a: f64, t: f64) -> f64 {
    a / (1.0 + 16.0 * a * a * t * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h3_phi_normalization() {
        assert_eq!(h3_phi(Complex64::new(2.0, 0.0), 0.0), Complex64::new(1.0, 0.0));
        // lambda = i rho = i gives the constant eigenfunction.
        let v = h3_phi(Complex64::new(0.0, 1.0), 3.0);
        // sin(3i)/ (i sinh 3) = i sinh3 / (i sinh3) = 1
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn h3_phi_solves_the_radial_equation() {
        // Finite-difference residual of phi'' + 2 coth(r) phi' + (l^2+1) phi.
        let lambda = Complex64::new(1.7, 0.0);
        let mu = lambda * lambda + 1.0;
        let h = 1e-4;
        for &r in &[0.5, 1.0, 2.0, 4.0] {
            let pm = h3_phi(lambda, r - h);
            let p0 = h3_phi(lambda, r);
            let pp = h3_phi(lambda, r + h);
            let d2 = (pp - 2.0 * p0 + pm) / (h * h);
            let d1 = (pp - pm) / (2.0 * h);
            let res = d2 + 2.0 / r.tanh() * d1 + mu * p0;
            assert!(res.norm() < 1e-6, "r = {r}: residual {}", res.norm());
        }
    }

    #[test]
    fn heat_kernel_value_at_origin() {
        // (4 pi)^{-3/2} e^{-1} at t = 1.
        let expect = (4.0 * std::f64::consts::PI).powf(-1.5) * (-1.0f64).exp();
        assert!((h3_heat_kernel(1.0, 0.0) - expect).abs() < 1e-15);
        assert!((expect - 0.00825830).abs() < 1e-7);
    }

    #[test]
    fn heat_kernel_has_unit_mass() {
        // 4 pi int h_t sinh^2 r dr = 1; midpoint rule at high resolution.
        let t = 0.7;
        let n = 400_000;
        let dr = 25.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) * dr;
            acc += h3_heat_kernel(t, r) * r.sinh().powi(2) * dr;
        }
        acc *= 4.0 * std::f64::consts::PI;
        assert!((acc - 1.0).abs() < 1e-6, "mass {acc}");
    }

    #[test]
    fn gaussian_ft_limit_continuity() {
        let a = 0.7;
        assert!((h3_gaussian_ft(a, 1e-9) - h3_gaussian_ft(a, 1e-5)).abs() < 1e-6);
    }

    #[test]
    fn line_schrodinger_mass_is_conserved() {
        // int |u|^2 ds is time independent.
        let a = 1.3;
        let quad = |t: f64| {
            let mut acc = 0.0;
            let n = 20000;
            for i in 0..n {
                let s = -20.0 + 40.0 * i as f64 / n as f64;
                acc += line_schrodinger_gaussian_abs(a, t, s).powi(2) * (40.0 / n as f64);
            }
            acc
        };
        assert!((quad(0.0) - quad(0.4)).abs() < 1e-6);
    }
}
