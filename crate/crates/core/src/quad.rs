//! Composite Gauss-Legendre panel quadrature.
//!
//! Nodes and weights are generated at runtime by Newton iteration on the
//! Legendre recurrence, which reproduces the tabulated values to machine
//! precision for any order. Integrands in this crate are smooth, so fixed
//! 32-point panels with optional panel doubling cover every accuracy target.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Gauss-Legendre rule on [-1, 1], nodes ascending.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre rule needs at least 2 points");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (p2, d2) = legendre_with_derivative(n, x);
                    dp = d2;
                    x -= p2 / d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rules keyed by point count; the same rule backs every panel.
pub fn gl_rule(n: usize) -> GaussLegendre {
    static CACHE: OnceLock<Mutex<HashMap<usize, GaussLegendre>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n).or_insert_with(|| GaussLegendre::new(n)).clone()
}

/// A partition of an interval into panels with a shared Gauss rule on each.
#[derive(Clone, Debug)]
pub struct Panels {
    pub edges: Vec<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub points_per_panel: usize,
}

impl Panels {
    pub fn from_edges(edges: Vec<f64>, points_per_panel: usize) -> Self {
        assert!(edges.len() >= 2);
        assert!(edges.windows(2).all(|w| w[1] > w[0]), "edges must increase");
        let rule = gl_rule(points_per_panel);
        let n_panels = edges.len() - 1;
        let mut nodes = Vec::with_capacity(n_panels * points_per_panel);
        let mut weights = Vec::with_capacity(n_panels * points_per_panel);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(c + h * x);
                weights.push(h * wt);
            }
        }
        Panels {
            edges,
            nodes,
            weights,
            points_per_panel,
        }
    }

    pub fn uniform(a: f64, b: f64, n_panels: usize, points_per_panel: usize) -> Self {
        assert!(n_panels >= 1 && b > a);
        let edges = (0..=n_panels)
            .map(|i| a + (b - a) * i as f64 / n_panels as f64)
            .collect();
        Self::from_edges(edges, points_per_panel)
    }

    /// Same partition with every panel split in `factor` equal pieces.
    pub fn subdivided(&self, factor: usize) -> Self {
        assert!(factor >= 1);
        if factor == 1 {
            return self.clone();
        }
        let mut edges = Vec::with_capacity((self.edges.len() - 1) * factor + 1);
        for w in self.edges.windows(2) {
            for j in 0..factor {
                edges.push(w[0] + (w[1] - w[0]) * j as f64 / factor as f64);
            }
        }
        edges.push(*self.edges.last().unwrap());
        Self::from_edges(edges, self.points_per_panel)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature of sampled values against the panel weights.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.nodes.len());
        dot(&self.weights, values)
    }

    /// Fraction of sum(|w v|) carried by the last panel; cheap tail estimate.
    pub fn last_panel_fraction(&self, abs_values: &[f64]) -> f64 {
        assert_eq!(abs_values.len(), self.nodes.len());
        let p = self.points_per_panel;
        let total: f64 = self
            .weights
            .iter()
            .zip(abs_values)
            .map(|(w, v)| w * v.abs())
            .sum();
        if total == 0.0 {
            return 0.0;
        }
        let tail: f64 = self.weights[self.len() - p..]
            .iter()
            .zip(&abs_values[self.len() - p..])
            .map(|(w, v)| w * v.abs())
            .sum();
        tail / total
    }
}

/// Fixed-order summation so repeated runs reduce in the same order.
pub fn dot(w: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Integrate a callable over panels, doubling the panel count until two
/// successive refinements agree to `tol` (relative to the larger magnitude).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    n_panels0: usize,
    points: usize,
    tol: f64,
    max_doublings: usize,
) -> (f64, f64) {
    let mut n = n_panels0.max(1);
    let mut prev = {
        let p = Panels::uniform(a, b, n, points);
        let vals: Vec<f64> = p.nodes.iter().map(|&x| f(x)).collect();
        p.integrate(&vals)
    };
    for _ in 0..max_doublings {
        n *= 2;
        let p = Panels::uniform(a, b, n, points);
        let vals: Vec<f64> = p.nodes.iter().map(|&x| f(x)).collect();
        let cur = p.integrate(&vals);
        let err = (cur - prev).abs();
        if err <= tol * cur.abs().max(prev.abs()).max(1e-300) {
            return (cur, err);
        }
        prev = cur;
    }
    (prev, f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_symmetric_and_normalized() {
        for n in [4, 16, 32, 33] {
            let g = GaussLegendre::new(n);
            let sum: f64 = g.weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "weights sum {sum} for n = {n}");
            for i in 0..n {
                assert!((g.nodes[i] + g.nodes[n - 1 - i]).abs() < 1e-15);
                assert!((g.weights[i] - g.weights[n - 1 - i]).abs() < 1e-15);
            }
            assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn polynomial_exactness() {
        // n-point Gauss integrates monomials up to degree 2n-1 exactly.
        let g = GaussLegendre::new(32);
        for k in [0usize, 5, 20, 41, 63] {
            let num: f64 = g
                .nodes
                .iter()
                .zip(&g.weights)
                .map(|(x, w)| w * x.powi(k as i32))
                .sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((num - exact).abs() < 1e-14, "degree {k}: {num} vs {exact}");
        }
    }

    #[test]
    fn matches_tabulated_32_point_values() {
        // Spot checks against published 32-point abscissas/weights.
        let g = GaussLegendre::new(32);
        assert!((g.nodes[31] - 0.997263861849481563545).abs() < 1e-14);
        assert!((g.weights[31] - 0.007018610009470096600).abs() < 1e-14);
        assert!((g.nodes[16] - 0.048307665687738316235).abs() < 1e-14);
        assert!((g.weights[16] - 0.096540088514727800567).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_panel_accuracy() {
        // 32 points per unit-width panel resolve e^{i 30 x} to ~1e-13.
        let omega = 30.0;
        let p = Panels::uniform(0.0, 10.0, 10, 32);
        let cos_vals: Vec<f64> = p.nodes.iter().map(|&x| (omega * x).cos()).collect();
        let num = p.integrate(&cos_vals);
        let exact = (omega * 10.0).sin() / omega;
        assert!((num - exact).abs() < 1e-12);
    }

    #[test]
    fn gaussian_integral() {
        let p = Panels::uniform(0.0, 12.0, 12, 32);
        let vals: Vec<f64> = p.nodes.iter().map(|&x| (-x * x).exp()).collect();
        let num = p.integrate(&vals);
        assert!((num - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn adaptive_refinement_converges() {
        let (v, err) = integrate_adaptive(&|x: f64| (5.0 * x).sin().exp(), 0.0, 3.0, 2, 16, 1e-12, 12);
        assert!(err.is_finite());
        let (v2, _) = integrate_adaptive(&|x: f64| (5.0 * x).sin().exp(), 0.0, 3.0, 7, 32, 1e-13, 12);
        assert!((v - v2).abs() < 1e-9 * v2.abs());
    }

    #[test]
    fn subdivision_preserves_smooth_integrals() {
        let p = Panels::uniform(0.0, 4.0, 8, 32);
        let f = |x: f64| (x * x * 0.3).cos();
        let base: Vec<f64> = p.nodes.iter().map(|&x| f(x)).collect();
        let sub = p.subdivided(3);
        let fine: Vec<f64> = sub.nodes.iter().map(|&x| f(x)).collect();
        assert!((p.integrate(&base) - sub.integrate(&fine)).abs() < 1e-13);
    }

    #[test]
    fn tail_fraction_detects_heavy_tail() {
        let p = Panels::uniform(0.0, 10.0, 10, 8);
        let decaying: Vec<f64> = p.nodes.iter().map(|&x| (-x).exp()).collect();
        assert!(p.last_panel_fraction(&decaying) < 2e-4);
        let flat = vec![1.0; p.len()];
        assert!(p.last_panel_fraction(&flat) > 0.05);
    }
}
