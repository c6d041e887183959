//! Least-squares fits used by the verification layer: log-log slopes for
//! asymptotic exponents and Gaussian / stretched-exponential decay rates.

use crate::error::{Error, Result};
use serde::Serialize;

/// Result of a straight-line least-squares fit `y ~ intercept + slope x`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub n_points: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "linear fit needs matching arrays with at least 2 points".into(),
        ));
    }
    let unit = vec![1.0; xs.len()];
    let w = weights.unwrap_or(&unit);
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) {
        return Err(Error::InvalidArgument("fit weights sum to zero".into()));
    }
    let mx = xs.iter().zip(w).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = ys.iter().zip(w).map(|(y, w)| w * y).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((x, y), wi) in xs.iter().zip(ys).zip(w) {
        sxx += wi * (x - mx) * (x - mx);
        sxy += wi * (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("fit abscissas are degenerate".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for ((x, y), wi) in xs.iter().zip(ys).zip(w) {
        let r = y - intercept - slope * x;
        ss += wi * r * r;
    }
    Ok(LineFit {
        slope,
        intercept,
        residual: (ss / sw).sqrt(),
        n_points: xs.len(),
    })
}

/// Slope of `log y` against `log x`; inputs must be positive.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.iter().any(|&x| x <= 0.0) || ys.iter().any(|&y| y <= 0.0) {
        return Err(Error::InvalidArgument(
            "log-log fit needs positive data".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DecayModel {
    /// `B e^{-beta x^2}`
    Gaussian,
    /// `B e^{-beta x^p}` with fixed exponent `p`
    Stretched { p: f64 },
}

/// A fitted decay law `B e^{-beta x^p}` over a window of the data.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub amplitude: f64,
    pub beta: f64,
    pub window: (f64, f64),
    /// RMS residual of log-values over the window.
    pub residual: f64,
    pub n_points: usize,
}

/// Window and robustness controls for [`fit_decay`].
#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    /// Use samples whose magnitude relative to the peak lies inside this
    /// band. The shallow end keeps the fit away from the core, the deep end
    /// keeps it a decade clear of the truncation/noise floor.
    pub depth_range: (f64, f64),
    /// Absolute floor below which samples are considered noise.
    pub noise_floor: f64,
    /// Keep only local maxima of |values| (envelope fit for oscillatory data).
    pub peaks_only: bool,
    /// Reject the fit if the RMS log-residual exceeds this cap.
    pub residual_cap: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            depth_range: (1e-8, 1e-2),
            noise_floor: 1e-250,
            peaks_only: false,
            residual_cap: 0.5,
        }
    }
}

/// Fit `log |v| = log B - beta x^p` by least squares over the window
/// selected by `opts`. `xs` must be ascending and nonnegative.
pub fn fit_decay(xs: &[f64], values: &[f64], model: DecayModel, opts: &FitOptions) -> Result<DecayFit> {
    if xs.len() != values.len() || xs.len() < 4 {
        return Err(Error::InvalidArgument(
            "decay fit needs at least 4 samples".into(),
        ));
    }
    let p = match model {
        DecayModel::Gaussian => 2.0,
        DecayModel::Stretched { p } => p,
    };
    if !(p > 0.0) {
        return Err(Error::InvalidArgument("decay exponent must be positive".into()));
    }
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let peak = abs.iter().cloned().fold(0.0, f64::max);
    if peak <= opts.noise_floor {
        return Err(Error::FitRejected("all samples below the noise floor".into()));
    }
    let lo = peak * opts.depth_range.0.min(opts.depth_range.1);
    let hi = peak * opts.depth_range.0.max(opts.depth_range.1);
    let mut sel: Vec<usize> = Vec::new();
    // Only take the decaying flank beyond the global peak.
    let peak_idx = abs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    for i in peak_idx..xs.len() {
        let v = abs[i];
        if v >= lo.max(10.0 * opts.noise_floor) && v <= hi {
            if opts.peaks_only {
                let left = if i > 0 { abs[i - 1] } else { 0.0 };
                let right = if i + 1 < abs.len() { abs[i + 1] } else { 0.0 };
                if v >= left && v >= right {
                    sel.push(i);
                }
            } else {
                sel.push(i);
            }
        }
    }
    if sel.len() < 4 {
        return Err(Error::FitRejected(format!(
            "only {} usable samples in the fit window",
            sel.len()
        )));
    }
    let fx: Vec<f64> = sel.iter().map(|&i| xs[i].powf(p)).collect();
    let fy: Vec<f64> = sel.iter().map(|&i| abs[i].ln()).collect();
    let line = linear_fit(&fx, &fy, None)?;
    let fit = DecayFit {
        model,
        amplitude: line.intercept.exp(),
        beta: -line.slope,
        window: (xs[sel[0]], xs[*sel.last().unwrap()]),
        residual: line.residual,
        n_points: sel.len(),
    };
    if fit.residual > opts.residual_cap {
        return Err(Error::FitRejected(format!(
            "log-residual {:.3e} exceeds cap {:.3e}",
            fit.residual, opts.residual_cap
        )));
    }
    if !(fit.beta > 0.0) {
        return Err(Error::FitRejected(format!(
            "fitted rate is not positive: {}",
            fit.beta
        )));
    }
    Ok(fit)
}
