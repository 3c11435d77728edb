//! Estimators turning simulations into exponent and dimension measurements.

mod boxcount;
mod ims;

pub use boxcount::{box_counting_dimension, default_meshes, koch_curve, BoxCountResult};
pub use ims::{ims_bulk_estimate, ims_bulk_estimates, ImsRealization, ImsSettings};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exponents::{s_bounds, tilde_xi, Kappa};
use crate::martingale::{alpha_slope_fit, SlopeFit, TailSettings};
use crate::par::Mode;

/// Ordinary least squares of `log y` on `log x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return domain(format!("{} x values but {} y values", xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return domain(format!("log-log fit needs at least 3 points, got {}", xs.len()));
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return domain(format!("log-log fit needs positive finite inputs, got {v}"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return domain("log-log fit needs at least two distinct x values");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = (ssr / (n - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(LogLogFit { slope, intercept, slope_stderr, r_squared, n_points: lx.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    S,
    Q,
    A,
}

/// Estimated exponents on a parameter grid next to their predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub parameter: Parameter,
    pub grid: Vec<f64>,
    pub estimated: Vec<f64>,
    pub stderr: Vec<f64>,
    pub predicted: Vec<f64>,
}

impl SpectrumCurve {
    pub fn new(parameter: Parameter) -> Self {
        SpectrumCurve { parameter, grid: Vec::new(), estimated: Vec::new(), stderr: Vec::new(), predicted: Vec::new() }
    }

    pub fn push(&mut self, x: f64, estimate: f64, stderr: f64, predicted: f64) {
        self.grid.push(x);
        self.estimated.push(estimate);
        self.stderr.push(stderr);
        self.predicted.push(predicted);
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// `α̂(s)` and the implied `ξ̃(s) = 1 − α̂(s)` on an s-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfSpectrum {
    pub alpha: SpectrumCurve,
    pub xi_tilde: SpectrumCurve,
    pub fits: Vec<SlopeFit>,
}

pub fn mf_spectrum_estimate(
    kappa: Kappa,
    s_grid: &[f64],
    eps_grid: &[f64],
    re_z: f64,
    settings: &TailSettings,
    mode: Mode,
) -> Result<MfSpectrum> {
    let (s_minus, s_plus) = s_bounds(kappa);
    if let Some(s) = s_grid.iter().find(|s| !(**s > s_minus && **s < s_plus)) {
        return domain(format!("s = {s} outside ({s_minus}, {s_plus})"));
    }
    let mut alpha = SpectrumCurve::new(Parameter::S);
    let mut xi_tilde = SpectrumCurve::new(Parameter::S);
    let mut fits = Vec::with_capacity(s_grid.len());
    for (i, &s) in s_grid.iter().enumerate() {
        let local = TailSettings { seed: settings.seed.wrapping_add(1000 * i as u64), ..*settings };
        let fit = alpha_slope_fit(kappa, s, eps_grid, re_z, &local, mode)?;
        alpha.push(s, fit.alpha_hat, fit.stderr, fit.predicted);
        xi_tilde.push(s, 1.0 - fit.alpha_hat, fit.stderr, tilde_xi(kappa, s)?);
        fits.push(fit);
    }
    Ok(MfSpectrum { alpha, xi_tilde, fits })
}
