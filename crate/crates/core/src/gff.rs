//! Harmonic part of a free-boundary Gaussian free field on the unit disk, sampled
//! from the series
//!
//! ```text
//! h(z) = Σ_{n≥1} √(2/n) (X_n Re zⁿ + Y_n Im zⁿ)
//! ```
//!
//! whose covariance is `−2 log|1 − z w̄|`.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numeric::sample_covariance;
use crate::par::{self, Mode};
use crate::rng::{stream, SimRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFieldSample {
    pub n_modes: usize,
    pub x_coeffs: Vec<f64>,
    pub y_coeffs: Vec<f64>,
}

pub fn sample_harmonic(n_modes: usize, seed: u64) -> Result<HarmonicFieldSample> {
    sample_harmonic_with(n_modes, &mut stream(seed, 0))
}

pub fn sample_harmonic_with(n_modes: usize, rng: &mut SimRng) -> Result<HarmonicFieldSample> {
    if n_modes == 0 {
        return domain("harmonic field needs at least one mode");
    }
    let x_coeffs = (0..n_modes).map(|_| StandardNormal.sample(rng)).collect();
    let y_coeffs = (0..n_modes).map(|_| StandardNormal.sample(rng)).collect();
    Ok(HarmonicFieldSample { n_modes, x_coeffs, y_coeffs })
}

impl HarmonicFieldSample {
    pub fn evaluate(&self, z: Complex64) -> Result<f64> {
        if !(z.norm() < 1.0) {
            return domain(format!("field is defined on the open unit disk, got |z| = {}", z.norm()));
        }
        let mut zn = Complex64::new(1.0, 0.0);
        let mut acc = 0.0;
        for n in 0..self.n_modes {
            zn *= z;
            let w = (2.0 / (n + 1) as f64).sqrt();
            acc += w * (self.x_coeffs[n] * zn.re + self.y_coeffs[n] * zn.im);
        }
        Ok(acc)
    }
}

pub fn evaluate(sample: &HarmonicFieldSample, z: Complex64) -> Result<f64> {
    sample.evaluate(z)
}

pub fn covariance_exact(z: Complex64, w: Complex64) -> Result<f64> {
    if !(z.norm() < 1.0 && w.norm() < 1.0) {
        return domain(format!("covariance needs |z|, |w| < 1, got {z}, {w}"));
    }
    Ok(-2.0 * (1.0 - z * w.conj()).norm().ln())
}

/// Covariance of the series truncated after `n_modes` terms.
pub fn covariance_truncated(n_modes: usize, z: Complex64, w: Complex64) -> f64 {
    let q = z * w.conj();
    let mut qn = Complex64::new(1.0, 0.0);
    let mut acc = 0.0;
    for n in 1..=n_modes {
        qn *= q;
        acc += 2.0 * qn.re / n as f64;
    }
    acc
}

/// Upper bound `2r^{N+1}/((N+1)(1−r))` on the covariance lost by truncating after
/// `N` modes, with `r = |z||w|`.
pub fn truncation_bound(n_modes: usize, z: Complex64, w: Complex64) -> f64 {
    let r = z.norm() * w.norm();
    let n1 = (n_modes + 1) as f64;
    2.0 * r.powf(n1) / (n1 * (1.0 - r))
}

/// Number of modes keeping the truncation bound below `1e-6` for points with
/// `|z| ≤ r_max`.
pub fn default_modes(r_max: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&r_max) {
        return domain(format!("evaluation radius must lie in [0, 1), got {r_max}"));
    }
    if r_max < 1e-3 {
        return Ok(1);
    }
    Ok(((1e-6 * (1.0 - r_max)).ln() / r_max.ln()).ceil().max(1.0) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub exact: f64,
    pub truncation_bound: f64,
    pub n_modes: usize,
    pub n_samples: usize,
}

/// Monte Carlo covariance of `h(z)` and `h(w)`; sample `r` draws from stream `r` of `seed`.
pub fn covariance_mc(
    n_modes: usize,
    n_samples: usize,
    z: Complex64,
    w: Complex64,
    seed: u64,
    mode: Mode,
) -> Result<CovarianceEstimate> {
    let exact = covariance_exact(z, w)?;
    if n_samples < 2 || n_modes == 0 {
        return domain("covariance estimate needs at least 2 samples and 1 mode");
    }
    let pairs = par::map_indexed_with(mode, n_samples, |r| {
        let h = sample_harmonic_with(n_modes, &mut stream(seed, r as u64))?;
        Ok((h.evaluate(z)?, h.evaluate(w)?))
    })
    .into_iter()
    .collect::<Result<Vec<(f64, f64)>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (estimate, stderr) = sample_covariance(&xs, &ys);
    Ok(CovarianceEstimate {
        estimate,
        stderr,
        exact,
        truncation_bound: truncation_bound(n_modes, z, w),
        n_modes,
        n_samples,
    })
}
