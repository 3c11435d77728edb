//! The reverse-flow martingale
//!
//! ```text
//! M_t = |g_t'(z)|^{(8+2κ−ρ)ρ/(8κ)} · (Im g_t(z))^{−ρ²/(8κ)} · |g_t(z)|^{ρ/κ}
//! ```
//!
//! used both as a consistency check of the reverse-flow integrator and as the
//! likelihood ratio of an importance sampler: weighting reverse SLE_κ by `M_t/M_0`
//! gives reverse SLE_κ(ρ) with an interior force point at `z`.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::drivers::DRIFT_CAP;
use crate::error::{domain, Error, Result};
use crate::estimators::{loglog_fit, LogLogFit};
use crate::exponents::{alpha, rho_opt, Kappa};
use crate::loewner::{reverse_step, Interpolation};
use crate::numeric::{compensated_sum, sample_stats};
use crate::par::{self, Mode};
use crate::rng::{stream, SimRng};

/// Minimum effective sample size of an importance-sampling estimate.
pub const MIN_ESS: f64 = 50.0;

/// Smallest ratio `max ε / min ε` accepted by [`alpha_slope_fit`].
pub const MIN_EPS_SPAN: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleParams {
    pub kappa: Kappa,
    pub rho: f64,
    pub z: Complex64,
    deriv_exp: f64,
    im_exp: f64,
    abs_exp: f64,
}

impl MartingaleParams {
    pub fn new(kappa: Kappa, rho: f64, z: Complex64) -> Result<Self> {
        if !(z.im > 0.0) || !rho.is_finite() {
            return domain(format!("need Im z > 0 and finite ρ, got z = {z}, ρ = {rho}"));
        }
        let k = kappa.value();
        Ok(MartingaleParams {
            kappa,
            rho,
            z,
            deriv_exp: (8.0 + 2.0 * k - rho) * rho / (8.0 * k),
            im_exp: rho * rho / (8.0 * k),
            abs_exp: rho / k,
        })
    }

    /// `log M_0`.
    pub fn initial_log_value(&self) -> f64 {
        self.log_value(self.z, 0.0)
    }

    fn log_value(&self, g: Complex64, log_deriv: f64) -> f64 {
        self.deriv_exp * log_deriv - self.im_exp * g.im.ln() + self.abs_exp * g.norm().ln()
    }
}

/// `log M` at the state `(g, log|g'|)`.
pub fn martingale_value(params: &MartingaleParams, g_val: Complex64, g_deriv_log: f64) -> Result<f64> {
    if !(g_val.im > 0.0) {
        return domain(format!("martingale needs Im g > 0, got {g_val}"));
    }
    Ok(params.log_value(g_val, g_deriv_log))
}

/// Step control for the reverse-flow path simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSettings {
    /// Largest step is `t/steps`.
    pub steps: usize,
    /// Steps are further limited to `(eta·|Z|)²` so the driver is resolved on the
    /// scale of the tracked point.
    pub eta: f64,
}

impl Default for PathSettings {
    fn default() -> Self {
        PathSettings { steps: 10_000, eta: 0.1 }
    }
}

/// Final state of one reverse-flow path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReverseEnd {
    pub z: Complex64,
    pub log_deriv: f64,
    pub time: f64,
    pub clipped: bool,
}

/// Runs the centered reverse flow from `z0` with driver `dW = −Re(ρ/Z) dt + √κ dB`
/// until time `t`, or until `Im Z` first reaches `stop_height`.
pub fn simulate_reverse(
    kappa: Kappa,
    rho: f64,
    z0: Complex64,
    t: f64,
    settings: &PathSettings,
    stop_height: Option<f64>,
    rng: &mut SimRng,
) -> ReverseEnd {
    let sk = kappa.value().sqrt();
    let dt_max = t / settings.steps as f64;
    let mut z = z0;
    let mut log_deriv = 0.0;
    let mut time = 0.0;
    let mut clipped = false;
    while time < t {
        if stop_height.is_some_and(|r| z.im >= r) {
            break;
        }
        let mut dt = dt_max.min((settings.eta * z.norm()).powi(2));
        if time + dt >= t * (1.0 - 1e-14) {
            dt = t - time;
        }
        let mut drift = if rho != 0.0 { -(rho / z).re } else { 0.0 };
        let cap = DRIFT_CAP / dt.sqrt();
        if drift.abs() > cap {
            drift = cap.copysign(drift);
            clipped = true;
        }
        let db: f64 = StandardNormal.sample(rng);
        let dw = drift * dt + sk * dt.sqrt() * db;
        let m = reverse_step(z, dw, dt, Interpolation::PiecewiseSqrt);
        z = m.value;
        log_deriv += m.derivative.norm().ln();
        time += dt;
    }
    ReverseEnd { z, log_deriv, time, clipped }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleCheck {
    pub mean_ratio: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

/// Mean of `M_t/M_0` over reverse SLE_κ paths (no drift), which should be 1.
pub fn check_martingale(
    params: &MartingaleParams,
    t: f64,
    settings: &PathSettings,
    n_samples: usize,
    seed: u64,
    mode: Mode,
) -> Result<MartingaleCheck> {
    if !(t > 0.0) || n_samples < 2 || settings.steps == 0 {
        return domain("martingale check needs t > 0, at least 2 samples and 1 step");
    }
    let log_m0 = params.initial_log_value();
    let ratios = par::map_indexed_with(mode, n_samples, |r| {
        let mut rng = stream(seed, r as u64);
        let end = simulate_reverse(params.kappa, 0.0, params.z, t, settings, None, &mut rng);
        (params.log_value(end.z, end.log_deriv) - log_m0).exp()
    });
    let st = sample_stats(&ratios);
    Ok(MartingaleCheck { mean_ratio: st.mean, stderr: st.stderr, n_samples })
}

/// Settings of the derivative-event estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSettings {
    pub t: f64,
    /// Multiplicative slack `c` of the event.
    pub c: f64,
    /// Exponent half-width `u`; `None` selects `0.4/log(1/ε)`.
    pub u: Option<f64>,
    pub path: PathSettings,
    /// Stop at the first time `Im g_t(z)` reaches this height (capped at `t`).
    pub stop_height: Option<f64>,
    /// Additionally require `Im g_τ(z) ≥ min_height` on the event.
    pub min_height: Option<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for TailSettings {
    fn default() -> Self {
        TailSettings {
            t: 1.0,
            c: 4.0,
            u: None,
            path: PathSettings::default(),
            stop_height: None,
            min_height: None,
            n_samples: 10_000,
            seed: 0,
        }
    }
}

impl TailSettings {
    pub fn u_for(&self, eps: f64) -> f64 {
        self.u.unwrap_or(0.4 / (1.0 / eps).ln())
    }
}

/// Per-path contribution to an importance-sampling estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedIndicator {
    /// `M_0/M_τ`, evaluated in log space.
    pub weight: f64,
    pub indicator: bool,
    pub log_deriv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub eps: f64,
    pub p_hat: f64,
    pub stderr: f64,
    /// `(Σ w1_E)²/Σ (w1_E)²` over the paths in the event.
    pub ess: f64,
    pub n_samples: usize,
    pub n_clipped: usize,
    pub n_hits: usize,
    pub flagged: bool,
}

fn check_tail_inputs(s: f64, z: Complex64, settings: &TailSettings) -> Result<()> {
    if !(s > -1.0 && s < 1.0) {
        return domain(format!("s must lie in (−1, 1), got {s}"));
    }
    if !(z.im > 0.0) || z.im >= 1.0 {
        return domain(format!("need 0 < Im z < 1, got {z}"));
    }
    if !(settings.t > 0.0) || !(settings.c > 0.0) || settings.n_samples < 2 || settings.path.steps == 0 {
        return domain("tail estimate needs t > 0, c > 0, at least 2 samples and 1 step");
    }
    Ok(())
}

fn tail_estimate(
    kappa: Kappa,
    s: f64,
    z: Complex64,
    settings: &TailSettings,
    tilted: bool,
    mode: Mode,
) -> Result<TailEstimate> {
    check_tail_inputs(s, z, settings)?;
    let eps = z.im;
    let rho = if tilted { rho_opt(kappa, s)? } else { 0.0 };
    let params = MartingaleParams::new(kappa, rho, z)?;
    let log_m0 = params.initial_log_value();
    let u = settings.u_for(eps);
    let l = (1.0 / eps).ln();
    let lo = (s - u) * l - settings.c.ln();
    let hi = (s + u) * l + settings.c.ln();
    let samples: Vec<Option<WeightedIndicator>> = par::map_indexed_with(mode, settings.n_samples, |r| {
        let mut rng = stream(settings.seed, r as u64);
        let end = simulate_reverse(kappa, rho, z, settings.t, &settings.path, settings.stop_height, &mut rng);
        if end.clipped {
            return None;
        }
        let indicator = end.log_deriv >= lo
            && end.log_deriv <= hi
            && settings.min_height.is_none_or(|h| end.z.im >= h);
        let weight = if tilted { (log_m0 - params.log_value(end.z, end.log_deriv)).exp() } else { 1.0 };
        Some(WeightedIndicator { weight, indicator, log_deriv: end.log_deriv })
    });
    let n_clipped = samples.iter().filter(|s| s.is_none()).count();
    let values: Vec<f64> = samples.iter().flatten().map(|w| if w.indicator { w.weight } else { 0.0 }).collect();
    if values.len() < 2 {
        return Err(Error::Guard(format!("only {} unclipped paths", values.len())));
    }
    let st = sample_stats(&values);
    let sum = compensated_sum(values.iter().copied());
    let sum_sq = compensated_sum(values.iter().map(|v| v * v));
    let ess = if sum_sq > 0.0 { sum * sum / sum_sq } else { 0.0 };
    let n_hits = values.iter().filter(|&&v| v > 0.0).count();
    Ok(TailEstimate {
        eps,
        p_hat: st.mean,
        stderr: st.stderr,
        ess,
        n_samples: settings.n_samples,
        n_clipped,
        n_hits,
        flagged: ess < MIN_ESS,
    })
}

/// Importance-sampling estimate of `P(c⁻¹ε^{−s+u} ≤ |g_τ'(z)| ≤ c·ε^{−s−u})` under
/// reverse SLE_κ, sampling from reverse SLE_κ(ρ_opt(s)) and weighting by `M_0/M_τ`.
pub fn tail_probability_is(kappa: Kappa, s: f64, z: Complex64, settings: &TailSettings, mode: Mode) -> Result<TailEstimate> {
    tail_estimate(kappa, s, z, settings, true, mode)
}

/// Plain Monte Carlo estimate of the same event under reverse SLE_κ.
pub fn tail_probability_mc(kappa: Kappa, s: f64, z: Complex64, settings: &TailSettings, mode: Mode) -> Result<TailEstimate> {
    tail_estimate(kappa, s, z, settings, false, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub s: f64,
    pub alpha_hat: f64,
    pub stderr: f64,
    pub predicted: f64,
    pub fit: LogLogFit,
    pub points: Vec<TailEstimate>,
}

/// Regresses `−log p̂(ε)` on `log(1/ε)` for points `z = x + iε`; the slope estimates `α(s)`.
/// Grid point `i` draws from master seed `settings.seed + i`.
pub fn alpha_slope_fit(
    kappa: Kappa,
    s: f64,
    eps_grid: &[f64],
    re_z: f64,
    settings: &TailSettings,
    mode: Mode,
) -> Result<SlopeFit> {
    if eps_grid.len() < 4 {
        return domain(format!("slope fit needs at least 4 ε values, got {}", eps_grid.len()));
    }
    let (max, min) = eps_grid.iter().fold((f64::MIN, f64::MAX), |(a, b), &e| (a.max(e), b.min(e)));
    if max / min < MIN_EPS_SPAN * (1.0 - 1e-9) {
        return domain(format!("ε grid spans a factor {:.2}, need {MIN_EPS_SPAN}", max / min));
    }
    let mut points = Vec::with_capacity(eps_grid.len());
    for (i, &eps) in eps_grid.iter().enumerate() {
        let local = TailSettings { seed: settings.seed.wrapping_add(i as u64), ..*settings };
        let est = tail_probability_is(kappa, s, Complex64::new(re_z, eps), &local, mode)?;
        points.push(est);
    }
    if let Some(bad) = points.iter().find(|p| p.flagged || !(p.p_hat > 0.0)) {
        return Err(Error::Guard(format!(
            "estimate at ε = {} is flagged (ess {:.1}, p̂ = {:e}); fit refused",
            bad.eps, bad.ess, bad.p_hat
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| 1.0 / p.eps).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.p_hat).collect();
    let fit = loglog_fit(&xs, &ys)?;
    Ok(SlopeFit { s, alpha_hat: -fit.slope, stderr: fit.slope_stderr, predicted: alpha(kappa, s)?, fit, points })
}

/// The exponent `s(8 + 2κ − ρ)ρ/(8κ) − ρ²/(8κ)` bounding the event probability for a
/// given tilt `ρ`; maximal at `ρ = ρ_opt(s)`.
pub fn tilt_exponent(kappa: Kappa, s: f64, rho: f64) -> f64 {
    let k = kappa.value();
    s * (8.0 + 2.0 * k - rho) * rho / (8.0 * k) - rho * rho / (8.0 * k)
}

#[cfg(test)]
mod tests;
