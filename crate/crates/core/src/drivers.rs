//! Samplers for driving functions and the auxiliary diffusions.
//!
//! Every sampler has a `*_with` form that draws from a caller-supplied stream and
//! a convenience form keyed by a seed, which uses stream 0 of that seed.

use num_complex::Complex64;
use rand_distr::{ChiSquared, Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exponents::{bessel_beta, Kappa};
use crate::loewner::{reverse_step, DrivingFunction, Interpolation};
use crate::numeric::tanh_sinh;
use crate::rng::{stream, SimRng};

/// Drift magnitude cap, in units of `1/√Δt`.
pub const DRIFT_CAP: f64 = 10.0;

/// Driver/force-point distance, in units of `√Δt`, below which a path is declared
/// blown up.
pub const INTERACTION_FLOOR: f64 = 1e-3;

#[inline]
fn normal(rng: &mut SimRng) -> f64 {
    StandardNormal.sample(rng)
}

fn check_grid(horizon: f64, steps: usize) -> Result<f64> {
    if steps == 0 {
        return domain("steps must be at least 1");
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return domain(format!("horizon must be positive, got {horizon}"));
    }
    Ok(horizon / steps as f64)
}

/// `W = √κ B` on a uniform grid.
pub fn brownian_driver(kappa: Kappa, horizon: f64, steps: usize, seed: u64) -> Result<DrivingFunction> {
    brownian_driver_with(kappa, horizon, steps, Interpolation::default(), &mut stream(seed, 0))
}

pub fn brownian_driver_with(
    kappa: Kappa,
    horizon: f64,
    steps: usize,
    interpolation: Interpolation,
    rng: &mut SimRng,
) -> Result<DrivingFunction> {
    let dt = check_grid(horizon, steps)?;
    let sd = (kappa.value() * dt).sqrt();
    let mut w = Vec::with_capacity(steps + 1);
    let mut x = 0.0;
    w.push(x);
    for _ in 0..steps {
        x += sd * normal(rng);
        w.push(x);
    }
    DrivingFunction::uniform(horizon, w, interpolation)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub kappa: Kappa,
    pub weights: Vec<f64>,
    pub force_points: Vec<Complex64>,
    pub horizon: f64,
    pub steps: usize,
    pub seed: u64,
}

impl SdeConfig {
    fn validate(&self) -> Result<f64> {
        if self.weights.len() != self.force_points.len() {
            return domain(format!("{} weights for {} force points", self.weights.len(), self.force_points.len()));
        }
        if self.force_points.iter().any(|v| *v == Complex64::new(0.0, 0.0)) {
            return domain("force points must differ from W(0) = 0");
        }
        check_grid(self.horizon, self.steps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRealization {
    pub driver: DrivingFunction,
    /// `force_paths[i][k]` is the i-th force point at `driver.times()[k]`.
    pub force_paths: Vec<Vec<Complex64>>,
    /// First step at which the driver came within the interaction floor of a force
    /// point; the paths stop there.
    pub blow_up: Option<usize>,
    /// Whether the drift cap was hit on some step.
    pub clipped: bool,
}

fn cap_drift(drift: f64, dt: f64, clipped: &mut bool) -> f64 {
    let cap = DRIFT_CAP / dt.sqrt();
    if drift.abs() > cap {
        *clipped = true;
        cap.copysign(drift)
    } else {
        drift
    }
}

/// Forward SLE_κ(ρ): `dW = √κ dB + Σ Re(ρ_i/(W − V_i)) dt`, `dV_i = 2/(V_i − W) dt`,
/// by Euler–Maruyama.
pub fn sle_kappa_rho_driver(config: &SdeConfig) -> Result<PathRealization> {
    sle_kappa_rho_driver_with(config, &mut stream(config.seed, 0))
}

pub fn sle_kappa_rho_driver_with(config: &SdeConfig, rng: &mut SimRng) -> Result<PathRealization> {
    let dt = config.validate()?;
    let sd = (config.kappa.value() * dt).sqrt();
    let floor = INTERACTION_FLOOR * dt.sqrt();
    let mut w = vec![0.0];
    let mut v: Vec<Complex64> = config.force_points.clone();
    let mut paths: Vec<Vec<Complex64>> = v.iter().map(|&p| vec![p]).collect();
    let mut clipped = false;
    let mut blow_up = None;
    for k in 0..config.steps {
        let x = w[k];
        let mut drift = 0.0;
        for (rho, vi) in config.weights.iter().zip(&v) {
            if *rho != 0.0 {
                drift += (*rho / (x - vi)).re;
            }
        }
        let drift = cap_drift(drift, dt, &mut clipped);
        let x_next = x + sd * normal(rng) + drift * dt;
        for (vi, path) in v.iter_mut().zip(paths.iter_mut()) {
            let real = vi.im == 0.0;
            *vi += 2.0 / (*vi - x) * dt;
            if real {
                debug_assert!(vi.im.abs() == 0.0);
                vi.im = 0.0;
            }
            path.push(*vi);
        }
        w.push(x_next);
        if v.iter().any(|vi| (x_next - vi).norm() < floor) {
            blow_up = Some(k + 1);
            break;
        }
    }
    let n = w.len();
    let driver = DrivingFunction::uniform(dt * (n - 1) as f64, w, Interpolation::default())?;
    Ok(PathRealization { driver, force_paths: paths, blow_up, clipped })
}

/// Reverse SLE_κ(ρ) in centered coordinates: the force points evolve as `Z_i = g_t(z_i)`
/// under the reverse flow and `dW = −Σ Re(ρ_i/Z_i) dt + √κ dB`.
pub fn reverse_sle_kappa_rho_driver(config: &SdeConfig) -> Result<PathRealization> {
    reverse_sle_kappa_rho_driver_with(config, &mut stream(config.seed, 0))
}

pub fn reverse_sle_kappa_rho_driver_with(config: &SdeConfig, rng: &mut SimRng) -> Result<PathRealization> {
    let dt = config.validate()?;
    let sd = (config.kappa.value() * dt).sqrt();
    let floor = INTERACTION_FLOOR * dt.sqrt();
    let mut w = vec![0.0];
    let mut z: Vec<Complex64> = config.force_points.clone();
    let mut paths: Vec<Vec<Complex64>> = z.iter().map(|&p| vec![p]).collect();
    let mut clipped = false;
    let mut blow_up = None;
    for k in 0..config.steps {
        let mut drift = 0.0;
        for (rho, zi) in config.weights.iter().zip(&z) {
            if *rho != 0.0 {
                drift -= (*rho / zi).re;
            }
        }
        let drift = cap_drift(drift, dt, &mut clipped);
        let dw = sd * normal(rng) + drift * dt;
        for (zi, path) in z.iter_mut().zip(paths.iter_mut()) {
            *zi = reverse_step(*zi, dw, dt, Interpolation::default()).value;
            path.push(*zi);
        }
        w.push(w[k] + dw);
        if z.iter().any(|zi| zi.norm() < floor) {
            blow_up = Some(k + 1);
            break;
        }
    }
    let n = w.len();
    let driver = DrivingFunction::uniform(dt * (n - 1) as f64, w, Interpolation::default())?;
    Ok(PathRealization { driver, force_paths: paths, blow_up, clipped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaPath {
    pub s_grid: Vec<f64>,
    pub theta: Vec<f64>,
    pub kappa: Kappa,
    pub rho: f64,
}

/// Maximum number of step halvings before a boundary-crossing increment is reflected.
pub const THETA_MAX_HALVINGS: u32 = 20;

/// The angle process `dθ = √κ sin θ dB + (2 + κ/2 − ρ/2) sin 2θ ds`, recorded every
/// `substeps` Euler steps.
pub fn theta_process(
    kappa: Kappa,
    rho: f64,
    theta0: f64,
    s_horizon: f64,
    steps: usize,
    seed: u64,
) -> Result<ThetaPath> {
    theta_process_with(kappa, rho, theta0, s_horizon, steps, 1, &mut stream(seed, 0))
}

pub fn theta_process_with(
    kappa: Kappa,
    rho: f64,
    theta0: f64,
    s_horizon: f64,
    steps: usize,
    substeps: usize,
    rng: &mut SimRng,
) -> Result<ThetaPath> {
    if !(theta0 > 0.0 && theta0 < std::f64::consts::PI) {
        return domain(format!("theta0 must lie in (0, π), got {theta0}"));
    }
    if substeps == 0 {
        return domain("substeps must be at least 1");
    }
    let ds = check_grid(s_horizon, steps)?;
    let h = ds / substeps as f64;
    let k = kappa.value();
    let drift_coef = 2.0 + k / 2.0 - rho / 2.0;
    let sk = k.sqrt();
    let mut s_grid = Vec::with_capacity(steps + 1);
    let mut theta = Vec::with_capacity(steps + 1);
    let mut th = theta0;
    s_grid.push(0.0);
    theta.push(th);
    for i in 0..steps {
        for _ in 0..substeps {
            let db = h.sqrt() * normal(rng);
            th = theta_increment(th, h, db, sk, drift_coef, 0, rng);
        }
        s_grid.push((i + 1) as f64 * ds);
        theta.push(th);
    }
    Ok(ThetaPath { s_grid, theta, kappa, rho })
}

fn theta_increment(th: f64, h: f64, db: f64, sk: f64, c: f64, depth: u32, rng: &mut SimRng) -> f64 {
    use std::f64::consts::PI;
    let next = th + sk * th.sin() * db + c * (2.0 * th).sin() * h;
    if next > 0.0 && next < PI {
        return next;
    }
    if depth >= THETA_MAX_HALVINGS {
        let reflected = if next <= 0.0 { -next } else { 2.0 * PI - next };
        return reflected.clamp(f64::MIN_POSITIVE, PI - f64::EPSILON);
    }
    // split the Brownian increment with a bridge sample and retry both halves
    let half = 0.5 * h;
    let db1 = 0.5 * db + (0.25 * h).sqrt() * normal(rng);
    let db2 = db - db1;
    let mid = theta_increment(th, half, db1, sk, c, depth + 1, rng);
    theta_increment(mid, half, db2, sk, c, depth + 1, rng)
}

/// The stationary law `C sin^β θ` of the angle process, with `β = (8 − 2ρ)/κ`.
#[derive(Debug, Clone)]
pub struct ThetaStationary {
    beta: f64,
    norm: f64,
    cdf_nodes: Vec<f64>,
}

const CDF_CELLS: usize = 4096;

impl ThetaStationary {
    pub fn new(kappa: Kappa, rho: f64) -> Result<Self> {
        let beta = bessel_beta(kappa, rho);
        if !(beta > -1.0) {
            return domain(format!("sin^β is not integrable for β = {beta}"));
        }
        let pi = std::f64::consts::PI;
        let f = |t: f64| t.sin().powf(beta);
        let h = pi / CDF_CELLS as f64;
        let mut cdf_nodes = Vec::with_capacity(CDF_CELLS + 1);
        let mut acc = 0.0;
        cdf_nodes.push(0.0);
        for i in 0..CDF_CELLS {
            acc += tanh_sinh(f, i as f64 * h, (i + 1) as f64 * h, 1e-13)?;
            cdf_nodes.push(acc);
        }
        let total = tanh_sinh(f, 0.0, pi, 1e-13)?;
        for c in cdf_nodes.iter_mut() {
            *c /= acc;
        }
        Ok(ThetaStationary { beta, norm: 1.0 / total, cdf_nodes })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The normalising constant `C`.
    pub fn normalisation(&self) -> f64 {
        self.norm
    }

    pub fn density(&self, theta: f64) -> f64 {
        self.norm * theta.sin().powf(self.beta)
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        let pi = std::f64::consts::PI;
        if theta <= 0.0 {
            return 0.0;
        }
        if theta >= pi {
            return 1.0;
        }
        let x = theta / pi * CDF_CELLS as f64;
        let i = (x.floor() as usize).min(CDF_CELLS - 1);
        let frac = x - i as f64;
        self.cdf_nodes[i] + frac * (self.cdf_nodes[i + 1] - self.cdf_nodes[i])
    }
}

pub fn theta_stationary_density(kappa: Kappa, rho: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return domain(format!("theta must lie in (0, π), got {theta}"));
    }
    let beta = bessel_beta(kappa, rho);
    if !(beta > -1.0) {
        return domain(format!("sin^β is not integrable for β = {beta}"));
    }
    let total = tanh_sinh(|t: f64| t.sin().powf(beta), 0.0, std::f64::consts::PI, 1e-13)?;
    Ok(theta.sin().powf(beta) / total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesselPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub hit_time: Option<f64>,
}

/// Bessel process of dimension `ν` started at `x0`.
///
/// For `ν ≥ 2` the squared process is advanced with its exact noncentral χ²
/// transition; for `ν < 2` with full-truncation Euler on the square, recording the
/// first step at which the square reaches 0.
pub fn bessel_process(nu: f64, x0: f64, horizon: f64, steps: usize, seed: u64) -> Result<BesselPath> {
    bessel_process_with(nu, x0, horizon, steps, &mut stream(seed, 0))
}

pub fn bessel_process_with(nu: f64, x0: f64, horizon: f64, steps: usize, rng: &mut SimRng) -> Result<BesselPath> {
    if !(nu > 0.0) {
        return domain(format!("Bessel dimension must be positive, got {nu}"));
    }
    if !(x0 >= 0.0) {
        return domain(format!("Bessel start must be nonnegative, got {x0}"));
    }
    let dt = check_grid(horizon, steps)?;
    let mut y = x0 * x0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    times.push(0.0);
    values.push(x0);
    let mut hit_time = if x0 == 0.0 { Some(0.0) } else { None };
    for k in 0..steps {
        if nu >= 2.0 {
            y = dt * noncentral_chi_squared(nu, y / dt, rng)?;
        } else {
            y += nu * dt + 2.0 * y.max(0.0).sqrt() * dt.sqrt() * normal(rng);
        }
        let t = (k + 1) as f64 * dt;
        if y <= 0.0 && hit_time.is_none() {
            hit_time = Some(t);
        }
        times.push(t);
        values.push(y.max(0.0).sqrt());
    }
    Ok(BesselPath { times, values, hit_time })
}

/// Noncentral χ² draw as a Poisson mixture of central χ² laws.
fn noncentral_chi_squared(dof: f64, lambda: f64, rng: &mut SimRng) -> Result<f64> {
    let n = if lambda > 0.0 {
        Poisson::new(0.5 * lambda).map_err(|e| crate::Error::Domain(e.to_string()))?.sample(rng)
    } else {
        0.0
    };
    let chi = ChiSquared::new(dof + 2.0 * n).map_err(|e| crate::Error::Domain(e.to_string()))?;
    Ok(chi.sample(rng))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XyPath {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// The Brownian increments `ΔB_k` that drove the path.
    pub increments: Vec<f64>,
}

/// The force-point coordinates `Z = X + iY` under the tilted law:
/// `dX = (ρ − 2)X/|Z|² dt − √κ dB`, `dY = 2Y/|Z|² dt`. `Y²` is advanced by its own
/// Euler step `d(Y²) = 4Y²/|Z|² dt`, which keeps `Y_t² ≤ Y_0² + 4t` exactly.
pub fn xy_process(kappa: Kappa, rho: f64, z0: Complex64, horizon: f64, steps: usize, seed: u64) -> Result<XyPath> {
    let dt = check_grid(horizon, steps)?;
    let increments: Vec<f64> = {
        let mut rng = stream(seed, 0);
        (0..steps).map(|_| dt.sqrt() * normal(&mut rng)).collect()
    };
    xy_from_increments(kappa, rho, z0, dt, increments)
}

pub fn xy_from_increments(kappa: Kappa, rho: f64, z0: Complex64, dt: f64, increments: Vec<f64>) -> Result<XyPath> {
    if !(z0.im > 0.0) {
        return domain(format!("z0 must lie in the upper half-plane, got {z0}"));
    }
    let sk = kappa.value().sqrt();
    let n = increments.len();
    let mut x = Vec::with_capacity(n + 1);
    let mut y = Vec::with_capacity(n + 1);
    let (mut xv, mut y2) = (z0.re, z0.im * z0.im);
    x.push(xv);
    y.push(z0.im);
    for db in &increments {
        let r2 = xv * xv + y2;
        let x_next = xv + (rho - 2.0) * xv / r2 * dt - sk * db;
        y2 += 4.0 * y2 / r2 * dt;
        xv = x_next;
        x.push(xv);
        y.push(y2.sqrt());
    }
    let times = (0..=n).map(|k| k as f64 * dt).collect();
    Ok(XyPath { times, x, y, increments })
}

/// Smallest Bessel dimension for which `√κ·Bessel(ν)` dominates `X`, plus a margin.
pub fn dominating_nu(kappa: Kappa, rho: f64) -> f64 {
    let bound = 1f64.max(1.0 + 2.0 * (rho - 2.0) / kappa.value());
    bound + 0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledPaths {
    pub xy: XyPath,
    pub x_tilde: Vec<f64>,
    pub nu: f64,
    /// First grid index at which `X ≤ 0`.
    pub first_zero: Option<usize>,
}

impl CoupledPaths {
    /// Whether `X̃_k ≥ X_k` at every index before `X` first reaches 0.
    pub fn dominated(&self) -> bool {
        let end = self.first_zero.unwrap_or(self.x_tilde.len());
        (0..end).all(|k| self.x_tilde[k] >= self.xy.x[k])
    }
}

/// Couples the `(X, Y)` system with `X̃ = √κ·Bessel(ν)` driven by the same Brownian
/// increments: `dX̃ = κ(ν − 1)/(2X̃) dt − √κ dB`. Both are Euler steps on the same
/// noise, so `X̃ − X` evolves by drift alone. `X̃` stops once it leaves `(0, ∞)`.
pub fn coupled_bessel_domination(
    kappa: Kappa,
    rho: f64,
    nu: f64,
    z0: Complex64,
    horizon: f64,
    steps: usize,
    rng: &mut SimRng,
) -> Result<CoupledPaths> {
    if !(z0.re > 0.0) {
        return domain(format!("the domination comparison needs Re z0 > 0, got {z0}"));
    }
    let dt = check_grid(horizon, steps)?;
    let increments: Vec<f64> = (0..steps).map(|_| dt.sqrt() * normal(rng)).collect();
    let xy = xy_from_increments(kappa, rho, z0, dt, increments)?;
    let k = kappa.value();
    let a = 0.5 * k * (nu - 1.0);
    let sk = k.sqrt();
    let mut x_tilde = Vec::with_capacity(steps + 1);
    let mut xt = z0.re;
    x_tilde.push(xt);
    for db in &xy.increments {
        if xt > 0.0 {
            xt += a / xt * dt - sk * db;
        }
        x_tilde.push(xt);
    }
    let first_zero = xy.x.iter().position(|&x| x <= 0.0);
    Ok(CoupledPaths { xy, x_tilde, nu, first_zero })
}

#[cfg(test)]
mod tests;
