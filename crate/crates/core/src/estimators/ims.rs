use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{loglog_fit, Parameter, SpectrumCurve};
use crate::drivers::brownian_driver_with;
use crate::error::{domain, Error, Result};
use crate::exponents::{ims_star, Kappa};
use crate::loewner::{
    disk_halfplane_derivative, disk_halfplane_map, halfplane_disk_derivative, halfplane_disk_map, FastChain, Interpolation,
    DEFAULT_TRACE_OFFSET,
};
use crate::numeric::{compensated_sum, sample_stats};
use crate::par::{self, Mode};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImsSettings {
    pub t: f64,
    pub eps_grid: Vec<f64>,
    /// Exclusion distance in disk units around the curve endpoints and the unit circle.
    pub zeta: f64,
    pub steps: usize,
    pub nodes: usize,
    pub n_realizations: usize,
    pub seed: u64,
}

impl Default for ImsSettings {
    fn default() -> Self {
        ImsSettings {
            t: 1.0,
            eps_grid: (0..6).map(|k| 10f64.powf(-1.5 - 0.3 * k as f64)).collect(),
            zeta: 0.2,
            steps: 1 << 16,
            nodes: 2048,
            n_realizations: 20,
            seed: 0,
        }
    }
}

impl ImsSettings {
    fn validate(&self) -> Result<()> {
        if self.eps_grid.len() < 3 || self.eps_grid.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return domain("ε grid needs at least 3 values in (0, 1)");
        }
        let (lo, hi) = self.eps_grid.iter().fold((f64::MAX, f64::MIN), |(a, b), &e| (a.min(e), b.max(e)));
        if (hi / lo).log10() < 1.5 - 1e-9 {
            return domain(format!("ε grid spans {:.2} decades, need 1.5", (hi / lo).log10()));
        }
        if !(self.t > 0.0) || self.steps == 0 || self.nodes == 0 || self.n_realizations == 0 || !(self.zeta >= 0.0) {
            return domain("IMS estimate needs t > 0, ζ ≥ 0 and positive steps, nodes and realizations");
        }
        Ok(())
    }
}

/// Circle integrals and slopes of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImsRealization {
    /// `integrals[i][j]`: normalised integral of `|φ'|^{a_i}` over the kept arc of
    /// the circle of radius `1 − ε_j`.
    pub integrals: Vec<Vec<f64>>,
    pub slopes: Vec<f64>,
    pub kept_nodes: usize,
}

/// `log|φ'(z)|` and `φ(z)` for `φ = ψ⁻¹ ∘ f_t⁻¹ ∘ ψ`.
fn disk_map(chain: &FastChain, w_end: f64, z: Complex64) -> (Complex64, f64) {
    let w = disk_halfplane_map(z);
    let r = chain.eval_prefix(chain.len(), w + w_end);
    let p = r.point;
    let log_d = halfplane_disk_derivative(p).norm().ln() + r.log_abs_derivative + disk_halfplane_derivative(z).norm().ln();
    (halfplane_disk_map(p), log_d)
}

pub(crate) fn ims_realization(kappa: Kappa, a_grid: &[f64], settings: &ImsSettings, replica: u64) -> Result<ImsRealization> {
    let mut rng = stream(settings.seed, replica);
    let driver = brownian_driver_with(kappa, settings.t, settings.steps, Interpolation::PiecewiseSqrt, &mut rng)?;
    let w_end = *driver.values().last().unwrap();
    let chain = FastChain::build(driver.inverse_steps(), Mode::Sequential);
    let tip_h = chain.eval_prefix(chain.len(), Complex64::new(w_end, DEFAULT_TRACE_OFFSET)).point;
    let tip = halfplane_disk_map(tip_h);
    let base = Complex64::new(0.0, -1.0);
    let n = settings.nodes;
    let angles: Vec<Complex64> =
        (0..n).map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * (j as f64 + 0.5) / n as f64)).collect();
    let finest = settings.eps_grid.iter().copied().fold(f64::MAX, f64::min);
    let zeta = settings.zeta;
    let keep: Vec<bool> = angles
        .iter()
        .map(|&e| {
            let (img, _) = disk_map(&chain, w_end, e * (1.0 - finest));
            (img - tip).norm() >= zeta && (img - base).norm() >= zeta && 1.0 - img.norm() >= zeta
        })
        .collect();
    let kept_nodes = keep.iter().filter(|&&k| k).count();
    if kept_nodes == 0 {
        return Err(Error::Guard(format!("no quadrature node survives the exclusion ζ = {zeta}")));
    }
    let mut integrals = vec![Vec::with_capacity(settings.eps_grid.len()); a_grid.len()];
    for &eps in &settings.eps_grid {
        let logs: Vec<f64> = angles
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(&e, _)| disk_map(&chain, w_end, e * (1.0 - eps)).1)
            .collect();
        for (row, &a) in integrals.iter_mut().zip(a_grid) {
            row.push(compensated_sum(logs.iter().map(|l| (a * l).exp())) / n as f64);
        }
    }
    let xs: Vec<f64> = settings.eps_grid.iter().map(|e| 1.0 / e).collect();
    let slopes = integrals.iter().map(|ys| loglog_fit(&xs, ys).map(|f| f.slope)).collect::<Result<Vec<f64>>>()?;
    Ok(ImsRealization { integrals, slopes, kept_nodes })
}

/// Bulk integral-means slopes for every `a` in `a_grid`, averaged over independent
/// realizations that share the same curves across `a`.
pub fn ims_bulk_estimates(
    kappa: Kappa,
    a_grid: &[f64],
    settings: &ImsSettings,
    mode: Mode,
) -> Result<(SpectrumCurve, Vec<ImsRealization>)> {
    settings.validate()?;
    kappa.require_simple()?;
    let reals = par::map_indexed_with(mode, settings.n_realizations, |r| ims_realization(kappa, a_grid, settings, r as u64))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut curve = SpectrumCurve::new(Parameter::A);
    for (i, &a) in a_grid.iter().enumerate() {
        let slopes: Vec<f64> = reals.iter().map(|r| r.slopes[i]).collect();
        let st = sample_stats(&slopes);
        let stderr = if slopes.len() > 1 { st.stderr } else { 0.0 };
        curve.push(a, st.mean, stderr, ims_star(kappa, a)?);
    }
    Ok((curve, reals))
}

/// Single-`a` form of [`ims_bulk_estimates`]; returns `(slope, stderr, predicted)`.
pub fn ims_bulk_estimate(kappa: Kappa, a: f64, settings: &ImsSettings, mode: Mode) -> Result<(f64, f64, f64)> {
    let (curve, _) = ims_bulk_estimates(kappa, &[a], settings, mode)?;
    Ok((curve.estimated[0], curve.stderr[0], curve.predicted[0]))
}
