//! Closed-form exponents of the SLE multifractal spectrum.
//!
//! Everything here is a pure function of `κ` and one spectral parameter. The
//! estimators compare their Monte Carlo output against these values, and the
//! identities between them are exercised exhaustively in the tests.
//!
//! Domain guards return [`Error::Domain`](crate::Error::Domain) instead of
//! producing NaN at poles.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// The SLE parameter `κ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Kappa(f64);

impl Kappa {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Kappa(value))
        } else {
            domain(format!("kappa must be a positive finite number, got {value}"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Fails unless `κ ≤ 4` (the simple-curve regime).
    pub fn require_simple(self) -> Result<Self> {
        if self.0 <= 4.0 {
            Ok(self)
        } else {
            domain(format!("operation requires kappa <= 4, got {}", self.0))
        }
    }

    /// The dual parameter `16/κ`.
    pub fn dual(self) -> Kappa {
        Kappa(16.0 / self.0)
    }

    /// `(4+κ)²/(8κ)`, the constant shared by most of the formulas below.
    fn c(self) -> f64 {
        let k = self.0;
        (4.0 + k) * (4.0 + k) / (8.0 * k)
    }
}

impl TryFrom<f64> for Kappa {
    type Error = crate::Error;
    fn try_from(v: f64) -> Result<Self> {
        Kappa::new(v)
    }
}

impl From<Kappa> for f64 {
    fn from(k: Kappa) -> f64 {
        k.0
    }
}

fn check_s_pole(s: f64) -> Result<()> {
    if !s.is_finite() || s <= -1.0 {
        return domain(format!("s must exceed -1, got {s}"));
    }
    Ok(())
}

/// Dimension of the set of boundary preimages where `|φ'| ≈ ε^{-s}`:
/// `1 − (4+κ)² s² / (8κ(1+s))`.
pub fn tilde_xi(kappa: Kappa, s: f64) -> Result<f64> {
    check_s_pole(s)?;
    Ok(1.0 - kappa.c() * s * s / (1.0 + s))
}

/// Dimension of the image set on the curve: `ξ̃(s)/(1−s)` for `|s| < 1`.
pub fn xi(kappa: Kappa, s: f64) -> Result<f64> {
    if !s.is_finite() || s.abs() >= 1.0 {
        return domain(format!("xi needs |s| < 1, got {s}"));
    }
    let k = kappa.value();
    Ok((8.0 * k * (1.0 + s) - (4.0 + k).powi(2) * s * s) / (8.0 * k * (1.0 - s * s)))
}

/// The two roots `(s₋, s₊)` of `ξ̃`.
pub fn s_bounds(kappa: Kappa) -> (f64, f64) {
    let k = kappa.value();
    let root = 2.0 * (2.0 * k * (2.0 + k) * (8.0 + k)).sqrt();
    let den = (4.0 + k) * (4.0 + k);
    ((4.0 * k - root) / den, (4.0 * k + root) / den)
}

/// One-point decay exponent for the inverse centered map: `(4+κ)² s²/(8κ(1+s))`.
pub fn alpha(kappa: Kappa, s: f64) -> Result<f64> {
    check_s_pole(s)?;
    Ok(kappa.c() * s * s / (1.0 + s))
}

/// Sensitivity of `α` to the slack `u` in the derivative window.
pub fn alpha0(kappa: Kappa, s: f64) -> Result<f64> {
    check_s_pole(s)?;
    Ok(kappa.c() * s * (2.0 + s) / ((1.0 + s) * (1.0 + s)))
}

/// Forward-map exponent `γ(s) = α(s) − 2s + 1`.
pub fn gamma(kappa: Kappa, s: f64) -> Result<f64> {
    Ok(alpha(kappa, s)? - 2.0 * s + 1.0)
}

pub fn gamma0(kappa: Kappa, s: f64) -> Result<f64> {
    Ok(2.0 * alpha0(kappa, s)? + 2.0)
}

/// Exponent at the hitting time, `(8κ + 8κq + (4−κ)² q²)/(8(κ + 2κq))` for `q > −1/2`.
pub fn gamma_star(kappa: Kappa, q: f64) -> Result<f64> {
    if !q.is_finite() || q <= -0.5 {
        return domain(format!("gamma_star needs q > -1/2, got {q}"));
    }
    let k = kappa.value();
    Ok((8.0 * k + 8.0 * k * q + (4.0 - k).powi(2) * q * q) / (8.0 * (k + 2.0 * k * q)))
}

/// Force-point weight that optimises the martingale change of measure:
/// `ρ(s) = (4+κ)s/(1+s)`.
pub fn rho_opt(kappa: Kappa, s: f64) -> Result<f64> {
    check_s_pole(s)?;
    Ok((4.0 + kappa.value()) * s / (1.0 + s))
}

/// Maximiser of the integral-means variational problem,
/// `s*(a) = −1 + (4+κ)/√((4+κ)² − 8aκ)`.
pub fn s_star(kappa: Kappa, a: f64) -> Result<f64> {
    if !a.is_finite() || a >= kappa.c() {
        return domain(format!("s_star needs a < (4+kappa)^2/(8 kappa) = {}, got {a}", kappa.c()));
    }
    let k = kappa.value();
    Ok(-1.0 + (4.0 + k) / ((4.0 + k).powi(2) - 8.0 * a * k).sqrt())
}

/// Inverse of [`s_star`]: `a = (4+κ)²(1 − (1+s)^{-2})/(8κ)`.
pub fn a_of_s(kappa: Kappa, s: f64) -> Result<f64> {
    check_s_pole(s)?;
    Ok(kappa.c() * (1.0 - (1.0 + s).powi(-2)))
}

/// `(a₋, a₊)` where `s*(a±) = s±`.
pub fn a_bounds(kappa: Kappa) -> (f64, f64) {
    let (sm, sp) = s_bounds(kappa);
    // s± lie in (-1, 1], so a_of_s cannot fail here
    (a_of_s(kappa, sm).unwrap(), a_of_s(kappa, sp).unwrap())
}

/// Almost-sure bulk integral means spectrum: linear outside `[a₋, a₊]`,
/// algebraic inside.
pub fn ims_star(kappa: Kappa, a: f64) -> Result<f64> {
    if !a.is_finite() {
        return domain(format!("ims_star needs a finite a, got {a}"));
    }
    let (sm, sp) = s_bounds(kappa);
    let (am, ap) = a_bounds(kappa);
    let k = kappa.value();
    Ok(if a < am {
        -1.0 + sm * a
    } else if a > ap {
        -1.0 + sp * a
    } else {
        let disc = ((4.0 + k).powi(2) - 8.0 * a * k).max(0.0);
        -a + (4.0 + k) * (4.0 + k - disc.sqrt()) / (4.0 * k)
    })
}

/// Central charge `c = (6−κ)(6−16/κ)/4`.
pub fn central_charge(kappa: Kappa) -> f64 {
    let k = kappa.value();
    (6.0 - k) * (6.0 - 16.0 / k) / 4.0
}

/// Harmonic-measure multifractal spectrum
/// `f(α) = α + ((25−c)/24)(1 − ½(2α−1 + 1/(2α−1)))` for `α > 1/2`.
pub fn duplantier_f(kappa: Kappa, alpha_hm: f64) -> Result<f64> {
    if !alpha_hm.is_finite() || alpha_hm <= 0.5 {
        return domain(format!("duplantier_f needs alpha > 1/2, got {alpha_hm}"));
    }
    let c = central_charge(kappa);
    let m = 2.0 * alpha_hm - 1.0;
    Ok(alpha_hm + (25.0 - c) / 24.0 * (1.0 - 0.5 * (m + 1.0 / m)))
}

/// Imaginary-geometry constants `(Q, χ, λ_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConstants {
    pub q: f64,
    pub chi: f64,
    pub lambda_c: f64,
}

pub fn coupling_constants(kappa: Kappa) -> CouplingConstants {
    let r = kappa.value().sqrt();
    CouplingConstants { q: 2.0 / r + r / 2.0, chi: 2.0 / r - r / 2.0, lambda_c: std::f64::consts::PI / r }
}

/// Exponent `β = (8−2ρ)/κ` of the stationary angle density `C sin^β θ`.
pub fn bessel_beta(kappa: Kappa, rho: f64) -> f64 {
    (8.0 - 2.0 * rho) / kappa.value()
}

/// The characteristic values of the spectrum for one `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub kappa: Kappa,
    pub s_minus: f64,
    pub s_plus: f64,
    pub a_minus: f64,
    pub a_plus: f64,
}

impl ExponentSet {
    pub fn new(kappa: Kappa) -> Self {
        let (s_minus, s_plus) = s_bounds(kappa);
        let (a_minus, a_plus) = a_bounds(kappa);
        ExponentSet { kappa, s_minus, s_plus, a_minus, a_plus }
    }
}

/// One row of the `exponents` table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentRow {
    pub s: f64,
    pub tilde_xi: f64,
    pub xi: Option<f64>,
    pub alpha: f64,
    pub alpha0: f64,
    pub gamma: f64,
    pub gamma0: f64,
    pub rho_opt: f64,
}

pub fn tabulate(kappa: Kappa, s_grid: &[f64]) -> Result<Vec<ExponentRow>> {
    s_grid
        .iter()
        .map(|&s| {
            Ok(ExponentRow {
                s,
                tilde_xi: tilde_xi(kappa, s)?,
                xi: xi(kappa, s).ok(),
                alpha: alpha(kappa, s)?,
                alpha0: alpha0(kappa, s)?,
                gamma: gamma(kappa, s)?,
                gamma0: gamma0(kappa, s)?,
                rho_opt: rho_opt(kappa, s)?,
            })
        })
        .collect()
}
