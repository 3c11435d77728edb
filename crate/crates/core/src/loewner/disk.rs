//! The Möbius map `ψ(z) = i(z + i)/(i − z)` from the unit disk onto the upper
//! half-plane, sending `−i ↦ 0`, `i ↦ ∞` and `0 ↦ i`, and its inverse.

use num_complex::Complex64;

use crate::error::{domain, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn disk_halfplane_map(z: Complex64) -> Complex64 {
    I * (z + I) / (I - z)
}

/// `ψ'(z) = −2/(i − z)²`.
pub fn disk_halfplane_derivative(z: Complex64) -> Complex64 {
    let d = I - z;
    -2.0 / (d * d)
}

pub fn halfplane_disk_map(w: Complex64) -> Complex64 {
    (1.0 + I * w) / (w + I)
}

/// `(ψ^{-1})'(w) = −2/(w + i)²`.
pub fn halfplane_disk_derivative(w: Complex64) -> Complex64 {
    let d = w + I;
    -2.0 / (d * d)
}

/// Koebe bracket `[h|φ'|/4, 4h|φ'|]` for the distance from `φ(z)` to the boundary of
/// the image domain, where `h` is the distance from `z` to the boundary of the source.
pub fn koebe_bounds(flow_derivative: f64, height: f64) -> Result<(f64, f64)> {
    if !(flow_derivative > 0.0) || !(height > 0.0) {
        return domain(format!("Koebe bounds need positive inputs, got |φ'| = {flow_derivative}, h = {height}"));
    }
    let d = flow_derivative * height;
    Ok((0.25 * d, 4.0 * d))
}
