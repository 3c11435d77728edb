//! Exact conformal maps for a single Loewner step.
//!
//! Over a step of capacity time `dt` whose driver moves by `dw` along a
//! square-root profile, the hull is a straight slit and
//!
//! ```text
//! F(u) = (u − x1)^α (u − x2)^(1−α),   α x1 + (1−α) x2 = 0,   α x1² + (1−α) x2² = 4 dt
//! ```
//!
//! maps `H` onto `H` minus that slit with `F(u) = u − 2dt/u + O(u⁻²)`. The tip's
//! preimage is `dw`, which fixes `α`. `dw = 0` gives the vertical slit
//! `F(u) = √(u² − 4dt)`.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitMap {
    alpha: f64,
    x1: f64,
    x2: f64,
    dt: f64,
}

/// Value and derivative of a map at a point.
#[derive(Debug, Clone, Copy)]
pub struct MapValue {
    pub value: Complex64,
    pub derivative: Complex64,
}

/// Principal log with `Im z = ±0` on the negative axis sent to `arg = π`, i.e. the
/// boundary value from the upper half-plane.
#[inline]
fn log_h(z: Complex64) -> Complex64 {
    Complex64::new(z.norm().ln(), z.im.abs().atan2(z.re).copysign(if z.im < 0.0 { -1.0 } else { 1.0 }))
}

#[inline]
fn sqrt_h(z: Complex64) -> Complex64 {
    // principal root; for z on the negative axis pick the upper branch
    if z.im == 0.0 && z.re < 0.0 {
        Complex64::new(0.0, (-z.re).sqrt())
    } else {
        z.sqrt()
    }
}

impl SlitMap {
    /// The slit whose tip has preimage `tip_preimage` under `F` after a step of
    /// capacity time `dt`.
    pub fn new(tip_preimage: f64, dt: f64) -> Self {
        debug_assert!(dt > 0.0);
        let d = tip_preimage / (2.0 * dt.sqrt());
        let r = (d * d + 4.0).sqrt();
        // α = (r + d)/(2r), 1 − α = (r − d)/(2r), evaluated without cancellation
        let (alpha, beta) = if d >= 0.0 {
            let beta = 2.0 / (r * (r + d));
            (1.0 - beta, beta)
        } else {
            let alpha = 2.0 / (r * (r - d));
            (alpha, 1.0 - alpha)
        };
        let sdt = dt.sqrt();
        let x1 = -2.0 * sdt * (beta / alpha).sqrt();
        let x2 = 2.0 * sdt * (alpha / beta).sqrt();
        SlitMap { alpha, x1, x2, dt }
    }

    pub fn vertical(dt: f64) -> Self {
        SlitMap::new(0.0, dt)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Endpoints of the real segment that `F` folds onto the two sides of the slit.
    pub fn singular_interval(&self) -> (f64, f64) {
        (self.x1, self.x2)
    }

    /// The point of the interval that `F` sends to the tip.
    pub fn tip_preimage(&self) -> f64 {
        self.alpha * self.x2 + (1.0 - self.alpha) * self.x1
    }

    fn is_vertical(&self) -> bool {
        self.alpha == 0.5
    }

    /// `F(u)` and `F'(u)` for `u` in the closed upper half-plane; points below the
    /// axis are handled by Schwarz reflection.
    pub fn eval(&self, u: Complex64) -> MapValue {
        if u.im < 0.0 {
            let m = self.eval(u.conj());
            return MapValue { value: m.value.conj(), derivative: m.derivative.conj() };
        }
        let a = u - self.x1;
        let b = u - self.x2;
        if self.is_vertical() {
            let (sa, sb) = (sqrt_h(a), sqrt_h(b));
            let value = sa * sb;
            // F' = u / F
            let derivative = if value == Complex64::new(0.0, 0.0) { Complex64::new(f64::INFINITY, 0.0) } else { u / value };
            return MapValue { value, derivative };
        }
        let value = (log_h(a) * self.alpha + log_h(b) * (1.0 - self.alpha)).exp();
        let derivative = value * (self.alpha / a + (1.0 - self.alpha) / b);
        MapValue { value, derivative }
    }

    /// `F(u)` for real `u` outside the singular interval (result is real).
    pub fn eval_real(&self, u: f64) -> f64 {
        debug_assert!(u <= self.x1 || u >= self.x2);
        let a = (u - self.x1).abs();
        let b = (u - self.x2).abs();
        let mag = (self.alpha * a.ln() + (1.0 - self.alpha) * b.ln()).exp();
        if u <= self.x1 { -mag } else { mag }
    }

    /// Solves `F(v) = u` for `v` in the upper half-plane (the forward step).
    pub fn invert(&self, u: Complex64) -> MapValue {
        if u.im < 0.0 {
            let m = self.invert(u.conj());
            return MapValue { value: m.value.conj(), derivative: m.derivative.conj() };
        }
        let mut v = sqrt_h(u * u + 4.0 * self.dt);
        if v.im < 0.0 {
            v = -v;
        }
        if !self.is_vertical() {
            let (w, r) = self.newton(u, v);
            v = w;
            if r > 1e-12 {
                if let Some((w2, r2)) = self.slit_guess(u).map(|g| self.newton(u, g)) {
                    if r2 < r {
                        v = w2;
                    }
                }
            }
        }
        let fwd = self.eval(v);
        MapValue { value: v, derivative: fwd.derivative.inv() }
    }

    /// Starting point for targets close to the slit, where the vertical-slit guess can
    /// land on the wrong side. The slit is the ray of angle `π(1−α)` and its two
    /// sides are the images of `[x1, tip]` and `[tip, x2]`.
    fn slit_guess(&self, target: Complex64) -> Option<Complex64> {
        let tip = self.tip_preimage();
        let modulus = |x: f64| ((x - self.x1).abs().ln() * self.alpha + (self.x2 - x).abs().ln() * (1.0 - self.alpha)).exp();
        let m = target.norm();
        if m >= modulus(tip) {
            return None;
        }
        let ccw = target.arg() > std::f64::consts::PI * (1.0 - self.alpha);
        // |F| rises from 0 at the outer endpoint to its maximum at the tip preimage
        let (mut near, mut far) = if ccw { (self.x1, tip) } else { (self.x2, tip) };
        for _ in 0..200 {
            let mid = 0.5 * (near + far);
            if modulus(mid) < m {
                near = mid;
            } else {
                far = mid;
            }
            if (far - near).abs() <= 1e-16 * (self.x2 - self.x1) {
                break;
            }
        }
        let x = 0.5 * (near + far);
        let f = self.eval(Complex64::new(x, 0.0));
        let mut v = Complex64::new(x, 0.0) + (target - f.value) / f.derivative;
        if !(v.im > 0.0) || !v.is_finite() {
            v = Complex64::new(x, 1e-12 * (self.x2 - self.x1));
        }
        Some(v)
    }

    /// Damped Newton on the log of `F`; returns the root and the final residual.
    fn newton(&self, target: Complex64, mut v: Complex64) -> (Complex64, f64) {
        let log_target = log_h(target);
        let residual = |v: Complex64| log_h(v - self.x1) * self.alpha + log_h(v - self.x2) * (1.0 - self.alpha) - log_target;
        let mut r = residual(v);
        for _ in 0..100 {
            if r.norm() < 1e-15 {
                break;
            }
            let slope = self.alpha / (v - self.x1) + (1.0 - self.alpha) / (v - self.x2);
            let step = r / slope;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let cand = v - step * lambda;
                if cand.im >= 0.0 {
                    let rc = residual(cand);
                    if rc.norm() < r.norm() {
                        v = cand;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (v, r.norm())
    }

    /// Solves `F(v) = y` for real `y ≠ 0`, taking the root left of the interval
    /// when `y < 0` and right of it when `y > 0`.
    pub fn invert_real(&self, y: f64) -> f64 {
        if self.is_vertical() {
            return y.signum() * (y * y + 4.0 * self.dt).sqrt();
        }
        let width = self.x2 - self.x1;
        // the factor adjacent to the root carries weight `near`, the far one `far`
        let (near, far, target) =
            if y < 0.0 { (self.alpha, 1.0 - self.alpha, (-y).ln()) } else { (1.0 - self.alpha, self.alpha, y.ln()) };
        // g(σ) = near·σ + far·ln(e^σ + width) − target, increasing and convex in σ
        let mut sigma = target.min((y.abs()).max(1e-300).ln());
        for _ in 0..200 {
            let e = sigma.exp();
            let g = near * sigma + far * (e + width).ln() - target;
            let dg = near + far * e / (e + width);
            let next = sigma - g / dg;
            if (next - sigma).abs() <= 1e-15 * sigma.abs().max(1.0) {
                sigma = next;
                break;
            }
            sigma = next;
        }
        let s = sigma.exp();
        if y < 0.0 { self.x1 - s } else { self.x2 + s }
    }
}
