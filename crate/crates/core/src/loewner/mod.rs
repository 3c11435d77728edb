//! Chordal Loewner flows for a sampled driving function.
//!
//! Every solver works step by step with the exact conformal map of a single step
//! ([`slit::SlitMap`]), so no ODE is integrated near its singularity. Derivatives
//! are accumulated as `(log|·|, arg)` pairs.
//!
//! Conventions for a grid `0 = t_0 < … < t_n` with values `W_k`:
//!
//! * piecewise-square-root: on step `k` the driver is `W_{k−1} + δ_k √((t − t_{k−1})/Δ_k)`,
//!   the hull grows by a straight tilted slit;
//! * piecewise-constant: the driver equals `W_k` on `(t_{k−1}, t_k]` and each step adds
//!   a vertical slit.
//!
//! The reverse flow uses the time-reversed square-root profile on each step, which is
//! the profile that makes its step map exact as well.

mod chain;
mod disk;
pub mod slit;

pub use chain::FastChain;
pub use disk::{disk_halfplane_derivative, disk_halfplane_map, halfplane_disk_derivative, halfplane_disk_map, koebe_bounds};
pub use slit::{MapValue, SlitMap};

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::par::{self, Mode};

/// How the driver is interpolated between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    PiecewiseConstant,
    #[default]
    PiecewiseSqrt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingFunction {
    times: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
}

impl DrivingFunction {
    pub fn new(times: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::Driver("need at least two grid points".into()));
        }
        if times.len() != values.len() {
            return Err(Error::Driver(format!("{} times but {} values", times.len(), values.len())));
        }
        if times[0] != 0.0 || values[0] != 0.0 {
            return Err(Error::Driver("grid must start at t = 0 with W(0) = 0".into()));
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Driver(format!("times not strictly increasing at index {}", k + 1)));
        }
        if let Some(k) = values.iter().chain(&times).position(|v| !v.is_finite()) {
            return Err(Error::Driver(format!("non-finite entry at position {k}")));
        }
        Ok(DrivingFunction { times, values, interpolation })
    }

    /// Driver on the uniform grid `t_k = k·horizon/(values.len() − 1)`.
    pub fn uniform(horizon: f64, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::Driver(format!("horizon must be positive, got {horizon}")));
        }
        let n = values.len().saturating_sub(1).max(1);
        let times = (0..values.len()).map(|k| horizon * k as f64 / n as f64).collect();
        DrivingFunction::new(times, values, interpolation)
    }

    /// `W ≡ 0` on a uniform grid.
    pub fn zero(horizon: f64, steps: usize) -> Result<Self> {
        DrivingFunction::uniform(horizon, vec![0.0; steps + 1], Interpolation::default())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty grid")
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// `W(t)` under the interpolation rule.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            return self.values[0];
        }
        if k >= self.times.len() {
            return *self.values.last().unwrap();
        }
        if self.times[k] == t {
            return self.values[k];
        }
        match self.interpolation {
            Interpolation::PiecewiseConstant => self.values[k],
            Interpolation::PiecewiseSqrt => {
                let frac = (t - self.times[k - 1]) / (self.times[k] - self.times[k - 1]);
                self.values[k - 1] + (self.values[k] - self.values[k - 1]) * frac.sqrt()
            }
        }
    }

    /// The driver restricted to `[0, t_end]`, with `t_end` appended as a grid point if
    /// it falls inside a step.
    pub fn truncated(&self, t_end: f64) -> Result<DrivingFunction> {
        if !(t_end > 0.0) || t_end > self.horizon() * (1.0 + 1e-12) {
            return domain(format!("t = {t_end} outside (0, {}]", self.horizon()));
        }
        let t_end = t_end.min(self.horizon());
        let k = self.times.partition_point(|&s| s < t_end);
        let mut times = self.times[..k].to_vec();
        let mut values = self.values[..k].to_vec();
        times.push(t_end);
        values.push(self.value_at(t_end));
        DrivingFunction::new(times, values, self.interpolation)
    }

    /// The driver `s ↦ W(t1 + s) − W(t1)` on `[0, T − t1]`.
    pub fn shifted(&self, t1: f64) -> Result<DrivingFunction> {
        if !(t1 >= 0.0) || t1 >= self.horizon() {
            return domain(format!("shift {t1} outside [0, {})", self.horizon()));
        }
        let w1 = self.value_at(t1);
        let k = self.times.partition_point(|&s| s <= t1);
        let mut times = vec![0.0];
        let mut values = vec![0.0];
        if k < self.times.len() && self.times[k - 1] < t1 && self.interpolation == Interpolation::PiecewiseSqrt {
            // a split square-root step is no longer a square-root profile
            return domain("shift must lie on the grid for square-root interpolation");
        }
        for j in k..self.times.len() {
            times.push(self.times[j] - t1);
            values.push(self.values[j] - w1);
        }
        DrivingFunction::new(times, values, self.interpolation)
    }

    /// Per-step maps of the inverse flow `g_t^{-1}`: applying `steps[n−1]`, …,
    /// `steps[0]` to `w + W_n` gives `g_t^{-1}(w + W_n)`.
    pub fn inverse_steps(&self) -> Vec<Step> {
        (1..self.times.len())
            .map(|k| {
                let dt = self.times[k] - self.times[k - 1];
                let (w0, w1) = (self.values[k - 1], self.values[k]);
                match self.interpolation {
                    Interpolation::PiecewiseSqrt => Step { base: w0, map: SlitMap::new(w1 - w0, dt) },
                    Interpolation::PiecewiseConstant => Step { base: w1, map: SlitMap::vertical(dt) },
                }
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "w"])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([format!("{t:e}"), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, interpolation: Interpolation) -> Result<DrivingFunction> {
        let mut r = csv::Reader::from_reader(input);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for rec in r.deserialize::<(f64, f64)>() {
            let (t, v) = rec?;
            times.push(t);
            values.push(v);
        }
        DrivingFunction::new(times, values, interpolation)
    }
}

/// One step of a flow in absolute coordinates: `w ↦ base + F(w − base)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub base: f64,
    pub map: SlitMap,
}

impl Step {
    pub fn apply(&self, w: Complex64) -> MapValue {
        let m = self.map.eval(w - self.base);
        MapValue { value: m.value + self.base, derivative: m.derivative }
    }

    /// The inverse of [`Step::apply`], i.e. one step of the forward Loewner flow.
    pub fn forward(&self, z: Complex64) -> MapValue {
        let m = self.map.invert(z - self.base);
        MapValue { value: m.value + self.base, derivative: m.derivative }
    }

    pub fn apply_real(&self, x: f64) -> f64 {
        self.base + self.map.eval_real(x - self.base)
    }

    pub fn forward_real(&self, x: f64) -> f64 {
        self.base + self.map.invert_real(x - self.base)
    }

    pub fn singular_interval(&self) -> (f64, f64) {
        let (a, b) = self.map.singular_interval();
        (self.base + a, self.base + b)
    }
}

/// Running product of derivatives kept as `log|·|` and `arg`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LogDerivative {
    pub log_abs: f64,
    pub arg: f64,
}

impl LogDerivative {
    #[inline]
    pub fn push(&mut self, d: Complex64) {
        self.log_abs += d.norm().ln();
        self.arg += d.arg();
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.log_abs.exp(), self.arg)
    }
}

/// A point carried through a flow together with its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub point: Complex64,
    pub derivative: Complex64,
    pub log_abs_derivative: f64,
    pub swallow_time: Option<f64>,
}

impl FlowResult {
    fn from_parts(point: Complex64, d: LogDerivative, swallow_time: Option<f64>) -> Self {
        FlowResult { point, derivative: d.value(), log_abs_derivative: d.log_abs, swallow_time }
    }
}

/// Relative size (in units of `√Δ`) below which `|g − W|` counts as swallowed.
pub const SWALLOW_THRESHOLD: f64 = 1e-4;

fn check_upper(z: Complex64) -> Result<()> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return domain(format!("point {z} is not in the open upper half-plane"));
    }
    Ok(())
}

/// `g_t(z0)` and `g_t'(z0)` under the forward flow.
pub fn forward_flow(driver: &DrivingFunction, z0: Complex64, t_end: f64) -> Result<FlowResult> {
    check_upper(z0)?;
    let d = driver.truncated(t_end)?;
    let times = d.times();
    let mut z = z0;
    let mut acc = LogDerivative::default();
    for (k, step) in d.inverse_steps().iter().enumerate() {
        let m = step.forward(z);
        let dt = times[k + 1] - times[k];
        let gap = (m.value - d.values()[k + 1]).norm();
        if !(m.value.im > 0.0) || gap < SWALLOW_THRESHOLD * dt.sqrt() {
            return Ok(FlowResult::from_parts(z, acc, Some(times[k + 1])));
        }
        z = m.value;
        acc.push(m.derivative);
    }
    Ok(FlowResult::from_parts(z, acc, None))
}

/// One step of the centered reverse flow `dZ = −2/Z dt − dW` with driver increment
/// `dw` over time `dt`.
#[inline]
pub fn reverse_step(z: Complex64, dw: f64, dt: f64, interpolation: Interpolation) -> MapValue {
    let map = match interpolation {
        Interpolation::PiecewiseSqrt => SlitMap::new(-dw, dt),
        Interpolation::PiecewiseConstant => SlitMap::vertical(dt),
    };
    map.eval(z - dw)
}

/// The centered reverse flow `Z_t` with `Z_0 = z0` and its derivative in `z0`.
pub fn reverse_flow_centered(driver: &DrivingFunction, z0: Complex64, t_end: f64) -> Result<FlowResult> {
    check_upper(z0)?;
    let d = driver.truncated(t_end)?;
    let (times, values) = (d.times(), d.values());
    let mut z = z0;
    let mut acc = LogDerivative::default();
    for k in 1..times.len() {
        let m = reverse_step(z, values[k] - values[k - 1], times[k] - times[k - 1], d.interpolation());
        if m.value.im < z.im {
            return Err(Error::Guard(format!("reverse flow lost height at step {k}")));
        }
        z = m.value;
        acc.push(m.derivative);
    }
    Ok(FlowResult::from_parts(z, acc, None))
}

/// `f_t^{-1}(w)` and its derivative, where `f_t = g_t − W_t`.
pub fn inverse_map(driver: &DrivingFunction, w: Complex64, t: f64) -> Result<FlowResult> {
    check_upper(w)?;
    let d = driver.truncated(t)?;
    let steps = d.inverse_steps();
    Ok(apply_prefix(&steps, steps.len(), w + *d.values().last().unwrap()))
}

fn apply_prefix(steps: &[Step], k: usize, mut w: Complex64) -> FlowResult {
    let mut acc = LogDerivative::default();
    for step in steps[..k].iter().rev() {
        let m = step.apply(w);
        w = m.value;
        acc.push(m.derivative);
    }
    FlowResult::from_parts(w, acc, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoordinateFrame {
    #[default]
    HalfPlane,
    Disk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub points: Vec<Complex64>,
    pub coordinate_frame: CoordinateFrame,
    pub capacity_times: Vec<f64>,
}

impl Trace {
    /// The same curve in the disk, via the inverse of the disk-to-half-plane map.
    pub fn to_disk(&self) -> Trace {
        match self.coordinate_frame {
            CoordinateFrame::Disk => self.clone(),
            CoordinateFrame::HalfPlane => Trace {
                points: self.points.iter().map(|&w| halfplane_disk_map(w)).collect(),
                coordinate_frame: CoordinateFrame::Disk,
                capacity_times: self.capacity_times.clone(),
            },
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re", "im"])?;
        for (t, p) in self.capacity_times.iter().zip(&self.points) {
            w.write_record([format!("{t:e}"), format!("{:e}", p.re), format!("{:e}", p.im)])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const DEFAULT_TRACE_OFFSET: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Height above the driver at which the tip is sampled.
    pub offset: f64,
    /// Use block Laurent expansions of partial compositions ([`FastChain`]).
    pub accelerate: bool,
    pub mode: Mode,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { offset: DEFAULT_TRACE_OFFSET, accelerate: false, mode: Mode::default() }
    }
}

/// Curve samples `η(t_k) ≈ f_{t_k}^{-1}(i·offset)` at every grid time. Quadratic in
/// the number of steps.
pub fn trace(driver: &DrivingFunction, offset: f64) -> Result<Trace> {
    trace_with(driver, &TraceOptions { offset, ..TraceOptions::default() })
}

pub fn trace_with(driver: &DrivingFunction, opts: &TraceOptions) -> Result<Trace> {
    if !(opts.offset > 0.0) {
        return domain(format!("trace offset must be positive, got {}", opts.offset));
    }
    let steps = driver.inverse_steps();
    let values = driver.values();
    let tip = |k: usize| Complex64::new(values[k], opts.offset);
    let points: Vec<Complex64> = if opts.accelerate {
        let chain = FastChain::build(steps, opts.mode);
        par::map_indexed_with(opts.mode, values.len(), |k| {
            if k == 0 { Complex64::new(values[0], 0.0) } else { chain.eval_prefix(k, tip(k)).point }
        })
    } else {
        par::map_indexed_with(opts.mode, values.len(), |k| {
            if k == 0 { Complex64::new(values[0], 0.0) } else { apply_prefix(&steps, k, tip(k)).point }
        })
    };
    Ok(Trace { points, coordinate_frame: CoordinateFrame::HalfPlane, capacity_times: driver.times().to_vec() })
}
