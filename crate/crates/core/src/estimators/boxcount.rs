use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::loglog_fit;
use crate::error::{domain, Result};
use crate::loewner::Trace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountResult {
    pub meshes: Vec<f64>,
    pub counts: Vec<u64>,
    pub dimension: f64,
    pub stderr: f64,
}

/// Box-counting dimension of a trace polyline. Segments longer than half a mesh are
/// subdivided so that no crossed cell is missed.
pub fn box_counting_dimension(trace: &Trace, meshes: &[f64]) -> Result<BoxCountResult> {
    box_count_points(&trace.points, meshes)
}

pub fn box_count_points(points: &[Complex64], meshes: &[f64]) -> Result<BoxCountResult> {
    if meshes.len() < 4 {
        return domain(format!("box counting needs at least 4 meshes, got {}", meshes.len()));
    }
    if let Some(m) = meshes.iter().find(|m| !(**m > 0.0)) {
        return domain(format!("mesh sizes must be positive, got {m}"));
    }
    let (lo, hi) = meshes.iter().fold((f64::MAX, f64::MIN), |(a, b), &m| (a.min(m), b.max(m)));
    if (hi / lo).log10() < 1.5 - 1e-9 {
        return domain(format!("meshes span {:.2} decades, need 1.5", (hi / lo).log10()));
    }
    if points.len() < 2 || extent(points) < hi {
        return domain(format!("trace extent {:.3e} is below the coarsest mesh {hi:.3e}", extent(points)));
    }
    let mut sorted = meshes.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let counts: Vec<u64> = sorted.iter().map(|&m| count_cells(points, m)).collect();
    let xs: Vec<f64> = sorted.iter().map(|m| 1.0 / m).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let fit = loglog_fit(&xs, &ys)?;
    Ok(BoxCountResult { meshes: sorted, counts, dimension: fit.slope, stderr: fit.slope_stderr })
}

fn extent(points: &[Complex64]) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    (x1 - x0).max(y1 - y0)
}

fn count_cells(points: &[Complex64], mesh: f64) -> u64 {
    let cell = |p: Complex64| ((p.re / mesh).floor() as i64, (p.im / mesh).floor() as i64);
    let mut seen = HashSet::new();
    seen.insert(cell(points[0]));
    for w in points.windows(2) {
        let d = w[1] - w[0];
        let pieces = (d.norm() / (0.5 * mesh)).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            seen.insert(cell(w[0] + d * (k as f64 / pieces as f64)));
        }
    }
    seen.len() as u64
}

/// `n` geometrically spaced meshes from a quarter of the trace extent down by
/// `decades` decades.
pub fn default_meshes(points: &[Complex64], decades: f64, n: usize) -> Vec<f64> {
    let top = extent(points) / 4.0;
    (0..n).map(|k| top * 10f64.powf(-decades * k as f64 / (n - 1) as f64)).collect()
}

/// The Koch curve of the given level from 0 to 1.
pub fn koch_curve(level: u32) -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let rot = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
    for _ in 0..level {
        let mut next = Vec::with_capacity(4 * pts.len());
        for w in pts.windows(2) {
            let d = (w[1] - w[0]) / 3.0;
            let a = w[0] + d;
            next.extend([w[0], a, a + d * rot, a + d]);
        }
        next.push(*pts.last().unwrap());
        pts = next;
    }
    pts
}
