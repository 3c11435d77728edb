//! Fast evaluation of partial compositions of step maps.
//!
//! Steps are grouped into aligned dyadic blocks. A block's composed map `B` fixes
//! `∞`, is real on the real line outside a bounded interval `[lo, hi]` and satisfies
//! `B(w) = w + O(1/w)`, so `B(w) − w` has a Laurent expansion in `w − c` that
//! converges outside the disk of radius `R = (hi − lo)/2` around `c = (lo + hi)/2`.
//! The coefficients are real and are obtained from samples of `B` on the circle of
//! radius `3R`; the expansion is used only at points with `|w − c| ≥ 3R`, where the
//! truncation error is below `3^{-TERMS}` relative. Closer points fall through to
//! the two half blocks.

use num_complex::Complex64;

use super::{FlowResult, LogDerivative, Step};
use crate::par::{self, Mode};

const MIN_LEVEL: u32 = 3;
const TERMS: usize = 34;
const NODES: usize = 64;
const SAMPLE_RADIUS: f64 = 3.0;

#[derive(Debug, Clone)]
struct Block {
    center: f64,
    radius: f64,
    coeffs: [f64; TERMS],
}

#[derive(Debug, Clone)]
pub struct FastChain {
    steps: Vec<Step>,
    /// `levels[i]` holds the blocks of `2^(MIN_LEVEL + i)` steps.
    levels: Vec<Vec<Block>>,
}

impl FastChain {
    pub fn build(steps: Vec<Step>, mode: Mode) -> Self {
        let mut chain = FastChain { steps, levels: Vec::new() };
        let n = chain.steps.len();
        // real singular intervals, first for the smallest blocks then merged upwards
        let mut intervals: Vec<(f64, f64)> = par::map_indexed_with(mode, n >> MIN_LEVEL, |b| {
            let size = 1usize << MIN_LEVEL;
            chain.hull_interval(None, &chain.steps[b * size..(b + 1) * size])
        });
        let mut level = MIN_LEVEL;
        while !intervals.is_empty() {
            let blocks = par::map_indexed_with(mode, intervals.len(), |b| {
                let (lo, hi) = intervals[b];
                chain.fit_block(level, b, lo, hi)
            });
            chain.levels.push(blocks);
            let size = 1usize << level;
            intervals = par::map_indexed_with(mode, intervals.len() / 2, |b| {
                let later = &chain.steps[(2 * b + 1) * size..(2 * b + 2) * size];
                chain.hull_interval(Some(intervals[2 * b]), later)
            });
            level += 1;
        }
        chain
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Evolves the real interval spanned by a hull through further forward steps.
    fn hull_interval(&self, start: Option<(f64, f64)>, steps: &[Step]) -> (f64, f64) {
        let mut iv = start;
        for s in steps {
            let (x1, x2) = s.singular_interval();
            iv = Some(match iv {
                None => (x1, x2),
                Some((lo, hi)) => {
                    let lo = if lo < s.base { s.forward_real(lo) } else { x1 };
                    let hi = if hi > s.base { s.forward_real(hi) } else { x2 };
                    (lo.min(x1), hi.max(x2))
                }
            });
        }
        iv.expect("non-empty step range")
    }

    fn fit_block(&self, level: u32, index: usize, lo: f64, hi: f64) -> Block {
        let center = 0.5 * (lo + hi);
        let radius = 0.5 * (hi - lo);
        let rho = SAMPLE_RADIUS * radius;
        let mut sums = [Complex64::new(0.0, 0.0); TERMS];
        for j in 0..NODES / 2 {
            let theta = std::f64::consts::TAU * (j as f64 + 0.5) / NODES as f64;
            let unit = Complex64::from_polar(1.0, theta);
            let w = center + unit * rho;
            let mut acc = LogDerivative::default();
            let phi = self.eval_children(level, index, w, &mut acc) - w;
            let mut e = Complex64::new(1.0, 0.0);
            for s in sums.iter_mut() {
                *s += phi * e;
                e *= unit;
            }
        }
        let mut coeffs = [0.0; TERMS];
        let mut scale = 2.0 / NODES as f64;
        for (c, s) in coeffs.iter_mut().zip(&sums) {
            *c = scale * s.re;
            scale *= rho;
        }
        Block { center, radius, coeffs }
    }

    fn apply_steps(&self, range: std::ops::Range<usize>, mut w: Complex64, acc: &mut LogDerivative) -> Complex64 {
        for s in self.steps[range].iter().rev() {
            let m = s.apply(w);
            w = m.value;
            acc.push(m.derivative);
        }
        w
    }

    fn eval_children(&self, level: u32, index: usize, w: Complex64, acc: &mut LogDerivative) -> Complex64 {
        if level == MIN_LEVEL {
            let size = 1usize << level;
            return self.apply_steps(index * size..(index + 1) * size, w, acc);
        }
        let w = self.eval_block(level - 1, 2 * index + 1, w, acc);
        self.eval_block(level - 1, 2 * index, w, acc)
    }

    fn eval_block(&self, level: u32, index: usize, w: Complex64, acc: &mut LogDerivative) -> Complex64 {
        let block = &self.levels[(level - MIN_LEVEL) as usize][index];
        let v = w - block.center;
        if v.norm() < SAMPLE_RADIUS * block.radius {
            return self.eval_children(level, index, w, acc);
        }
        let u = v.inv();
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for (n, &a) in block.coeffs.iter().enumerate().rev() {
            s = s * u + a;
            ds = ds * u + a * n as f64;
        }
        acc.push(1.0 - ds * u);
        w + s
    }

    /// Applies steps `k−1, …, 0` to `w`.
    pub fn eval_prefix(&self, k: usize, mut w: Complex64) -> FlowResult {
        assert!(k <= self.steps.len());
        let mut acc = LogDerivative::default();
        let mut j = k;
        let top = MIN_LEVEL + self.levels.len() as u32;
        while j > 0 {
            let level = j.trailing_zeros().min(top.saturating_sub(1));
            if level < MIN_LEVEL || self.levels.is_empty() {
                w = self.apply_steps(j - 1..j, w, &mut acc);
                j -= 1;
            } else {
                w = self.eval_block(level, (j >> level) - 1, w, &mut acc);
                j -= 1 << level;
            }
        }
        FlowResult::from_parts(w, acc, None)
    }
}
