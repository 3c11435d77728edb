//! Small numerical utilities shared by the samplers and estimators: compensated
//! summation, sample moments, tanh-sinh quadrature and Kolmogorov–Smirnov distances.

use crate::error::{domain, Result};

/// Neumaier (improved Kahan–Babuška) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<CompensatedSum>().value()
}

/// Mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

pub fn sample_stats(xs: &[f64]) -> SampleStats {
    let n = xs.len();
    if n == 0 {
        return SampleStats { n, mean: f64::NAN, variance: f64::NAN, stderr: f64::NAN };
    }
    let mean = compensated_sum(xs.iter().copied()) / n as f64;
    let variance = if n > 1 {
        compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1) as f64
    } else {
        0.0
    };
    SampleStats { n, mean, variance, stderr: (variance / n as f64).sqrt() }
}

/// Sample skewness and excess kurtosis (population moment estimators).
pub fn skew_kurtosis(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let m2 = compensated_sum(xs.iter().map(|x| (x - mean).powi(2))) / n;
    let m3 = compensated_sum(xs.iter().map(|x| (x - mean).powi(3))) / n;
    let m4 = compensated_sum(xs.iter().map(|x| (x - mean).powi(4))) / n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Sample covariance of paired observations with the standard error of the
/// estimate (delta method on the products of centred values).
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mx = compensated_sum(xs.iter().copied()) / n as f64;
    let my = compensated_sum(ys.iter().copied()) / n as f64;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let st = sample_stats(&prods);
    (st.mean * n as f64 / (n - 1) as f64, st.stderr)
}

/// Integrates `f` over `[a, b]` with the tanh-sinh (double exponential) rule,
/// halving the step until two successive levels agree to `tol`. Integrable endpoint
/// singularities are handled because the nodes never touch the endpoints.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(b > a) {
        return domain(format!("empty interval [{a}, {b}]"));
    }
    let half = 0.5 * (b - a);
    let t_max = 6.5;
    let node = |t: f64| -> f64 {
        let s = std::f64::consts::FRAC_PI_2 * t.sinh();
        let c = s.cosh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / (c * c);
        // distance to the nearer endpoint, computed without cancellation
        let d = half / (s.abs().exp() * c);
        let pt = if s < 0.0 { a + d } else { b - d };
        if pt <= a || pt >= b || w == 0.0 {
            return 0.0;
        }
        let v = f(pt) * w;
        if v.is_finite() { v } else { 0.0 }
    };
    let mut h = 1.0;
    let mut sum = node(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += node(k as f64 * h) + node(-(k as f64) * h);
        k += 1;
    }
    let mut estimate = half * h * sum;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += node(k as f64 * h) + node(-(k as f64) * h);
            k += 2;
        }
        let next = half * h * sum;
        if (next - estimate).abs() <= tol * next.abs().max(1.0) {
            return Ok(next);
        }
        estimate = next;
    }
    Ok(estimate)
}

/// Bisection on a bracketing interval.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return domain(format!("root not bracketed in [{lo}, {hi}]"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < tol {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One-sample Kolmogorov–Smirnov distance of `samples` against the CDF `cdf`.
/// Sorts `samples` in place.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs());
    }
    d
}

/// Two-sample Kolmogorov–Smirnov distance. Sorts both inputs in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Parses `start:stop:step` into an inclusive grid (endpoint kept when within 1e-12).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parse = |s: &str| -> Result<f64> {
        s.trim().parse::<f64>().or_else(|_| domain(format!("bad grid number {s:?}")))
    };
    if text.contains(',') {
        return text.split(',').map(parse).collect();
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![parse(single)?]),
        [start, stop, step] => {
            let (a, b, h) = (parse(start)?, parse(stop)?, parse(step)?);
            if !(h > 0.0) || b < a {
                return domain(format!("grid {text:?} needs start <= stop and step > 0"));
            }
            let n = ((b - a) / h + 1e-12).floor() as usize;
            let mut out: Vec<f64> = (0..=n).map(|k| a + k as f64 * h).collect();
            // snap accumulated rounding so that grid points print as typed
            for v in out.iter_mut() {
                *v = (*v * 1e12).round() / 1e12;
            }
            Ok(out)
        }
        _ => domain(format!("grid {text:?} is not start:stop:step")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let mut xs = vec![1.0e16];
        xs.extend(std::iter::repeat_n(1.0, 1000));
        xs.push(-1.0e16);
        assert_eq!(compensated_sum(xs.iter().copied()), 1000.0);
    }

    #[test]
    fn tanh_sinh_handles_smooth_and_singular_integrands() {
        let v = tanh_sinh(|x| x.sin().powi(2), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        // ∫_0^1 x^{-1/2} = 2
        let v = tanh_sinh(|x| x.powf(-0.5), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn grid_is_inclusive() {
        let g = parse_grid("-0.4:0.9:0.05").unwrap();
        assert_eq!(g.len(), 27);
        assert!((g[26] - 0.9).abs() < 1e-12);
        assert!(g.contains(&0.0));
        assert_eq!(parse_grid("0.2,0.4").unwrap(), vec![0.2, 0.4]);
    }

    #[test]
    fn ks_two_sample_identical_is_zero() {
        let mut a = vec![0.3, 0.1, 0.2];
        let mut b = a.clone();
        assert_eq!(ks_two_sample(&mut a, &mut b), 0.0);
        let mut c = vec![10.0, 11.0, 12.0];
        assert_eq!(ks_two_sample(&mut a, &mut c), 1.0);
    }
}
