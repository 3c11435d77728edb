//! End-to-end acceptance checks. Each test prints one PASS/FAIL line before asserting.

use std::io::Write;

use num_complex::Complex64;
use slelab::drivers::{
    brownian_driver, coupled_bessel_domination, dominating_nu, theta_process_with, ThetaStationary,
};
use slelab::estimators::{
    box_counting_dimension, ims_bulk_estimates, koch_curve, mf_spectrum_estimate, ImsSettings,
};
use slelab::exponents::*;
use slelab::gff::{covariance_mc, default_modes};
use slelab::loewner::{
    forward_flow, inverse_map, reverse_flow_centered, trace_with, CoordinateFrame, DrivingFunction, Trace,
    TraceOptions,
};
use slelab::martingale::{
    check_martingale, tail_probability_is, tail_probability_mc, MartingaleParams, PathSettings, TailSettings,
};
use slelab::numeric::ks_distance;
use slelab::par::Mode;
use slelab::rng::stream;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn kappa(k: f64) -> Kappa {
    Kappa::new(k).unwrap()
}

// Written to the process stdout rather than through println!, so the line shows up
// without --nocapture.
fn report(n: u32, name: &str, pass: bool, detail: String) {
    let line = format!("criterion {n:>2} {name}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn upper_sqrt(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

const KAPPAS: [f64; 7] = [0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0];

#[test]
fn criterion_01_formula_identities() {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut check = |what: &str, k: f64, err: f64, tol: f64| {
        worst = worst.max(err / tol);
        if err.is_nan() || err > tol {
            failures.push(format!("{what} at κ={k}: {err:e}"));
        }
    };
    let s_grid: Vec<f64> = (1..2000).map(|i| -1.0 + i as f64 * 1e-3).collect();
    for &k in &KAPPAS {
        let kp = kappa(k);
        let (sm, sp) = s_bounds(kp);
        check("ξ̃(s−)", k, tilde_xi(kp, sm).unwrap().abs(), 1e-12);
        check("ξ̃(s+)", k, tilde_xi(kp, sp).unwrap().abs(), 1e-12);

        // ξ peaks at κ'/4 with value 1 + κ'/8, κ' = min(κ, 16/κ).
        let ke = k.min(16.0 / k);
        if ke < 4.0 {
            check("ξ(κ/4)", k, (xi(kp, ke / 4.0).unwrap() - (1.0 + ke / 8.0)).abs(), 1e-12);
            let argmax = s_grid
                .iter()
                .copied()
                .max_by(|a, b| xi(kp, *a).unwrap().total_cmp(&xi(kp, *b).unwrap()))
                .unwrap();
            check("argmax ξ", k, (argmax - ke / 4.0).abs(), 1e-3 + 1e-12);
        } else {
            // κ = 4: ξ(s) = (1+2s)/(1+s) on (−1, 1), approaching 3/2.
            for &s in &[0.9, 0.99, 1.0 - 1e-6] {
                check("ξ at κ=4", k, (xi(kp, s).unwrap() - (1.0 + 2.0 * s) / (1.0 + s)).abs(), 1e-9);
            }
        }

        let dual = kp.dual();
        let (dm, dp) = s_bounds(dual);
        check("s− duality", k, (sm - dm).abs(), 1e-12);
        check("s+ duality", k, (sp - dp).abs(), 1e-12);
        for &s in s_grid.iter().step_by(7) {
            check("ξ̃ duality", k, (tilde_xi(kp, s).unwrap() - tilde_xi(dual, s).unwrap()).abs(), 1e-12);
            let near_pole = (1.0 - s.abs()) < 1e-2;
            let tol = if near_pole { 1e-9 } else { 1e-12 };
            let x = xi(kp, s).unwrap();
            check("ξ duality", k, (x - xi(dual, s).unwrap()).abs(), tol);
            check("ξ = f(1/(1−s))", k, (x - duplantier_f(kp, 1.0 / (1.0 - s)).unwrap()).abs(), tol);
            check("α = 1 − ξ̃", k, (alpha(kp, s).unwrap() + tilde_xi(kp, s).unwrap() - 1.0).abs(), 1e-12);
            let r = rho_opt(kp, s).unwrap();
            check("ρ_opt inversion", k, (r / (k + 4.0 - r) - s).abs(), if near_pole { 1e-9 } else { 1e-12 });
        }
        for i in 0..400 {
            let q = -0.49 + i as f64 * 0.01;
            let lhs = gamma_star(kp, q).unwrap();
            let rhs = (q + 1.0) * gamma(kp, q / (1.0 + q)).unwrap();
            check("γ* = (q+1)γ(q/(1+q))", k, (lhs - rhs).abs(), if q < -0.45 { 1e-9 } else { 1e-12 });
        }
        let (am, ap) = a_bounds(kp);
        for (a, s) in [(am, sm), (ap, sp)] {
            // Middle-branch formula written out independently of the library.
            let middle = -a + (4.0 + k) * (4.0 + k - ((4.0 + k).powi(2) - 8.0 * a * k).max(0.0).sqrt()) / (4.0 * k);
            check("IMS* branch continuity", k, (middle - (-1.0 + s * a)).abs(), 1e-9);
            let jump = (ims_star(kp, a * (1.0 - 1e-12)).unwrap() - ims_star(kp, a * (1.0 + 1e-12)).unwrap()).abs();
            check("IMS* no jump", k, jump, 1e-9);
        }
    }
    report(1, "formula identities", failures.is_empty(), format!("worst error/tolerance {worst:.2e}{}", failures.iter().map(|f| format!("; {f}")).collect::<String>()));
}

#[test]
fn criterion_02_loewner_analytic_oracle() {
    let mut worst_fwd: f64 = 0.0;
    let mut worst_rev: f64 = 0.0;
    let t = 1.0;
    let zero = DrivingFunction::zero(t, 64).unwrap();
    for i in 0..10 {
        for j in 0..10 {
            let z = c(-1.9 + 0.4 * i as f64 + 0.02, 0.1 + 0.21 * j as f64);
            let f = forward_flow(&zero, z, t).unwrap();
            let g = upper_sqrt(z * z + 4.0 * t);
            worst_fwd = worst_fwd.max((f.point - g).norm() / g.norm());
            worst_fwd = worst_fwd.max((f.derivative - z / g).norm() / (z / g).norm());
            let r = reverse_flow_centered(&zero, z, t).unwrap();
            let h = upper_sqrt(z * z - 4.0 * t);
            worst_rev = worst_rev.max((r.point - h).norm() / h.norm());
            worst_rev = worst_rev.max((r.derivative - z / h).norm() / (z / h).norm());
        }
    }
    let d = brownian_driver(kappa(2.0), t, 2000, 3).unwrap();
    let w_end = *d.values().last().unwrap();
    let mut worst_trip: f64 = 0.0;
    let mut skipped = 0;
    for i in 0..10 {
        for j in 0..10 {
            let z = c(-2.0 + 0.41 * i as f64, 0.2 + 0.2 * j as f64);
            let f = forward_flow(&d, z, t).unwrap();
            // Swallowed points have left the domain of the inverse map.
            if f.swallow_time.is_some() {
                skipped += 1;
                continue;
            }
            let back = inverse_map(&d, f.point - w_end, t).unwrap();
            worst_trip = worst_trip.max((back.point - z).norm());
        }
    }
    let pass = worst_fwd < 1e-8 && worst_rev < 1e-8 && worst_trip < 1e-6;
    report(
        2,
        "Loewner analytic oracle",
        pass,
        format!("forward rel {worst_fwd:.2e}, reverse rel {worst_rev:.2e}, round trip {worst_trip:.2e} ({skipped} swallowed points skipped)"),
    );
}

#[test]
fn criterion_03_martingale_mean() {
    let mut lines = Vec::new();
    let mut pass = true;
    let settings = PathSettings { steps: 10_000, eta: 0.1 };
    for (i, &k) in [2.0, 8.0 / 3.0, 4.0].iter().enumerate() {
        let kp = kappa(k);
        let rho = rho_opt(kp, 0.5).unwrap();
        let p = MartingaleParams::new(kp, rho, c(0.5, 0.2)).unwrap();
        let m = check_martingale(&p, 0.5, &settings, 10_000, 300 + i as u64, Mode::Parallel).unwrap();
        let bias = m.mean_ratio - 1.0;
        let ok = bias.abs() < 4.0 * m.stderr && bias.abs() < 0.02;
        pass &= ok;
        lines.push(format!("κ={k:.3}: {:.4} ± {:.4}", m.mean_ratio, m.stderr));
    }
    report(3, "martingale mean", pass, lines.join(", "));
}

#[test]
fn criterion_04_change_of_measure() {
    let kp = kappa(2.0);
    let z = c(1.0, 0.1);
    let base = TailSettings { n_samples: 10_000, ..TailSettings::default() };
    let is = tail_probability_is(kp, 0.3, z, &TailSettings { seed: 41, ..base }, Mode::Parallel).unwrap();
    let mc = tail_probability_mc(kp, 0.3, z, &TailSettings { seed: 42, ..base }, Mode::Parallel).unwrap();
    let se = (is.stderr.powi(2) + mc.stderr.powi(2)).sqrt();
    let diff = (is.p_hat - mc.p_hat).abs();
    report(
        4,
        "change of measure",
        diff < 3.0 * se && !is.flagged,
        format!("IS {:.4} ± {:.4} (ess {:.0}), MC {:.4} ± {:.4}", is.p_hat, is.stderr, is.ess, mc.p_hat, mc.stderr),
    );
}

#[test]
fn criterion_05_one_point_slope() {
    let kp = kappa(2.0);
    let settings = TailSettings { n_samples: 10_000, seed: 50, ..TailSettings::default() };
    let eps = [0.1, 0.05, 0.025, 0.0125];
    let spectrum = mf_spectrum_estimate(kp, &[0.2, 0.4], &eps, 1.0, &settings, Mode::Parallel).unwrap();
    let a = &spectrum.alpha;
    let pass = (0..a.len()).all(|i| (a.estimated[i] - a.predicted[i]).abs() < 0.1);
    let detail = (0..a.len())
        .map(|i| format!("s={}: α̂ {:.4} ± {:.4} vs {:.4}", a.grid[i], a.estimated[i], a.stderr[i], a.predicted[i]))
        .collect::<Vec<_>>()
        .join(", ");
    report(5, "one-point exponent slope", pass, detail);
}

#[test]
fn criterion_06_theta_stationarity() {
    let kp = kappa(2.0);
    let recorded = 1_250_000;
    let path =
        theta_process_with(kp, 2.0, std::f64::consts::FRAC_PI_2, 12_500.0, recorded, 8, &mut stream(60, 0)).unwrap();
    let mut samples: Vec<f64> = path.theta[recorded / 5 + 1..].to_vec();
    let law = ThetaStationary::new(kp, 2.0).unwrap();
    let ks = ks_distance(&mut samples, |t| law.cdf(t));
    report(6, "θ stationarity", ks < 0.02, format!("KS {ks:.4} over {} samples, β = {}", samples.len(), law.beta()));
}

#[test]
fn criterion_07_bessel_domination() {
    let kp = kappa(2.0);
    let rho = rho_opt(kp, 0.5).unwrap();
    let nu = dominating_nu(kp, rho);
    let z0 = c(0.5, 0.01);
    let mut dominated = 0;
    let mut y_ok = 0;
    let n = 1000;
    for r in 0..n {
        let p = coupled_bessel_domination(kp, rho, nu, z0, 1.0, 5000, &mut stream(70, r)).unwrap();
        dominated += p.dominated() as usize;
        let y0 = z0.im * z0.im;
        y_ok += p.xy.times.iter().zip(&p.xy.y).all(|(t, y)| y * y <= y0 + 4.0 * t + 1e-12) as usize;
    }
    report(
        7,
        "Bessel domination",
        dominated == n as usize && y_ok == n as usize,
        format!("ν = {nu}, dominated {dominated}/{n}, Y² bound {y_ok}/{n}"),
    );
}

#[test]
fn criterion_08_gff_covariance() {
    let pairs = [(c(0.5, 0.0), c(0.5, 0.0)), (c(0.3, 0.0), c(-0.3, 0.0)), (c(0.0, 0.7), c(0.2, 0.0))];
    let mut pass = true;
    let mut lines = Vec::new();
    for (i, (z, w)) in pairs.iter().enumerate() {
        let n = default_modes(z.norm().max(w.norm())).unwrap();
        let est = covariance_mc(n, 100_000, *z, *w, 80 + i as u64, Mode::Parallel).unwrap();
        let ok = (est.estimate - est.exact).abs() < 4.0 * est.stderr + est.truncation_bound;
        pass &= ok;
        lines.push(format!("{:.5} ± {:.5} vs {:.5} (N={n})", est.estimate, est.stderr, est.exact));
    }
    report(8, "GFF covariance", pass, lines.join(", "));
}

#[test]
fn criterion_09_box_counting() {
    let d = brownian_driver(kappa(2.0), 1.0, 200_000, 90).unwrap();
    let trace = trace_with(&d, &TraceOptions { accelerate: true, ..TraceOptions::default() }).unwrap();
    let meshes: Vec<f64> = (0..8).map(|k| 0.3 * (0.005f64 / 0.3).powf(k as f64 / 7.0)).collect();
    let sle = box_counting_dimension(&trace, &meshes).unwrap();
    let koch_points = koch_curve(6);
    let koch = Trace {
        capacity_times: (0..koch_points.len()).map(|k| k as f64).collect(),
        points: koch_points,
        coordinate_frame: CoordinateFrame::HalfPlane,
    };
    let koch_meshes: Vec<f64> = (1..=5).map(|k| 3f64.powi(-k)).collect();
    let kr = box_counting_dimension(&koch, &koch_meshes).unwrap();
    let target = 4f64.ln() / 3f64.ln();
    let pass = (1.15..=1.35).contains(&sle.dimension) && (kr.dimension - target).abs() < 0.05;
    report(
        9,
        "box-counting dimension",
        pass,
        format!("SLE {:.4} ± {:.4} (target 1.25), Koch {:.4} vs {target:.4}", sle.dimension, sle.stderr, kr.dimension),
    );
}

#[test]
fn criterion_10_bulk_ims() {
    let kp = kappa(2.0);
    let settings = ImsSettings { n_realizations: 20, seed: 100, ..ImsSettings::default() };
    let (curve, _) = ims_bulk_estimates(kp, &[0.0, 1.0], &settings, Mode::Parallel).unwrap();
    let pass = curve.estimated[0].abs() < 0.03 && (curve.estimated[1] - curve.predicted[1]).abs() < 0.15;
    report(
        10,
        "bulk IMS slope",
        pass,
        format!(
            "a=0: {:.2e}, a=1: {:.4} ± {:.4} vs {:.4}",
            curve.estimated[0], curve.estimated[1], curve.stderr[1], curve.predicted[1]
        ),
    );
}
