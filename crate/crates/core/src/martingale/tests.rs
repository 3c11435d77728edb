use super::*;
use crate::exponents::rho_opt;

fn kappa(k: f64) -> Kappa {
    Kappa::new(k).unwrap()
}

#[test]
fn initial_value_matches_direct_product() {
    let k = 3.0;
    let rho = 1.3;
    let z = Complex64::new(0.4, 0.7);
    let p = MartingaleParams::new(kappa(k), rho, z).unwrap();
    let direct = z.im.powf(-rho * rho / (8.0 * k)) * z.norm().powf(rho / k);
    assert!((p.initial_log_value().exp() - direct).abs() < 1e-14);
}

#[test]
fn martingale_value_uses_derivative_exponent() {
    let k = 2.0;
    let rho = 0.8;
    let z = Complex64::new(0.0, 0.5);
    let p = MartingaleParams::new(kappa(k), rho, z).unwrap();
    let g = Complex64::new(0.3, 1.1);
    let d = 2.5f64;
    let direct = d.powf((8.0 + 2.0 * k - rho) * rho / (8.0 * k)) * g.im.powf(-rho * rho / (8.0 * k)) * g.norm().powf(rho / k);
    assert!((martingale_value(&p, g, d.ln()).unwrap().exp() - direct).abs() < 1e-13);
    assert!(martingale_value(&p, Complex64::new(1.0, 0.0), 0.0).is_err());
}

#[test]
fn zero_rho_is_identically_one() {
    let p = MartingaleParams::new(kappa(2.0), 0.0, Complex64::new(0.2, 0.3)).unwrap();
    let settings = PathSettings { steps: 200, eta: 0.1 };
    let check = check_martingale(&p, 1.0, &settings, 50, 1, Mode::Sequential).unwrap();
    assert_eq!(check.mean_ratio, 1.0);
    assert_eq!(check.stderr, 0.0);
}

#[test]
fn martingale_mean_is_one() {
    let z = Complex64::new(0.3, 0.5);
    let p = MartingaleParams::new(kappa(2.0), 1.0, z).unwrap();
    let settings = PathSettings { steps: 2000, eta: 0.1 };
    let check = check_martingale(&p, 1.0, &settings, 4000, 11, Mode::Parallel).unwrap();
    let dev = (check.mean_ratio - 1.0).abs();
    assert!(dev < 4.0 * check.stderr + 0.01, "mean {} ± {}", check.mean_ratio, check.stderr);
}

#[test]
fn tilt_exponent_peaks_at_rho_opt() {
    for &(k, s) in &[(2.0, 0.3), (4.0, -0.2), (6.0, 0.5)] {
        let r = rho_opt(kappa(k), s).unwrap();
        let best = tilt_exponent(kappa(k), s, r);
        for d in [-0.5, -0.1, -1e-3, 1e-3, 0.1, 0.5] {
            assert!(tilt_exponent(kappa(k), s, r + d) < best);
        }
    }
}

#[test]
fn plain_monte_carlo_has_unit_weights() {
    let settings = TailSettings {
        c: 1e6,
        n_samples: 200,
        path: PathSettings { steps: 200, eta: 0.1 },
        ..TailSettings::default()
    };
    let est = tail_probability_mc(kappa(2.0), 0.0, Complex64::new(0.1, 0.1), &settings, Mode::Sequential).unwrap();
    assert_eq!(est.p_hat, est.n_hits as f64 / (est.n_samples - est.n_clipped) as f64);
    assert!(est.p_hat > 0.5 && est.p_hat <= 1.0);
}

#[test]
fn estimates_do_not_depend_on_mode() {
    let settings = TailSettings { n_samples: 300, path: PathSettings { steps: 300, eta: 0.1 }, seed: 9, ..TailSettings::default() };
    let z = Complex64::new(0.2, 0.05);
    let a = tail_probability_is(kappa(2.0), 0.3, z, &settings, Mode::Sequential).unwrap();
    let b = tail_probability_is(kappa(2.0), 0.3, z, &settings, Mode::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rejects_bad_inputs() {
    let settings = TailSettings::default();
    assert!(tail_probability_is(kappa(2.0), 1.5, Complex64::new(0.0, 0.1), &settings, Mode::Sequential).is_err());
    assert!(tail_probability_is(kappa(2.0), 0.1, Complex64::new(0.0, 1.5), &settings, Mode::Sequential).is_err());
    assert!(alpha_slope_fit(kappa(2.0), 0.1, &[0.1, 0.05, 0.02], 0.0, &settings, Mode::Sequential).is_err());
    assert!(alpha_slope_fit(kappa(2.0), 0.1, &[0.1, 0.08, 0.06, 0.02], 0.0, &settings, Mode::Sequential).is_err());
}
