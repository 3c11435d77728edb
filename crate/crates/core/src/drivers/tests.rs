use super::*;
use crate::numeric::{sample_stats, skew_kurtosis};
use std::f64::consts::PI;

fn kappa(k: f64) -> Kappa {
    Kappa::new(k).unwrap()
}

#[test]
fn brownian_variance_matches_scaling() {
    let k = kappa(2.0);
    let ratios: Vec<f64> = (0..10_000)
        .map(|seed| {
            let d = brownian_driver(k, 1.5, 50, seed).unwrap();
            d.values().last().unwrap().powi(2) / (2.0 * 1.5)
        })
        .collect();
    let m = sample_stats(&ratios).mean;
    assert!((0.97..=1.03).contains(&m), "{m}");
}

#[test]
fn brownian_replay_is_bit_identical() {
    let a = brownian_driver(kappa(8.0 / 3.0), 1.0, 500, 99).unwrap();
    let b = brownian_driver(kappa(8.0 / 3.0), 1.0, 500, 99).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, brownian_driver(kappa(8.0 / 3.0), 1.0, 500, 100).unwrap());
}

#[test]
fn brownian_increments_are_symmetric() {
    let d = brownian_driver(kappa(1.0), 1.0, 1_000_000, 3).unwrap();
    let inc: Vec<f64> = d.values().windows(2).map(|w| w[1] - w[0]).collect();
    let (skew, _) = skew_kurtosis(&inc);
    assert!(skew.abs() < 0.05, "{skew}");
}

#[test]
fn zero_weight_sle_equals_brownian() {
    let cfg = SdeConfig {
        kappa: kappa(2.0),
        weights: vec![0.0],
        force_points: vec![Complex64::new(1.0, 0.0)],
        horizon: 1.0,
        steps: 400,
        seed: 12,
    };
    let p = sle_kappa_rho_driver(&cfg).unwrap();
    assert_eq!(p.driver, brownian_driver(kappa(2.0), 1.0, 400, 12).unwrap());
    let r = reverse_sle_kappa_rho_driver(&SdeConfig { force_points: vec![Complex64::new(0.5, 0.1)], ..cfg }).unwrap();
    assert_eq!(r.driver, brownian_driver(kappa(2.0), 1.0, 400, 12).unwrap());
}

#[test]
fn repelling_force_point_never_collides() {
    let mut blow_ups = 0;
    for seed in 0..100 {
        let cfg = SdeConfig {
            kappa: kappa(2.0),
            weights: vec![6.0],
            force_points: vec![Complex64::new(0.05, 0.0)],
            horizon: 1.0,
            steps: 2000,
            seed,
        };
        let p = sle_kappa_rho_driver(&cfg).unwrap();
        blow_ups += p.blow_up.is_some() as usize;
        assert!(p.force_paths[0].iter().all(|v| v.im == 0.0));
    }
    assert_eq!(blow_ups, 0);
}

#[test]
fn reverse_force_point_rises_and_obeys_height_bound() {
    let z0 = Complex64::new(0.5, 0.01);
    for seed in 0..20 {
        let cfg = SdeConfig {
            kappa: kappa(2.0),
            weights: vec![2.0],
            force_points: vec![z0],
            horizon: 1.0,
            steps: 5000,
            seed,
        };
        let p = reverse_sle_kappa_rho_driver(&cfg).unwrap();
        let path = &p.force_paths[0];
        for (k, w) in path.windows(2).enumerate() {
            assert!(w[1].im > w[0].im, "seed {seed} step {k}");
        }
        let t = p.driver.horizon();
        let last = path.last().unwrap();
        assert!(last.im * last.im - z0.im * z0.im <= 4.0 * t + 1e-12);
    }
}

#[test]
fn theta_drift_vanishes_at_half_pi() {
    let mut rng = stream(0, 0);
    let th = theta_increment(PI / 2.0, 0.1, 0.0, 2f64.sqrt(), 2.0, 0, &mut rng);
    assert!((th - PI / 2.0).abs() < 1e-15);
}

#[test]
fn theta_stays_inside_and_is_symmetric() {
    let p = theta_process_with(kappa(2.0), 2.0, 0.3, 5000.0, 200_000, 4, &mut stream(5, 0)).unwrap();
    assert!(p.theta.iter().all(|&t| t > 0.0 && t < PI));
    let burn = p.theta.len() / 5;
    let mean_cos = p.theta[burn..].iter().map(|t| t.cos()).sum::<f64>() / (p.theta.len() - burn) as f64;
    assert!(mean_cos.abs() < 0.02, "{mean_cos}");
}

#[test]
fn theta_with_strong_boundary_pull_stays_inside() {
    // β close to −1: the law piles up near the endpoints
    let p = theta_process(kappa(4.0), 5.5, 0.1, 200.0, 100_000, 8).unwrap();
    assert!(p.theta.iter().all(|&t| t > 0.0 && t < PI));
}

#[test]
fn stationary_density_normalisation() {
    let k = kappa(2.0);
    // β = 0
    assert!((theta_stationary_density(k, 4.0, 1.0).unwrap() - 1.0 / PI).abs() < 1e-12);
    // β = 2
    let d = theta_stationary_density(k, 2.0, PI / 2.0).unwrap();
    assert!((d - 2.0 / PI).abs() < 1e-12);
    assert!(theta_stationary_density(kappa(1.0), 4.5, 1.0).is_err());
    for rho in [-1.0, 0.5, 2.0, 3.5] {
        let law = ThetaStationary::new(k, rho).unwrap();
        let total = crate::numeric::tanh_sinh(|t| law.density(t), 0.0, PI, 1e-12).unwrap();
        assert!((total - 1.0).abs() < 1e-8);
        // C = Γ(β/2 + 1)/(√π Γ((β + 1)/2))
        let beta = law.beta();
        let expected = statrs::function::gamma::gamma(beta / 2.0 + 1.0)
            / (PI.sqrt() * statrs::function::gamma::gamma((beta + 1.0) / 2.0));
        assert!((law.normalisation() - expected).abs() < 1e-10 * expected, "{rho}");
    }
}

#[test]
fn stationary_cdf_matches_closed_form_for_beta_two() {
    let law = ThetaStationary::new(kappa(2.0), 2.0).unwrap();
    for t in [0.01f64, 0.5, 1.0, 2.0, 3.1] {
        let exact = (t - t.sin() * t.cos()) / PI;
        assert!((law.cdf(t) - exact).abs() < 1e-7);
    }
}

#[test]
fn transient_bessel_never_hits_zero() {
    let hits = (0..1000).filter(|&seed| bessel_process(3.0, 1.0, 1.0, 1000, seed).unwrap().hit_time.is_some()).count();
    assert_eq!(hits, 0);
}

#[test]
fn one_dimensional_bessel_second_moment() {
    let finals: Vec<f64> =
        (0..10_000).map(|seed| bessel_process(1.0, 1.0, 1.0, 500, seed).unwrap().values.last().unwrap().powi(2)).collect();
    let st = sample_stats(&finals);
    assert!((st.mean - 2.0).abs() < 3.0 * st.stderr, "{} ± {}", st.mean, st.stderr);
    let some_hit = (0..50).any(|seed| bessel_process(1.0, 0.1, 1.0, 1000, seed).unwrap().hit_time.is_some());
    assert!(some_hit);
}

#[test]
fn xy_height_bound_and_constant_case() {
    let k = kappa(2.0);
    let z0 = Complex64::new(0.5, 0.01);
    for rho in [2.0, 3.0, -1.0] {
        let p = xy_process(k, rho, z0, 1.0, 10_000, 4).unwrap();
        for (t, y) in p.times.iter().zip(&p.y) {
            assert!(y * y <= z0.im * z0.im + 4.0 * t + 1e-12);
            assert!(*y > 0.0);
        }
        assert!(p.y.windows(2).all(|w| w[1] >= w[0]));
        if rho == 2.0 {
            let mut b = 0.0;
            for (x, db) in p.x.iter().skip(1).zip(&p.increments) {
                b += db;
                assert!((x - (z0.re - 2f64.sqrt() * b)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn bessel_dominates_force_point() {
    let k = kappa(2.0);
    for rho in [2.0, 3.0, 4.0] {
        let nu = dominating_nu(k, rho);
        for seed in 0..50 {
            let mut rng = stream(seed, 0);
            let c = coupled_bessel_domination(k, rho, nu, Complex64::new(0.5, 0.01), 1.0, 5000, &mut rng).unwrap();
            assert!(c.dominated(), "rho {rho} seed {seed}");
        }
    }
}
