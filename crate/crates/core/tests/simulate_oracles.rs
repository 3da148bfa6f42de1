mod common;

use common::*;
use forecast_dominance::gaussian::GaussianPairParams;
use forecast_dominance::simulate::{
    draw_linear_model, gen_ar1_horizons, gen_gaussian_pair, gen_linear_model, gen_sum_components,
    trivariate_covariance, ComponentDistribution, LinearForecaster, LinearModelConfig,
};
use forecast_dominance::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mean_square(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

#[test]
fn sum_components_population_moments() {
    let n = 100_000;
    let s = gen_sum_components(ComponentDistribution::Normal { sigma: 1.0 }, n, 1).unwrap();
    let (y, a, b) = (s.y(), s.track("A").unwrap(), s.track("B").unwrap());
    // a Gaussian sample second moment with scale v has standard error v·√(2/n)
    let se = |v: f64| v * (2.0 / n as f64).sqrt();
    for (got, want) in [
        (var(a), 2.0),
        (var(b), 1.0),
        (mean_square(a, y), 2.0),
        (mean_square(b, y), 3.0),
    ] {
        assert!((got - want).abs() <= 3.0 * se(want), "{got} vs {want}");
    }
}

#[test]
fn ar1_forecast_variances() {
    let (a, sigma) = (0.9f64, 1.0f64);
    let s = gen_ar1_horizons(a, sigma, 2, 100_000, 2).unwrap();
    let va = a * a * sigma * sigma / (1.0 - a * a);
    let vb = a.powi(4) * sigma * sigma / (1.0 - a * a);
    assert!((va - 4.263).abs() < 1e-3 && (vb - 3.453).abs() < 1e-3);
    assert!((var(s.track("A").unwrap()) / va - 1.0).abs() < 0.05);
    assert!((var(s.track("B").unwrap()) / vb - 1.0).abs() < 0.05);
}

#[test]
fn gaussian_pair_correlations() {
    let n = 100_000;
    let a = GaussianPairParams::new(1.0, 1.0, 0.8, 1.5, 0.7).unwrap();
    let b = GaussianPairParams::new(1.0, 1.0, 1.3, 1.5, 0.2).unwrap();
    let cross = 0.35;
    let s = gen_gaussian_pair(&a, &b, cross, n, 3).unwrap();
    let (y, xa, xb) = (s.y(), s.track("A").unwrap(), s.track("B").unwrap());
    let se = |r: f64| (1.0 - r * r) / (n as f64).sqrt();
    for (got, want) in [(corr(y, xa), 0.7), (corr(y, xb), 0.2), (corr(xa, xb), cross)] {
        assert!((got - want).abs() <= 3.0 * se(want), "{got} vs {want}");
    }
}

#[test]
fn gaussian_pair_accepts_exactly_the_semidefinite_requests() {
    let a = GaussianPairParams::new(0.0, 0.0, 1.0, 1.0, 0.9).unwrap();
    let b = a;
    let cov = trivariate_covariance(&a, &b, -0.9).unwrap();
    assert!(cov.symmetric_eigenvalues().min() < 0.0);
    assert!(matches!(gen_gaussian_pair(&a, &b, -0.9, 10, 0), Err(Error::NotPositiveDefinite)));

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..2000 {
        let pa = GaussianPairParams::new(0.0, 0.0, rng.gen_range(0.5..2.0), 1.0, rng.gen_range(-1.0..1.0)).unwrap();
        let pb = GaussianPairParams::new(0.0, 0.0, rng.gen_range(0.5..2.0), 1.0, rng.gen_range(-1.0..1.0)).unwrap();
        let cross = rng.gen_range(-1.0..1.0);
        let min_eig = trivariate_covariance(&pa, &pb, cross).unwrap().symmetric_eigenvalues().min();
        if min_eig.abs() < 1e-9 {
            continue;
        }
        assert_eq!(gen_gaussian_pair(&pa, &pb, cross, 5, 0).is_ok(), min_eig > 0.0, "{min_eig}");
    }
}

#[test]
fn noisier_training_targets_give_larger_errors() {
    let cfg = LinearModelConfig {
        p: 5,
        n_train: 200,
        sigma_eps: 1.0,
        forecaster_a: LinearForecaster::ols(),
        forecaster_b: LinearForecaster::ols().with_noise_scale(2.0),
    };
    let mut ordered = 0;
    for seed in 0..100 {
        let s = gen_linear_model(&cfg, 10_000, seed).unwrap();
        let y = s.y();
        if mean_square(s.track("A").unwrap(), y) <= mean_square(s.track("B").unwrap(), y) {
            ordered += 1;
        }
    }
    assert!(ordered >= 95, "{ordered} of 100");
}

#[test]
fn scalar_ols_estimator_variance() {
    let n_train = 100;
    let sigma = 1.5;
    let cfg = LinearModelConfig {
        p: 1,
        n_train,
        sigma_eps: sigma,
        forecaster_a: LinearForecaster::ols(),
        forecaster_b: LinearForecaster::ridge(0.0),
    };
    let errors: Vec<f64> = (0..10_000)
        .map(|seed| {
            let d = draw_linear_model(&cfg, 1, seed).unwrap();
            assert!((d.beta_hat_a[0] - d.beta_hat_b[0]).abs() < 1e-12);
            d.beta_hat_a[0] - d.beta[0]
        })
        .collect();
    // E[1/Σz²] = 1/(n − 2) for a chi-square sum of n squares
    let want = sigma * sigma / (n_train as f64 - 2.0);
    let got = errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64;
    assert!((got / want - 1.0).abs() < 0.05, "{got} vs {want}");
}
