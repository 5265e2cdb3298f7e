use arexit::ldp::chernoff_exit_probability_bound;
use arexit::mc::{estimate_exit_probability, estimate_mean_exit_time, PathSeed};
use arexit::{ArModel, ExitSpec, Matrix, McConfig, Vector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Standard normal upper tail by composite Simpson quadrature of the density
/// over [x, x + 40].
fn normal_upper_tail(x: f64) -> f64 {
    let n = 400_000;
    let h = 40.0 / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = pdf(x) + pdf(x + 40.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * pdf(x + i as f64 * h);
    }
    acc * h / 3.0
}

fn bivariate_model(eps: f64) -> (ArModel, ExitSpec) {
    let a = Matrix::from_rows(&[vec![0.8, 1.0], vec![0.0, 0.5]]).unwrap();
    (
        ArModel::at_origin(a, eps).unwrap(),
        ExitSpec::two_sided(Vector::new(vec![1.0, 1.0]).unwrap()).unwrap(),
    )
}

#[test]
fn quadrature_tail_reference() {
    assert!((normal_upper_tail(2.5) - 0.006_209_665_325_776_132).abs() < 1e-12);
}

#[test]
fn white_noise_exit_time_is_geometric() {
    let exit = ExitSpec::two_sided(Vector::new(vec![1.0]).unwrap()).unwrap();
    for eps in [0.5, 0.4, 1.0] {
        let model = ArModel::at_origin(Matrix::zeros(1, 1), eps).unwrap();
        let cfg = McConfig {
            n_paths: 20_000,
            seed: 7,
            ..McConfig::default()
        };
        let est = estimate_mean_exit_time(&model, &exit, &cfg).unwrap();
        let expected = 1.0 / (2.0 * normal_upper_tail(1.0 / eps));
        assert!(
            (est.mean_tau - expected).abs() <= 3.0 * est.std_error,
            "eps {eps}: {} vs {expected} (se {})",
            est.mean_tau,
            est.std_error
        );
    }
}

#[test]
fn normal_sampler_moments() {
    let mut rng = PathSeed::new(2024, 3).rng();
    let n = 10_000_000;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        sum += z;
        sum_sq += z * z;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = sum_sq / nf - mean * mean;
    assert!(mean.abs() < 4.0 / nf.sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 4.0 * (2.0 / nf).sqrt(), "var {var}");
}

#[test]
fn distinct_streams_are_distinct() {
    let draw = |seed, path| -> Vec<u64> {
        let mut r = PathSeed::new(seed, path).rng();
        (0..4).map(|_| r.random()).collect()
    };
    assert_ne!(draw(1, 0), draw(1, 1));
    assert_ne!(draw(1, 0), draw(2, 0));
    assert_eq!(draw(5, 9), draw(5, 9));
}

#[test]
fn different_seeds_give_consistent_estimates() {
    let (model, exit) = bivariate_model(0.10);
    let run = |seed| {
        let cfg = McConfig {
            n_paths: 1000,
            seed,
            ..McConfig::default()
        };
        estimate_mean_exit_time(&model, &exit, &cfg).unwrap()
    };
    let a = run(1);
    let b = run(2);
    assert_ne!(a.mean_tau, b.mean_tau);
    assert!(a.ci_low <= b.ci_high && b.ci_low <= a.ci_high, "{a:?} vs {b:?}");
    assert_eq!(run(1), a);
}

#[test]
fn chernoff_bound_dominates_small_noise_exit_frequency() {
    let (model, exit) = bivariate_model(0.05);
    let sigma2 = 1213.0 / 81.0;
    let n_steps = 10_000;
    let cfg = McConfig {
        n_paths: 1000,
        seed: 99,
        ..McConfig::default()
    };
    let p = estimate_exit_probability(&model, &exit, n_steps, &cfg).unwrap();
    let bound = chernoff_exit_probability_bound(n_steps, 0.05, sigma2).unwrap().min(1.0);
    assert!(bound < 0.05);
    assert!(p.probability <= bound + 3.0 * p.std_error);
}

#[test]
fn mean_estimate_invariants() {
    let (model, exit) = bivariate_model(0.12);
    let cfg = McConfig {
        n_paths: 500,
        seed: 3,
        ..McConfig::default()
    };
    let est = estimate_mean_exit_time(&model, &exit, &cfg).unwrap();
    assert_eq!(est.censored, 0);
    assert!(est.ci_low <= est.mean_tau && est.mean_tau <= est.ci_high);
    assert!((est.scaled_log - 0.0144 * est.mean_tau.ln()).abs() < 1e-12);
}
