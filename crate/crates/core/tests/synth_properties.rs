mod common;

use common::{normal_matrix, rng};
use proptest::prelude::*;
use sketchkrr_core::sketch::unit_uniform;
use sketchkrr_core::synth::{
    dense_component_cdf, dense_component_inverse_cdf, f_star, gen_bimodal, make_dataset,
    split_and_normalize, split_indices, BimodalConfig, RegressionDataset,
};
use sketchkrr_core::{DVector, InputMatrix};

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[test]
fn inverse_cdf_sampler_matches_density() {
    let mut r = rng(10);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| dense_component_inverse_cdf(unit_uniform(&mut r)))
        .collect();
    let ks = ks_statistic(draws, |x| 4.0 * (5.0 * x - x * x - 6.0));
    assert!(ks < 0.01, "KS = {ks}");
}

#[test]
fn mixture_proportion_within_binomial_bound() {
    let cfg = BimodalConfig::new(4000, 0.6).unwrap();
    let x = gen_bimodal(&cfg, &mut rng(11)).unwrap();
    let dense = x
        .rows()
        .filter(|r| r.iter().all(|v| (2.0..=2.5).contains(v)))
        .count() as f64;
    let p = cfg.dense_weight();
    let n = cfg.n as f64;
    let sd = (n * p * (1.0 - p)).sqrt();
    assert!(
        (dense - n * p).abs() <= 3.0 * sd,
        "{dense} dense rows vs {}",
        n * p
    );
}

#[test]
fn noise_variance_matches() {
    let cfg = BimodalConfig::new(10_000, 0.6).unwrap();
    let ds = make_dataset(&cfg, 0.5, &mut rng(12)).unwrap();
    let eps: Vec<f64> = (0..cfg.n).map(|i| ds.y[i] - ds.f_star[i]).collect();
    let n = eps.len() as f64;
    let mean = eps.iter().sum::<f64>() / n;
    let var = eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = 0.25 * (2.0 / (n - 1.0)).sqrt();
    assert!((var - 0.25).abs() <= 3.0 * se, "noise variance {var}");
}

#[test]
fn cdf_is_monotone_on_support() {
    let mut last = 0.0;
    for i in 0..=100 {
        let f = dense_component_cdf(2.0 + 0.005 * i as f64);
        assert!(f >= last);
        last = f;
    }
    assert!((last - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn f_star_rotation_invariant(seed in any::<u64>(), scale in 0.0f64..4.0) {
        let mut r = rng(seed);
        let q = normal_matrix(3, 3, &mut r).qr().q();
        let x = normal_matrix(3, 1, &mut r) * scale;
        let qx = &q * &x;
        prop_assert!((f_star(x.as_slice()) - f_star(qx.as_slice())).abs() <= 1e-12);
    }

    #[test]
    fn split_is_a_partition(n in 2usize..300, frac in 0.01f64..0.99, seed in any::<u64>()) {
        let (train, test) = split_indices(n, frac, &mut rng(seed)).unwrap();
        let (again_train, again_test) = split_indices(n, frac, &mut rng(seed)).unwrap();
        prop_assert_eq!(&train, &again_train);
        prop_assert_eq!(&test, &again_test);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert!(!train.is_empty() && !test.is_empty());
    }
}

#[test]
fn normalization_gives_unit_training_variance() {
    let mut r = rng(13);
    let n = 50;
    let data: Vec<f64> = (0..n * 3)
        .map(|i| unit_uniform(&mut r) * (1 + i % 3) as f64 * 7.0)
        .collect();
    let ds = RegressionDataset {
        x: InputMatrix::from_row_major(n, 3, data).unwrap(),
        y: DVector::from_fn(n, |i, _| i as f64),
        f_star: DVector::from_fn(n, |i, _| i as f64),
        noise_sd: 0.0,
    };
    let (train, test) = split_and_normalize(&ds, 0.2, &mut rng(14)).unwrap();
    assert_eq!((train.len(), test.len()), (40, 10));
    for j in 0..3 {
        let col: Vec<f64> = train.x.rows().map(|row| row[j]).collect();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64;
        assert!((var - 1.0).abs() <= 1e-10, "column {j} variance {var}");
    }
}
