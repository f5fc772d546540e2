#![allow(dead_code)]

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sketchkrr_core::DMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix<R: RngCore>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `B Bᵀ / cols + ridge·I`, strictly positive definite for `ridge > 0`.
pub fn random_spd<R: RngCore>(n: usize, cols: usize, ridge: f64, rng: &mut R) -> DMatrix<f64> {
    let b = normal_matrix(n, cols, rng);
    let mut k = &b * b.transpose() / cols as f64;
    for i in 0..n {
        k[(i, i)] += ridge;
    }
    k
}

pub fn random_symmetric<R: RngCore>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = normal_matrix(n, n, rng);
    (&a + a.transpose()) * 0.5
}

pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.norm().max(f64::MIN_POSITIVE);
    (a - b).norm() / scale
}
