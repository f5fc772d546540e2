//! Synthetic regression data.
//!
//! The bimodal design mixes a uniform cube `[0, 1]^dim` with a small, dense
//! component on `[2, 2.5]^dim` whose coordinates have density `4(5 − 2x)`.
//! The dense component is drawn with probability `n^γ/(n + n^γ)`, so it holds
//! a vanishing fraction of the sample as `n` grows.
//!
//! Draw order per row: one uniform to pick the component, then one uniform per
//! coordinate. [`make_dataset`] draws all rows first and then one standard
//! normal per row for the noise.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DVector;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernel::InputMatrix;
use crate::sketch::unit_uniform;
use crate::solver::empirical_sq_norm;

/// Support of the dense component, per coordinate.
pub const DENSE_SUPPORT: (f64, f64) = (2.0, 2.5);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimodalConfig {
    pub n: usize,
    pub gamma: f64,
    pub dim: usize,
}

impl BimodalConfig {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        let cfg = BimodalConfig { n, gamma, dim: 3 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.dim == 0 {
            return Err(Error::InvalidParameter(
                "bimodal config needs n >= 1 and dim >= 1".into(),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Probability that a row comes from the dense component, `n^γ/(n + n^γ)`.
    pub fn dense_weight(&self) -> f64 {
        let n = self.n as f64;
        let ng = libm::pow(n, self.gamma);
        ng / (n + ng)
    }
}

/// Inverse CDF of the density `4(5 − 2x)` on `[2, 2.5]`:
/// `F(x) = 4(5x − x² − 6)`, so `F⁻¹(u) = (5 − √(1 − u))/2`.
#[inline]
pub fn dense_component_inverse_cdf(u: f64) -> f64 {
    0.5 * (5.0 - libm::sqrt(1.0 - u))
}

/// CDF matching [`dense_component_inverse_cdf`], clamped outside the support.
pub fn dense_component_cdf(x: f64) -> f64 {
    if x <= DENSE_SUPPORT.0 {
        0.0
    } else if x >= DENSE_SUPPORT.1 {
        1.0
    } else {
        4.0 * (5.0 * x - x * x - 6.0)
    }
}

pub fn gen_bimodal<R: RngCore + ?Sized>(cfg: &BimodalConfig, rng: &mut R) -> Result<InputMatrix> {
    cfg.validate()?;
    let dense = cfg.dense_weight();
    let mut data = Vec::with_capacity(cfg.n * cfg.dim);
    for _ in 0..cfg.n {
        if unit_uniform(rng) < dense {
            for _ in 0..cfg.dim {
                data.push(dense_component_inverse_cdf(unit_uniform(rng)));
            }
        } else {
            for _ in 0..cfg.dim {
                data.push(unit_uniform(rng));
            }
        }
    }
    InputMatrix::from_row_major(cfg.n, cfg.dim, data)
}

/// `g(t) = 1.6·|(t − 0.4)(t − 0.6)| − t(t − 1)(t − 2) − 0.5`.
pub fn g_scalar(t: f64) -> f64 {
    1.6 * ((t - 0.4) * (t - 0.6)).abs() - t * (t - 1.0) * (t - 2.0) - 0.5
}

/// Regression target `f*(x) = g(‖x‖₂ / 3)`.
pub fn f_star(x: &[f64]) -> f64 {
    let norm = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
    g_scalar(norm / 3.0)
}

#[derive(Debug, Clone)]
pub struct RegressionDataset {
    pub x: InputMatrix,
    pub y: DVector<f64>,
    /// Noiseless target values (equal to `y` when unknown, e.g. real data).
    pub f_star: DVector<f64>,
    pub noise_sd: f64,
}

impl RegressionDataset {
    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }
}

/// Bimodal inputs, `f*` values and `Y = f* + N(0, noise_sd²)`.
pub fn make_dataset<R: RngCore + ?Sized>(
    cfg: &BimodalConfig,
    noise_sd: f64,
    rng: &mut R,
) -> Result<RegressionDataset> {
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise_sd must be non-negative, got {noise_sd}"
        )));
    }
    let x = gen_bimodal(cfg, rng)?;
    let f = DVector::from_iterator(x.nrows(), x.rows().map(f_star));
    let mut y = f.clone();
    for v in y.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v += noise_sd * z;
    }
    Ok(RegressionDataset {
        x,
        y,
        f_star: f,
        noise_sd,
    })
}

/// Two far-apart clusters: a tight cluster of `n − isolated` points and
/// `isolated` singleton points.
///
/// Under a Gaussian kernel with unit bandwidth and the default separation,
/// cross-cluster kernel values underflow to exactly zero, so `K` is
/// block-diagonal. Each singleton is its own block: an eigenvalue `1/n` of `K/n`
/// whose eigenvector is a coordinate vector. Whenever `δ < 1/n` that eigenvector
/// sits in the top `d_δ` block, so uniform sampling sees incoherence
/// `M ≥ n·(1/n)/(1/n + δ) > n/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoClusterConfig {
    pub n: usize,
    pub isolated: usize,
    /// Half-width of the cube holding the tight cluster.
    pub extent: f64,
    /// Spacing between the tight cluster and successive singletons.
    pub separation: f64,
}

impl Default for TwoClusterConfig {
    fn default() -> Self {
        TwoClusterConfig {
            n: 64,
            isolated: 1,
            extent: 0.1,
            separation: 100.0,
        }
    }
}

/// Deterministic inputs in `R³` for [`TwoClusterConfig`].
///
/// The tight cluster follows the additive recurrence with the plastic-number
/// generalization of the golden ratio, which spreads points evenly in the cube.
pub fn two_cluster_inputs(cfg: &TwoClusterConfig) -> Result<InputMatrix> {
    if cfg.isolated >= cfg.n {
        return Err(Error::InvalidParameter(format!(
            "isolated count {} must be below n = {}",
            cfg.isolated, cfg.n
        )));
    }
    if !(cfg.extent > 0.0 && cfg.separation > 0.0) {
        return Err(Error::InvalidParameter(
            "extent and separation must be positive".into(),
        ));
    }
    // root of x⁴ = x + 1 generalizes φ to three dimensions
    const PHI3: f64 = 1.220_744_084_605_759_5;
    let alpha = [1.0 / PHI3, 1.0 / (PHI3 * PHI3), 1.0 / (PHI3 * PHI3 * PHI3)];
    let tight = cfg.n - cfg.isolated;
    let mut data = Vec::with_capacity(cfg.n * 3);
    for i in 0..tight {
        for a in alpha {
            let frac = (0.5 + a * (i + 1) as f64) % 1.0;
            data.push(cfg.extent * (2.0 * frac - 1.0));
        }
    }
    for k in 0..cfg.isolated {
        data.extend_from_slice(&[cfg.separation * (k + 1) as f64, 0.0, 0.0]);
    }
    InputMatrix::from_row_major(cfg.n, 3, data)
}

/// Random train/test partition of `0..n`.
///
/// The test split holds `round(n·test_fraction)` rows, clamped to `[1, n − 1]`.
/// Indices come from a Fisher–Yates shuffle driven by [`unit_uniform`]; both
/// halves are returned in ascending order.
pub fn split_indices<R: RngCore + ?Sized>(
    n: usize,
    test_fraction: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 rows to split, got {n}"
        )));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = ((unit_uniform(rng) * (i + 1) as f64) as usize).min(i);
        order.swap(i, j);
    }
    let n_test = libm::round(n as f64 * test_fraction).clamp(1.0, (n - 1) as f64) as usize;
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Per-column scale factors `1/sd` giving unit (population) variance on `x`.
///
/// Errors on a constant column.
pub fn unit_variance_factors(x: &InputMatrix) -> Result<Vec<f64>> {
    let n = x.nrows() as f64;
    let mut factors = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let col: Vec<f64> = x.rows().map(|r| r[j]).collect();
        let mean = col.iter().sum::<f64>() / n;
        let centered: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let zeros = alloc::vec![0.0; col.len()];
        let var = empirical_sq_norm(&centered, &zeros)?;
        if var.is_nan() || var <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "feature column {j} has zero variance"
            )));
        }
        factors.push(1.0 / libm::sqrt(var));
    }
    Ok(factors)
}

/// Splits `data` and rescales features by training-split standard deviations.
pub fn split_and_normalize<R: RngCore + ?Sized>(
    data: &RegressionDataset,
    test_fraction: f64,
    rng: &mut R,
) -> Result<(RegressionDataset, RegressionDataset)> {
    let (train_idx, test_idx) = split_indices(data.len(), test_fraction, rng)?;
    let subset = |idx: &[usize]| -> Result<RegressionDataset> {
        Ok(RegressionDataset {
            x: data.x.select_rows(idx)?,
            y: DVector::from_iterator(idx.len(), idx.iter().map(|&i| data.y[i])),
            f_star: DVector::from_iterator(idx.len(), idx.iter().map(|&i| data.f_star[i])),
            noise_sd: data.noise_sd,
        })
    };
    let mut train = subset(&train_idx)?;
    let mut test = subset(&test_idx)?;
    let factors = unit_variance_factors(&train.x)?;
    train.x.scale_columns(&factors)?;
    test.x.scale_columns(&factors)?;
    Ok((train, test))
}
