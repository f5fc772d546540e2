//! Exact and sketched kernel ridge regression.
//!
//! Exact KRR solves `(K + nλI)·α = Y` and predicts `f̂(x) = k(x, X)·α`.
//!
//! The sketched estimator restricts the dual coefficients to the range of `S`:
//! with `C = K·S` it solves
//!
//! ```text
//! (CᵀC + nλ·SᵀKS)·β = CᵀY
//! ```
//!
//! and predicts `f̂_S(x) = k(x, X)·(S·β)`. `S·β` is cached at fit time so both
//! fits predict through the same `n`-vector of dual weights.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::kernel::{cross_gram, cross_row, InputMatrix, KernelSpec};
use crate::linalg::{solve_spd, solve_spd_jittered, symmetrize};
use crate::sketch::SketchMatrix;

/// Common view of a fitted estimator.
pub trait KrrFit {
    /// Weights `w` with `f̂(x) = Σ_i w_i k(x, x_i)`.
    fn dual_weights(&self) -> &DVector<f64>;
    /// `f̂(x_i)` for the training inputs.
    fn fitted(&self) -> &DVector<f64>;
    fn lambda(&self) -> f64;
}

#[derive(Debug, Clone)]
pub struct ExactFit {
    pub alpha: DVector<f64>,
    pub lambda: f64,
    fitted: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct SketchedFit {
    pub beta: DVector<f64>,
    pub sketch: SketchMatrix,
    /// Cached `S·β`.
    pub s_beta: DVector<f64>,
    pub lambda: f64,
    /// True when the system needed diagonal jitter to factor.
    pub jittered: bool,
    fitted: DVector<f64>,
}

impl KrrFit for ExactFit {
    fn dual_weights(&self) -> &DVector<f64> {
        &self.alpha
    }
    fn fitted(&self) -> &DVector<f64> {
        &self.fitted
    }
    fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl KrrFit for SketchedFit {
    fn dual_weights(&self) -> &DVector<f64> {
        &self.s_beta
    }
    fn fitted(&self) -> &DVector<f64> {
        &self.fitted
    }
    fn lambda(&self) -> f64 {
        self.lambda
    }
}

fn check_inputs(k: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<()> {
    check_dim("kernel matrix columns", k.nrows(), k.ncols())?;
    check_dim("response length", k.nrows(), y.len())?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    check_finite("kernel matrix", k.as_slice())?;
    check_finite("response", y.as_slice())
}

/// Exact KRR via a Cholesky factorization of `K + nλI`.
pub fn fit_exact(k: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<ExactFit> {
    check_inputs(k, y, lambda)?;
    let n = k.nrows();
    let mut a = k.clone();
    let shift = n as f64 * lambda;
    for i in 0..n {
        a[(i, i)] += shift;
    }
    let alpha = solve_spd(a, y).ok_or(Error::NotPositiveDefinite)?;
    let fitted = k * &alpha;
    Ok(ExactFit {
        alpha,
        lambda,
        fitted,
    })
}

/// Sketched KRR with sketch `S` (n × d).
///
/// Forms `C = K·S` through the sketch's own product, so structured sketches
/// never touch more of `K` than the selected columns.
pub fn fit_sketched(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    sketch: &SketchMatrix,
) -> Result<SketchedFit> {
    check_inputs(k, y, lambda)?;
    let n = k.nrows();
    let c = sketch.right_multiply(k)?;
    let mut sks = sketch.transpose_apply(&c)?;
    symmetrize(&mut sks);
    let mut a = c.tr_mul(&c);
    a += sks * (n as f64 * lambda);
    let b = c.tr_mul(y);
    let (beta, jittered) = solve_spd_jittered(a, &b)?;
    let s_beta = sketch.apply(&beta)?;
    let fitted = &c * &beta;
    Ok(SketchedFit {
        beta,
        sketch: sketch.clone(),
        s_beta,
        lambda,
        jittered,
        fitted,
    })
}

/// `f̂(x)` for a single query point.
pub fn predict<F: KrrFit + ?Sized>(
    fit: &F,
    kernel: &KernelSpec,
    train: &InputMatrix,
    point: &[f64],
) -> Result<f64> {
    check_dim(
        "fit weights vs training rows",
        train.nrows(),
        fit.dual_weights().len(),
    )?;
    Ok(cross_row(kernel, point, train)?.dot(fit.dual_weights()))
}

/// `f̂` at every row of `queries`.
pub fn predict_batch<F: KrrFit + ?Sized>(
    fit: &F,
    kernel: &KernelSpec,
    train: &InputMatrix,
    queries: &InputMatrix,
) -> Result<DVector<f64>> {
    check_dim(
        "fit weights vs training rows",
        train.nrows(),
        fit.dual_weights().len(),
    )?;
    Ok(cross_gram(kernel, queries, train)? * fit.dual_weights())
}

/// In-sample predictions `f̂(x_1), …, f̂(x_n)`, computed at fit time.
pub fn in_sample<F: KrrFit + ?Sized>(fit: &F) -> &DVector<f64> {
    fit.fitted()
}

/// `(1/n)·Σ (u_i − v_i)²`.
pub fn empirical_sq_norm(u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim("empirical norm operands", u.len(), v.len())?;
    if u.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = u
        .iter()
        .zip(v)
        .map(|(a, b)| {
            let t = a - b;
            t * t
        })
        .sum();
    Ok(total / u.len() as f64)
}
