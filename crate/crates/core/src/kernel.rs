//! Stationary kernels and empirical kernel matrices.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, check_finite, Error, Result};

/// Matérn smoothness values with closed-form kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// ν = 1/2 (exponential kernel)
    Half,
    /// ν = 3/2
    ThreeHalves,
    /// ν = 5/2
    FiveHalves,
}

impl Smoothness {
    pub fn from_nu(nu: f64) -> Result<Self> {
        if nu == 0.5 {
            Ok(Smoothness::Half)
        } else if nu == 1.5 {
            Ok(Smoothness::ThreeHalves)
        } else if nu == 2.5 {
            Ok(Smoothness::FiveHalves)
        } else {
            Err(Error::InvalidParameter(format!(
                "matern smoothness must be 0.5, 1.5 or 2.5, got {nu}"
            )))
        }
    }

    pub fn nu(self) -> f64 {
        match self {
            Smoothness::Half => 0.5,
            Smoothness::ThreeHalves => 1.5,
            Smoothness::FiveHalves => 2.5,
        }
    }
}

/// Kernel family and hyperparameters.
///
/// Both families are radial and normalized so that `k(x, x) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `exp(-‖x − y‖² / (2σ²))`
    Gaussian { bandwidth: f64 },
    /// Matérn kernel with lengthscale `ℓ` and half-integer smoothness.
    Matern {
        lengthscale: f64,
        smoothness: Smoothness,
    },
}

fn check_scale(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        check_scale("bandwidth", bandwidth)?;
        Ok(KernelSpec::Gaussian { bandwidth })
    }

    pub fn matern(lengthscale: f64, nu: f64) -> Result<Self> {
        check_scale("lengthscale", lengthscale)?;
        Ok(KernelSpec::Matern {
            lengthscale,
            smoothness: Smoothness::from_nu(nu)?,
        })
    }

    /// Re-checks the scale invariants (useful for values built with struct syntax).
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { bandwidth } => check_scale("bandwidth", bandwidth),
            KernelSpec::Matern { lengthscale, .. } => check_scale("lengthscale", lengthscale),
        }
    }

    /// Kernel value as a function of the squared distance.
    #[inline]
    pub fn eval_sq_dist(&self, sq_dist: f64) -> f64 {
        match *self {
            KernelSpec::Gaussian { bandwidth } => {
                libm::exp(-sq_dist / (2.0 * bandwidth * bandwidth))
            }
            KernelSpec::Matern {
                lengthscale,
                smoothness,
            } => {
                let r = libm::sqrt(sq_dist) / lengthscale;
                match smoothness {
                    Smoothness::Half => libm::exp(-r),
                    Smoothness::ThreeHalves => {
                        let s = SQRT_3 * r;
                        (1.0 + s) * libm::exp(-s)
                    }
                    Smoothness::FiveHalves => {
                        let s = SQRT_5 * r;
                        (1.0 + s + s * s / 3.0) * libm::exp(-s)
                    }
                }
            }
        }
    }
}

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_5: f64 = 2.236_067_977_499_79;

/// Row-major sample matrix: row `i` is the input `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl InputMatrix {
    /// Builds from row-major data. Requires at least one row and finite entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "input matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        check_dim("input matrix data length", rows * cols, data.len())?;
        check_finite("input matrix", &data)?;
        Ok(InputMatrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_dim("input matrix row", cols, row.as_ref().len())?;
            data.extend_from_slice(row.as_ref());
        }
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New matrix holding the selected rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::InvalidParameter(format!(
                    "row index {i} out of range for {} rows",
                    self.rows
                )));
            }
            data.extend_from_slice(self.row(i));
        }
        Self::from_row_major(indices.len(), self.cols, data)
    }

    /// Multiplies column `j` by `factors[j]`.
    pub fn scale_columns(&mut self, factors: &[f64]) -> Result<()> {
        check_dim("column scale factors", self.cols, factors.len())?;
        check_finite("column scale factors", factors)?;
        for row in self.data.chunks_exact_mut(self.cols) {
            for (v, f) in row.iter_mut().zip(factors) {
                *v *= f;
            }
        }
        Ok(())
    }
}

#[inline]
fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let t = a - b;
            t * t
        })
        .sum()
}

/// Evaluates `k(x, y)`.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim("kernel arguments", x.len(), y.len())?;
    check_finite("kernel argument x", x)?;
    check_finite("kernel argument y", y)?;
    Ok(spec.eval_sq_dist(sq_dist(x, y)))
}

/// Empirical kernel matrix `K_ij = k(x_i, x_j)`.
///
/// Only the upper triangle is evaluated; the lower triangle is a copy, so the
/// result is bitwise symmetric.
pub fn gram(spec: &KernelSpec, x: &InputMatrix) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let n = x.nrows();
    let mut k = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let xj = x.row(j);
        for i in 0..j {
            let v = spec.eval_sq_dist(sq_dist(x.row(i), xj));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(j, j)] = spec.eval_sq_dist(0.0);
    }
    Ok(k)
}

/// The row `(k(x, x_1), …, k(x, x_n))`, returned as a column vector.
pub fn cross_row(spec: &KernelSpec, point: &[f64], x: &InputMatrix) -> Result<DVector<f64>> {
    check_dim("query point", x.ncols(), point.len())?;
    check_finite("query point", point)?;
    Ok(DVector::from_iterator(
        x.nrows(),
        x.rows().map(|xi| spec.eval_sq_dist(sq_dist(point, xi))),
    ))
}

/// Cross-kernel matrix between `queries` (rows) and `x` (columns).
pub fn cross_gram(
    spec: &KernelSpec,
    queries: &InputMatrix,
    x: &InputMatrix,
) -> Result<DMatrix<f64>> {
    check_dim("query dimension", x.ncols(), queries.ncols())?;
    let mut out = DMatrix::<f64>::zeros(queries.nrows(), x.nrows());
    for j in 0..x.nrows() {
        let xj = x.row(j);
        for (i, q) in queries.rows().enumerate() {
            out[(i, j)] = spec.eval_sq_dist(sq_dist(q, xj));
        }
    }
    Ok(out)
}
