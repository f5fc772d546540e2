//! Small dense helpers shared by the solver and spectral modules.

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Pivot ratio `min L_ii² / max L_ii²` below which a Cholesky factor is
/// treated as numerically singular.
const PIVOT_RATIO_FLOOR: f64 = 1e-14;

/// Relative jitter added on the one retry: `1e-10 · trace(A) / dim`.
const JITTER_SCALE: f64 = 1e-10;

fn well_conditioned(chol: &Cholesky<f64, nalgebra::Dyn>) -> bool {
    let l = chol.l_dirty();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..l.nrows() {
        let p = l[(i, i)] * l[(i, i)];
        lo = lo.min(p);
        hi = hi.max(p);
    }
    hi > 0.0 && lo.is_finite() && lo >= PIVOT_RATIO_FLOOR * hi
}

/// Cholesky solve of a symmetric positive-definite system, no fallback.
pub(crate) fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    Cholesky::new(a).map(|c| c.solve(b))
}

/// Cholesky solve with one-shot jitter escalation.
///
/// A factorization that fails, or whose pivots span more than
/// [`PIVOT_RATIO_FLOOR`], is retried once on `A + τI`. Returns the solution and
/// whether jitter was needed.
pub(crate) fn solve_spd_jittered(
    a: DMatrix<f64>,
    b: &DVector<f64>,
) -> Result<(DVector<f64>, bool)> {
    let dim = a.nrows();
    let jitter = JITTER_SCALE * a.trace() / dim as f64;
    if let Some(chol) = Cholesky::new(a.clone()) {
        if well_conditioned(&chol) {
            return Ok((chol.solve(b), false));
        }
    }
    if !(jitter.is_finite() && jitter > 0.0) {
        return Err(Error::SingularSystem);
    }
    let mut shifted = a;
    for i in 0..dim {
        shifted[(i, i)] += jitter;
    }
    match Cholesky::new(shifted) {
        Some(chol) if well_conditioned(&chol) => Ok((chol.solve(b), true)),
        _ => Err(Error::SingularSystem),
    }
}

/// `(B + Bᵀ)/2`, in place.
pub(crate) fn symmetrize(b: &mut DMatrix<f64>) {
    let n = b.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (b[(i, j)] + b[(j, i)]);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
}

/// Eigen-pairs of a symmetric matrix, sorted by decreasing eigenvalue.
pub(crate) fn sorted_symmetric_eigen(a: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, 0).ok_or(Error::EigenNonConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Eigenvalues only, sorted decreasing.
pub(crate) fn sorted_symmetric_eigenvalues(a: DMatrix<f64>) -> Result<Vec<f64>> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNonConvergence);
    }
    // nalgebra iterates without a cap here; finite input always converges.
    let mut values: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub(crate) fn symmetric_op_norm(a: DMatrix<f64>) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    Ok(sorted_symmetric_eigenvalues(a)?
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs())))
}

/// Largest singular value of a rectangular matrix via its smaller Gram matrix.
pub(crate) fn op_norm(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let gram = if a.nrows() <= a.ncols() {
        a * a.transpose()
    } else {
        a.transpose() * a
    };
    Ok(libm::sqrt(symmetric_op_norm(gram)?.max(0.0)))
}
