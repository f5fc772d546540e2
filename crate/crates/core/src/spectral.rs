//! Spectral diagnostics of an empirical kernel matrix.
//!
//! Everything here works with the eigenvalues `σ_1 ≥ … ≥ σ_n ≥ 0` of `K/n`
//! and the matching orthonormal eigenvectors `U`.
//!
//! The columns `ψ_i` of `Ψ_δ` are weighted so that
//! `‖ψ_i‖² = Σ_j U_ij² · σ_j/(σ_j + δ)`. With that weighting the leverage score
//! of sample `i` at level `δ` equals `‖ψ_i‖²`, and `‖Ψ_δ‖_F²` is the statistical
//! dimension `Σ_j σ_j/(σ_j + δ)`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    op_norm, sorted_symmetric_eigen, sorted_symmetric_eigenvalues, symmetric_op_norm,
};
use crate::sketch::{SamplingDistribution, SketchMatrix};

/// Threshold on condition 1, `‖U₁ᵀSSᵀU₁ − I‖ ≤ 1/2`.
pub const CONDITION1_THRESHOLD: f64 = 0.5;

/// Default constant `c` in condition 2, `‖SᵀU₂Σ₂^{1/2}‖ ≤ c·√δ`.
pub const DEFAULT_CONDITION2_CONSTANT: f64 = 1.0;

/// Eigen-decomposition of `K/n`.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    /// Eigenvalues of `K/n`, non-increasing, clamped at zero.
    pub sigma: Vec<f64>,
    /// Orthonormal eigenvectors; column `j` pairs with `sigma[j]`.
    pub vectors: DMatrix<f64>,
}

/// Result of [`check_k_satisfiability`].
#[derive(Debug, Clone, PartialEq)]
pub struct SatisfiabilityReport {
    /// `‖U₁ᵀSSᵀU₁ − I_{d_δ}‖_op`
    pub cond1_value: f64,
    /// `‖SᵀU₂Σ₂^{1/2}‖_op`
    pub cond2_value: f64,
    pub delta: f64,
    pub c: f64,
    pub d_delta: usize,
    pub pass1: bool,
    pub pass2: bool,
}

impl SatisfiabilityReport {
    pub fn passed(&self) -> bool {
        self.pass1 && self.pass2
    }
}

/// Squared column norms of `Ψ_δ`: all components, and the first `d_δ` only.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiNorms {
    pub full: Vec<f64>,
    pub head: Vec<f64>,
}

fn check_level(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

fn check_square(k: &DMatrix<f64>) -> Result<()> {
    check_dim("kernel matrix columns", k.nrows(), k.ncols())?;
    if k.nrows() == 0 {
        return Err(Error::InvalidParameter("empty kernel matrix".into()));
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("kernel matrix"));
    }
    Ok(())
}

/// Eigen-decomposes `K/n` and clamps negative round-off eigenvalues to zero.
pub fn decompose(k: &DMatrix<f64>) -> Result<SpectralProfile> {
    check_square(k)?;
    let n = k.nrows() as f64;
    let (values, vectors) = sorted_symmetric_eigen(k / n)?;
    Ok(SpectralProfile {
        sigma: values.into_iter().map(|v| v.max(0.0)).collect(),
        vectors,
    })
}

/// Eigenvalues of `K/n` only (clamped, non-increasing); much cheaper than
/// [`decompose`] when no eigenvectors are needed.
pub fn spectrum(k: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_square(k)?;
    let n = k.nrows() as f64;
    Ok(sorted_symmetric_eigenvalues(k / n)?
        .into_iter()
        .map(|v| v.max(0.0))
        .collect())
}

/// `d_δ = min{i : σ_i ≤ δ} − 1` (1-based), or `n` when every `σ_i > δ`.
///
/// `sigma` must be sorted non-increasing.
pub fn d_delta(sigma: &[f64], delta: f64) -> usize {
    sigma
        .iter()
        .position(|&s| s <= delta)
        .unwrap_or(sigma.len())
}

/// `Σ_i σ_i / (σ_i + δ)`.
pub fn statistical_dimension(sigma: &[f64], delta: f64) -> f64 {
    sigma.iter().map(|&s| s / (s + delta)).sum()
}

impl SpectralProfile {
    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn d_delta(&self, delta: f64) -> usize {
        d_delta(&self.sigma, delta)
    }

    pub fn statistical_dimension(&self, delta: f64) -> f64 {
        statistical_dimension(&self.sigma, delta)
    }

    /// Rebuilds `U·diag(σ)·Uᵀ`.
    pub fn recompose(&self) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        scaled * self.vectors.transpose()
    }

    /// `Σ_{j < upto} U_ij² · w_j` for every row `i`.
    fn weighted_row_norms(&self, weights: &[f64], upto: usize) -> Vec<f64> {
        let n = self.n();
        let mut out = alloc::vec![0.0; n];
        for (j, &w) in weights.iter().enumerate().take(upto) {
            if w == 0.0 {
                continue;
            }
            let col = self.vectors.column(j);
            for (acc, u) in out.iter_mut().zip(col.iter()) {
                *acc += u * u * w;
            }
        }
        out
    }

    fn shrinkage_weights(&self, delta: f64) -> Vec<f64> {
        self.sigma.iter().map(|&s| s / (s + delta)).collect()
    }
}

/// Statistical leverage scores `ℓ_i = (K(K + nλI)⁻¹)_ii`, via the spectral
/// form `Σ_j U_ij² σ_j/(σ_j + λ)`.
pub fn leverage_scores(profile: &SpectralProfile, lambda: f64) -> Result<Vec<f64>> {
    check_level("lambda", lambda)?;
    let w = profile.shrinkage_weights(lambda);
    Ok(profile.weighted_row_norms(&w, profile.n()))
}

/// Leverage scores straight from `K`, without an eigendecomposition.
///
/// Uses `ℓ_i = 1 − nλ·[(K + nλI)⁻¹]_ii`, with the diagonal of the inverse read
/// off the inverse Cholesky factor. Scores are clamped to `[0, 1]`.
pub fn leverage_scores_from_kernel(k: &DMatrix<f64>, lambda: f64) -> Result<Vec<f64>> {
    check_level("lambda", lambda)?;
    check_dim("kernel matrix columns", k.nrows(), k.ncols())?;
    let n = k.nrows();
    let shift = n as f64 * lambda;
    let mut a = k.clone();
    for i in 0..n {
        a[(i, i)] += shift;
    }
    let l = Cholesky::new(a).ok_or(Error::NotPositiveDefinite)?.l();
    let l_inv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or(Error::NotPositiveDefinite)?;
    Ok((0..n)
        .map(|i| {
            let inv_ii = l_inv.column(i).norm_squared();
            (1.0 - shift * inv_ii).clamp(0.0, 1.0)
        })
        .collect())
}

/// Squared norms `‖ψ_i‖²` and `‖ψ̃_i‖²` (first `d_δ` components) of the columns of `Ψ_δ`.
pub fn psi_column_norms(profile: &SpectralProfile, delta: f64) -> Result<PsiNorms> {
    check_level("delta", delta)?;
    let w = profile.shrinkage_weights(delta);
    let head = profile.weighted_row_norms(&w, profile.d_delta(delta));
    let full = profile.weighted_row_norms(&w, profile.n());
    Ok(PsiNorms { full, head })
}

/// Incoherence `M = max{ max_i ‖ψ̃_i‖²/p_i, max_i (‖ψ_i‖² − ‖ψ̃_i‖²)/p_i }`.
pub fn incoherence(
    profile: &SpectralProfile,
    delta: f64,
    dist: &SamplingDistribution,
) -> Result<f64> {
    check_dim("sampling distribution support", profile.n(), dist.len())?;
    let psi = psi_column_norms(profile, delta)?;
    let mut head_max = 0.0f64;
    let mut tail_max = 0.0f64;
    for ((full, head), p) in psi.full.iter().zip(&psi.head).zip(dist.probabilities()) {
        head_max = head_max.max(head / p);
        tail_max = tail_max.max((full - head).max(0.0) / p);
    }
    Ok(head_max.max(tail_max))
}

/// Evaluates both K-satisfiability conditions for sketch `S` at level `δ`.
///
/// Condition 1 is vacuous (value 0) when `d_δ = 0`; condition 2 is vacuous
/// when `d_δ = n`.
pub fn check_k_satisfiability(
    sketch: &SketchMatrix,
    profile: &SpectralProfile,
    delta: f64,
    c: f64,
) -> Result<SatisfiabilityReport> {
    check_level("delta", delta)?;
    check_level("c", c)?;
    let n = profile.n();
    check_dim("sketch rows", n, sketch.nrows())?;
    let dd = profile.d_delta(delta);

    let cond1_value = if dd == 0 {
        0.0
    } else {
        let u1 = profile.vectors.columns(0, dd).into_owned();
        let st_u1 = sketch.transpose_apply(&u1)?;
        let mut gram = st_u1.tr_mul(&st_u1);
        for i in 0..dd {
            gram[(i, i)] -= 1.0;
        }
        symmetric_op_norm(gram)?
    };

    let cond2_value = if dd == n {
        0.0
    } else {
        let mut u2 = profile.vectors.columns(dd, n - dd).into_owned();
        for (k, j) in (dd..n).enumerate() {
            u2.column_mut(k).scale_mut(libm::sqrt(profile.sigma[j]));
        }
        op_norm(&sketch.transpose_apply(&u2)?)?
    };

    Ok(SatisfiabilityReport {
        cond1_value,
        cond2_value,
        delta,
        c,
        d_delta: dd,
        pass1: cond1_value <= CONDITION1_THRESHOLD,
        pass2: cond2_value <= c * libm::sqrt(delta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        &b * b.transpose()
    }

    #[test]
    fn scaled_identity() {
        let n = 5;
        let p = decompose(&(DMatrix::identity(n, n) * n as f64)).unwrap();
        for s in &p.sigma {
            assert_relative_eq!(*s, 1.0, max_relative = 1e-14);
        }
        let k = DMatrix::identity(n, n) * n as f64;
        assert!((p.recompose() * n as f64 - &k).norm() <= 1e-8 * k.norm());
    }

    #[test]
    fn diagonal_case() {
        let k = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let p = decompose(&k).unwrap();
        assert_eq!(p.sigma, vec![2.0, 0.5]);
        assert_eq!(spectrum(&k).unwrap(), vec![2.0, 0.5]);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let n = 6;
        let k = random_psd(n, 4);
        let p = decompose(&k).unwrap();
        let kn = &k / n as f64;
        assert!((p.recompose() - &kn).norm() <= 1e-8 * kn.norm());
        let gram = p.vectors.tr_mul(&p.vectors);
        assert!((gram - DMatrix::identity(n, n)).norm() <= 1e-10);
        assert!(p.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(p.sigma.iter().all(|s| *s >= 0.0));
    }

    #[test]
    fn effective_rank_examples() {
        let sigma = [3.0, 2.0, 1.0, 0.5];
        assert_eq!(d_delta(&sigma, 1.5), 2);
        assert_eq!(d_delta(&sigma, 4.0), 0);
        assert_eq!(d_delta(&sigma, 0.1), 4);
        assert_eq!(d_delta(&sigma, 1.0), 2);
    }

    #[test]
    fn statistical_dimension_examples() {
        let sigma = [0.3; 7];
        assert_relative_eq!(
            statistical_dimension(&sigma, 0.2),
            7.0 * 0.3 / 0.5,
            max_relative = 1e-14
        );
        assert!(statistical_dimension(&sigma, 1e300) < 1e-290);
    }

    #[test]
    fn isotropic_leverage() {
        let n = 4;
        let c = 0.7;
        let p = decompose(&(DMatrix::identity(n, n) * (c * n as f64))).unwrap();
        for l in leverage_scores(&p, 0.2).unwrap() {
            assert_relative_eq!(l, c / (c + 0.2), max_relative = 1e-13);
        }
    }

    #[test]
    fn leverage_matches_dense_formula() {
        let n = 5;
        let lambda = 0.1;
        let k = random_psd(n, 9);
        let p = decompose(&k).unwrap();
        let lev = leverage_scores(&p, lambda).unwrap();
        let mut shifted = k.clone();
        for i in 0..n {
            shifted[(i, i)] += n as f64 * lambda;
        }
        let hat = &k * shifted.try_inverse().unwrap();
        for i in 0..n {
            assert_relative_eq!(lev[i], hat[(i, i)], max_relative = 1e-10);
            assert!(lev[i] >= 0.0 && lev[i] < 1.0);
        }
        let total: f64 = lev.iter().sum();
        assert!((total - p.statistical_dimension(lambda)).abs() < 1e-10);

        let probs = SamplingDistribution::from_leverage(&lev).unwrap();
        for (p, l) in probs.probabilities().iter().zip(&lev) {
            assert_relative_eq!(*p, l / total, max_relative = 1e-14);
        }
    }

    #[test]
    fn psi_norms_against_explicit_matrix() {
        let n = 8;
        let delta = 0.05;
        let k = random_psd(n, 17);
        let p = decompose(&k).unwrap();
        let dd = p.d_delta(delta);
        let psi = psi_column_norms(&p, delta).unwrap();
        // Ψ = diag(√(σ/(σ+δ)))·Uᵀ, formed explicitly
        let mut big_psi = p.vectors.transpose();
        for j in 0..n {
            let w = libm::sqrt(p.sigma[j] / (p.sigma[j] + delta));
            big_psi.row_mut(j).scale_mut(w);
        }
        for i in 0..n {
            let col = big_psi.column(i);
            let full: f64 = col.iter().map(|v| v * v).sum();
            let head: f64 = col.iter().take(dd).map(|v| v * v).sum();
            assert_relative_eq!(psi.full[i], full, max_relative = 1e-12);
            assert_relative_eq!(psi.head[i], head, max_relative = 1e-12, epsilon = 1e-15);
            assert!(psi.head[i] <= psi.full[i] + 1e-15);
        }
        let frob: f64 = psi.full.iter().sum();
        assert!((frob - p.statistical_dimension(delta)).abs() < 1e-10);
        assert!((big_psi.norm_squared() - frob).abs() < 1e-10);
        let lev = leverage_scores(&p, delta).unwrap();
        for (l, f) in lev.iter().zip(&psi.full) {
            assert!((l - f).abs() < 1e-10);
        }
    }

    #[test]
    fn incoherence_of_scaled_identity() {
        // K = nI, uniform P, δ < 1: every ‖ψ̃_i‖² = 1/(1+δ), tail empty.
        let n = 6;
        let delta = 0.25;
        let p = decompose(&(DMatrix::identity(n, n) * n as f64)).unwrap();
        assert_eq!(p.d_delta(delta), n);
        let m = incoherence(&p, delta, &SamplingDistribution::uniform(n).unwrap()).unwrap();
        assert_relative_eq!(m, n as f64 / (1.0 + delta), max_relative = 1e-12);
    }

    #[test]
    fn leverage_sampling_caps_incoherence() {
        let n = 12;
        let delta = 0.03;
        let p = decompose(&random_psd(n, 2)).unwrap();
        let lev = leverage_scores(&p, delta).unwrap();
        let m = incoherence(
            &p,
            delta,
            &SamplingDistribution::from_leverage(&lev).unwrap(),
        )
        .unwrap();
        assert!(m <= p.statistical_dimension(delta) * (1.0 + 1e-12));
    }

    #[test]
    fn identity_sketch_satisfies_both_conditions() {
        let n = 10;
        let delta = 0.02;
        let p = decompose(&random_psd(n, 3)).unwrap();
        let r = check_k_satisfiability(&SketchMatrix::identity(n), &p, delta, 1.0).unwrap();
        let dd = p.d_delta(delta);
        assert!(r.cond1_value < 1e-12);
        assert!(r.pass1);
        if dd < n {
            assert_relative_eq!(r.cond2_value, libm::sqrt(p.sigma[dd]), max_relative = 1e-8);
            assert!(r.cond2_value <= libm::sqrt(delta));
        }
        assert!(r.pass2);
    }

    #[test]
    fn zero_sketch_fails_condition_one() {
        let n = 7;
        let p = decompose(&random_psd(n, 3)).unwrap();
        let s = SketchMatrix::Dense(DMatrix::zeros(n, 3));
        let r = check_k_satisfiability(&s, &p, 0.01, 1.0).unwrap();
        assert!(p.d_delta(0.01) > 0);
        assert_relative_eq!(r.cond1_value, 1.0, max_relative = 1e-12);
        assert!(!r.pass1);
        assert_eq!(r.cond2_value, 0.0);
    }

    #[test]
    fn vacuous_conditions() {
        let n = 4;
        let p = decompose(&(DMatrix::identity(n, n) * n as f64)).unwrap();
        let s = SketchMatrix::Dense(DMatrix::zeros(n, 2));
        // δ above every eigenvalue: d_δ = 0, condition 1 vacuous
        let r = check_k_satisfiability(&s, &p, 2.0, 1.0).unwrap();
        assert_eq!((r.d_delta, r.cond1_value, r.pass1), (0, 0.0, true));
        // δ below every eigenvalue: d_δ = n, condition 2 vacuous
        let r = check_k_satisfiability(&s, &p, 0.5, 1.0).unwrap();
        assert_eq!((r.d_delta, r.cond2_value, r.pass2), (n, 0.0, true));
        assert!(check_k_satisfiability(&s, &p, 0.0, 1.0).is_err());
    }
}
