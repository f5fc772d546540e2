//! Sampling distributions, sketch construction and sketch-kernel products.
//!
//! # Accumulation sketches
//!
//! [`build_accumulation`] sums `m` rescaled, randomly signed sub-sampling
//! matrices. Round `i` draws `d` indices `t_1..t_d` from `P` and adds
//! `r_j / √(d·m·p_{t_j}) · e_{t_j}` to column `j`. The sketch is stored as the
//! `m·d` selections rather than as an `n × d` matrix, which makes `K·S` cost
//! `Θ(n·m·d)` instead of `Θ(n²·d)`.
//!
//! # Draw order
//!
//! Builders consume the random stream in a fixed order so that a sketch can be
//! replayed from the seed alone:
//!
//! - accumulation: rounds outer, columns inner; for each `(round, column)` one
//!   `next_u64` for the index (uniform `u = (x >> 11)·2⁻⁵³`, inverse CDF on the
//!   prefix sums) then one `next_u32` for the sign (`+1` when the low bit is 0).
//! - gaussian: column-major, one standard normal draw per entry.
//! - sparse projection: column-major, one uniform `u` per entry.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};

/// Tolerance on `Σ p_i = 1` accepted from callers of [`SamplingDistribution::from_probabilities`].
const SUM_TOLERANCE: f64 = 1e-12;

/// Uniform `[0, 1)` double from the top 53 bits of one `next_u64`.
#[inline]
pub fn unit_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Rademacher sign from the low bit of one `next_u32`.
#[inline]
pub fn rademacher<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    if rng.next_u32() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Discrete distribution over `0..n` with a prefix-sum table for inverse-CDF draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SamplingDistribution {
    /// `p_i = 1/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution(
                "uniform distribution over zero indices",
            ));
        }
        Ok(Self::from_normalized(alloc::vec![1.0 / n as f64; n]))
    }

    /// `p_i = ℓ_i / Σ_j ℓ_j`. Every score must be positive and finite.
    pub fn from_leverage(scores: &[f64]) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidDistribution("empty leverage vector"));
        }
        if scores.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidDistribution(
                "leverage scores must be positive and finite",
            ));
        }
        let total: f64 = scores.iter().sum();
        Ok(Self::from_normalized(
            scores.iter().map(|l| l / total).collect(),
        ))
    }

    /// Accepts probabilities that are positive and already sum to one.
    pub fn from_probabilities(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidDistribution("probabilities must be positive"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution("probabilities must sum to 1"));
        }
        Ok(Self::from_normalized(probs))
    }

    fn from_normalized(probs: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        // pin the last entry so that every u ∈ [0, 1) lands inside the table
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        SamplingDistribution { probs, cumulative }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Smallest `i` with `cumulative[i] > u`.
    #[inline]
    pub fn index_for(&self, u: f64) -> usize {
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.probs.len() - 1)
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        self.index_for(unit_uniform(rng))
    }
}

/// One signed, rescaled selection `sign · weight · e_row` placed in a sketch column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub row: usize,
    pub sign: f64,
    pub weight: f64,
}

impl Selection {
    #[inline]
    pub fn value(&self) -> f64 {
        self.sign * self.weight
    }
}

/// Accumulated sub-sampling sketch, stored as its `m·d` selections.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationSketch {
    n: usize,
    d: usize,
    m: usize,
    /// Round-major: selection for (round `i`, column `j`) at `i * d + j`.
    selections: Vec<Selection>,
}

impl AccumulationSketch {
    pub fn rounds(&self) -> usize {
        self.m
    }

    pub fn selections(&self) -> &[Selection] {
        &self.selections
    }

    pub fn selection(&self, round: usize, column: usize) -> &Selection {
        &self.selections[round * self.d + column]
    }

    /// Selections of column `j` in round order.
    pub fn column(&self, j: usize) -> impl Iterator<Item = &Selection> + '_ {
        (0..self.m).map(move |i| &self.selections[i * self.d + j])
    }
}

/// An `n × d` sketching matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum SketchMatrix {
    Structured(AccumulationSketch),
    Dense(DMatrix<f64>),
}

impl SketchMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            SketchMatrix::Structured(s) => s.n,
            SketchMatrix::Dense(s) => s.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            SketchMatrix::Structured(s) => s.d,
            SketchMatrix::Dense(s) => s.ncols(),
        }
    }

    /// `n × n` identity as a dense sketch (`d = n`); reproduces exact KRR.
    pub fn identity(n: usize) -> Self {
        SketchMatrix::Dense(DMatrix::identity(n, n))
    }

    /// Materializes the sketch. Selections that hit the same entry add up.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SketchMatrix::Dense(s) => s.clone(),
            SketchMatrix::Structured(s) => {
                let mut out = DMatrix::zeros(s.n, s.d);
                for (k, sel) in s.selections.iter().enumerate() {
                    out[(sel.row, k % s.d)] += sel.value();
                }
                out
            }
        }
    }

    /// `C = K·S` for any `n × n` matrix `K`.
    ///
    /// The structured path accumulates signed, scaled columns of `K`.
    pub fn right_multiply(&self, k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_dim("K columns vs sketch rows", self.nrows(), k.ncols())?;
        match self {
            SketchMatrix::Dense(s) => Ok(k * s),
            SketchMatrix::Structured(s) => {
                let mut c = DMatrix::zeros(k.nrows(), s.d);
                for (idx, sel) in s.selections.iter().enumerate() {
                    let j = idx % s.d;
                    c.column_mut(j).axpy(sel.value(), &k.column(sel.row), 1.0);
                }
                Ok(c)
            }
        }
    }

    /// `Sᵀ·V` for an `n × k` matrix `V`.
    pub fn transpose_apply(&self, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_dim("V rows vs sketch rows", self.nrows(), v.nrows())?;
        match self {
            SketchMatrix::Dense(s) => Ok(s.tr_mul(v)),
            SketchMatrix::Structured(s) => {
                let cols = v.ncols();
                let mut out = DMatrix::zeros(s.d, cols);
                for (idx, sel) in s.selections.iter().enumerate() {
                    let j = idx % s.d;
                    let a = sel.value();
                    for c in 0..cols {
                        out[(j, c)] += a * v[(sel.row, c)];
                    }
                }
                Ok(out)
            }
        }
    }

    /// `S·β` for a `d`-vector `β`.
    pub fn apply(&self, beta: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("beta length vs sketch columns", self.ncols(), beta.len())?;
        match self {
            SketchMatrix::Dense(s) => Ok(s * beta),
            SketchMatrix::Structured(s) => {
                let mut out = DVector::zeros(s.n);
                for (idx, sel) in s.selections.iter().enumerate() {
                    out[sel.row] += sel.value() * beta[idx % s.d];
                }
                Ok(out)
            }
        }
    }

    /// `Sᵀ·y` for an `n`-vector `y`.
    pub fn transpose_apply_vec(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("vector length vs sketch rows", self.nrows(), y.len())?;
        match self {
            SketchMatrix::Dense(s) => Ok(s.tr_mul(y)),
            SketchMatrix::Structured(s) => {
                let mut out = DVector::zeros(s.d);
                for (idx, sel) in s.selections.iter().enumerate() {
                    out[idx % s.d] += sel.value() * y[sel.row];
                }
                Ok(out)
            }
        }
    }
}

fn require_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        Err(Error::InvalidParameter(format!(
            "{name} must be at least 1"
        )))
    } else {
        Ok(())
    }
}

/// Builds an accumulation sketch with `m` rounds of `d` draws from `dist`.
///
/// `n` is the number of rows and must match the distribution's support.
pub fn build_accumulation<R: RngCore + ?Sized>(
    n: usize,
    d: usize,
    m: usize,
    dist: &SamplingDistribution,
    rng: &mut R,
) -> Result<SketchMatrix> {
    require_positive("projection dimension d", d)?;
    require_positive("accumulation count m", m)?;
    if dist.len() != n {
        return Err(Error::InvalidDistribution(
            "sampling distribution support differs from n",
        ));
    }
    let scale = (d * m) as f64;
    let mut selections = Vec::with_capacity(m * d);
    for _round in 0..m {
        for _col in 0..d {
            let row = dist.sample(rng);
            let sign = rademacher(rng);
            let weight = 1.0 / libm::sqrt(scale * dist.probs[row]);
            selections.push(Selection { row, sign, weight });
        }
    }
    Ok(SketchMatrix::Structured(AccumulationSketch {
        n,
        d,
        m,
        selections,
    }))
}

/// Dense Gaussian sketch with i.i.d. `N(0, 1/d)` entries, so `E[S Sᵀ] = I_n`.
pub fn build_gaussian<R: RngCore + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
) -> Result<SketchMatrix> {
    require_positive("projection dimension d", d)?;
    let scale = 1.0 / libm::sqrt(d as f64);
    let mut s = DMatrix::zeros(n, d);
    for j in 0..d {
        for i in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            s[(i, j)] = scale * z;
        }
    }
    Ok(SketchMatrix::Dense(s))
}

/// Very sparse random projection: each entry is `√(s/d)` times `+1` w.p.
/// `1/(2s)`, `−1` w.p. `1/(2s)` and `0` otherwise.
///
/// Entries have second moment exactly `1/d`. The usual density is `s = √n`.
pub fn build_sparse_projection<R: RngCore + ?Sized>(
    n: usize,
    d: usize,
    s: f64,
    rng: &mut R,
) -> Result<SketchMatrix> {
    require_positive("projection dimension d", d)?;
    if !(s.is_finite() && s >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sparsity parameter s must be >= 1, got {s}"
        )));
    }
    let magnitude = libm::sqrt(s / d as f64);
    let half = 0.5 / s;
    let mut out = DMatrix::zeros(n, d);
    for j in 0..d {
        for i in 0..n {
            let u = unit_uniform(rng);
            if u < half {
                out[(i, j)] = magnitude;
            } else if u < 2.0 * half {
                out[(i, j)] = -magnitude;
            }
        }
    }
    Ok(SketchMatrix::Dense(out))
}

/// Default sparse-projection density `s = √n`.
pub fn default_sparsity(n: usize) -> f64 {
    libm::sqrt(n as f64).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_probabilities() {
        let p = SamplingDistribution::uniform(4).unwrap();
        assert_eq!(p.probabilities(), &[0.25; 4]);
        assert_eq!(p.cumulative(), &[0.25, 0.5, 0.75, 1.0]);
        assert_eq!(
            SamplingDistribution::uniform(1).unwrap().probabilities(),
            &[1.0]
        );
        assert!(SamplingDistribution::uniform(0).is_err());
        for n in [3, 7, 100, 1001] {
            let p = SamplingDistribution::uniform(n).unwrap();
            let total: f64 = p.probabilities().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn leverage_probabilities() {
        let p = SamplingDistribution::from_leverage(&[1.0, 1.0, 1.0]).unwrap();
        for v in p.probabilities() {
            assert_relative_eq!(*v, 1.0 / 3.0, max_relative = 1e-15);
        }
        let p = SamplingDistribution::from_leverage(&[3.0, 1.0]).unwrap();
        assert_eq!(p.probabilities(), &[0.75, 0.25]);
        assert!(SamplingDistribution::from_leverage(&[1.0, 0.0]).is_err());
        assert!(SamplingDistribution::from_leverage(&[1.0, -2.0]).is_err());
        assert!(SamplingDistribution::from_leverage(&[f64::NAN]).is_err());
        assert!(SamplingDistribution::from_probabilities(vec![0.5, 0.4]).is_err());
    }

    #[test]
    fn inverse_cdf_boundaries() {
        let p = SamplingDistribution::from_leverage(&[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(p.index_for(0.0), 0);
        assert_eq!(p.index_for(0.2499), 0);
        assert_eq!(p.index_for(0.25), 1);
        assert_eq!(p.index_for(0.7499), 1);
        assert_eq!(p.index_for(0.75), 2);
        assert_eq!(p.index_for(0.999_999_999), 2);
    }

    #[test]
    fn nystrom_case_has_one_entry_per_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 50;
        let d = 8;
        let s = build_accumulation(
            n,
            d,
            1,
            &SamplingDistribution::uniform(n).unwrap(),
            &mut rng,
        )
        .unwrap();
        let dense = s.to_dense();
        let expect = libm::sqrt(n as f64 / d as f64);
        for j in 0..d {
            let nz: Vec<f64> = dense
                .column(j)
                .iter()
                .copied()
                .filter(|v| *v != 0.0)
                .collect();
            assert_eq!(nz.len(), 1);
            assert_relative_eq!(nz[0].abs(), expect, max_relative = 1e-15);
        }
    }

    #[test]
    fn collisions_add() {
        let sketch = SketchMatrix::Structured(AccumulationSketch {
            n: 3,
            d: 1,
            m: 2,
            selections: vec![
                Selection {
                    row: 1,
                    sign: 1.0,
                    weight: 0.5,
                },
                Selection {
                    row: 1,
                    sign: 1.0,
                    weight: 0.5,
                },
            ],
        });
        let dense = sketch.to_dense();
        assert_eq!(dense[(1, 0)], 1.0);
        assert_eq!(dense[(0, 0)], 0.0);
    }

    #[test]
    fn builders_reject_zero_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = SamplingDistribution::uniform(4).unwrap();
        assert!(build_accumulation(4, 0, 1, &p, &mut rng).is_err());
        assert!(build_accumulation(4, 1, 0, &p, &mut rng).is_err());
        assert!(build_accumulation(5, 1, 1, &p, &mut rng).is_err());
        assert!(build_gaussian(4, 0, &mut rng).is_err());
        assert!(build_sparse_projection(4, 2, 0.5, &mut rng).is_err());
    }

    #[test]
    fn sparse_projection_with_unit_density_has_no_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = 5;
        let s = build_sparse_projection(30, d, 1.0, &mut rng)
            .unwrap()
            .to_dense();
        let mag = 1.0 / libm::sqrt(d as f64);
        assert!(s.iter().all(|v| (v.abs() - mag).abs() < 1e-15));
        let pos = s.iter().filter(|v| **v > 0.0).count();
        assert!(pos > 40 && pos < 110);
    }

    #[test]
    fn identity_kernel_returns_dense_sketch() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 16;
        let s = build_accumulation(
            n,
            4,
            3,
            &SamplingDistribution::uniform(n).unwrap(),
            &mut rng,
        )
        .unwrap();
        let c = s.right_multiply(&DMatrix::identity(n, n)).unwrap();
        assert_eq!(c, s.to_dense());
    }

    #[test]
    fn single_selection_picks_kernel_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 10;
        let d = 3;
        let k = DMatrix::from_fn(n, n, |i, j| 1.0 / (1.0 + (i + j) as f64));
        let s = build_accumulation(
            n,
            d,
            1,
            &SamplingDistribution::uniform(n).unwrap(),
            &mut rng,
        )
        .unwrap();
        let SketchMatrix::Structured(acc) = &s else {
            unreachable!()
        };
        let c = s.right_multiply(&k).unwrap();
        let scale = libm::sqrt(n as f64 / d as f64);
        for j in 0..d {
            let sel = acc.selection(0, j);
            for i in 0..n {
                assert_relative_eq!(
                    c[(i, j)],
                    scale * sel.sign * k[(i, sel.row)],
                    max_relative = 1e-15
                );
            }
        }
    }

    #[test]
    fn transpose_of_identity_lists_selections() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 12;
        let s = build_accumulation(
            n,
            4,
            1,
            &SamplingDistribution::uniform(n).unwrap(),
            &mut rng,
        )
        .unwrap();
        let st = s.transpose_apply(&DMatrix::identity(n, n)).unwrap();
        assert_eq!(st, s.to_dense().transpose());
    }

    #[test]
    fn dimension_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = build_gaussian(6, 2, &mut rng).unwrap();
        assert!(s.right_multiply(&DMatrix::zeros(5, 5)).is_err());
        assert!(s.transpose_apply(&DMatrix::zeros(5, 1)).is_err());
        assert!(s.apply(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let p = SamplingDistribution::uniform(20).unwrap();
        let a = build_accumulation(20, 5, 4, &p, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let b = build_accumulation(20, 5, 4, &p, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        assert_eq!(a, b);
        let g1 = build_gaussian(20, 5, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let g2 = build_gaussian(20, 5, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        assert_eq!(g1, g2);
        let s1 = build_sparse_projection(20, 5, 3.0, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let s2 = build_sparse_projection(20, 5, 3.0, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        assert_eq!(s1, s2);
    }
}
