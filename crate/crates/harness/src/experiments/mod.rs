//! Experiment drivers.
//!
//! Work is split into independent groups, one per `(n, replicate)`. Groups run
//! on a rayon pool and the indexed collect keeps output in group order, so the
//! records are identical for any thread count except for timings.

mod approx;
mod bench;
mod diagnose;
mod tradeoff;

pub use approx::{bimodal_instance, run_approx_error, Instance};
pub use bench::{run_bench_products, BenchRow, BENCH_FIELDS};
pub use diagnose::{run_diagnose, DiagnosticRow, DIAGNOSTIC_FIELDS};
pub use tradeoff::run_tradeoff;

use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use sketchkrr_core::sketch::{
    build_accumulation, build_gaussian, build_sparse_projection, default_sparsity,
    SamplingDistribution,
};
use sketchkrr_core::solver::{empirical_sq_norm, fit_exact, fit_sketched, KrrFit};
use sketchkrr_core::spectral::leverage_scores_from_kernel;
use sketchkrr_core::synth::RegressionDataset;
use sketchkrr_core::{DMatrix, DVector, KernelSpec, SketchMatrix};

use crate::config::{ExperimentConfig, Method};
use crate::error::{HarnessError, Result};
use crate::records::ExperimentRecord;
use crate::seed::{derive_seed, fnv1a, rng_from};

/// Options that do not change results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Progress lines on stderr.
    pub verbose: bool,
}

/// Label of the exact-fit baseline in record output.
pub const EXACT_LABEL: &str = "exact";

/// Floor on leverage scores before normalizing, guarding against round-off zeros.
const LEVERAGE_FLOOR: f64 = 1e-15;

pub(crate) fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub(crate) fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, elapsed_ms(start))
}

pub(crate) fn in_pool<T: Send>(
    threads: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Runtime(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs `job` on every group in parallel and concatenates the outputs in group order.
pub(crate) fn run_groups<G: Sync, T: Send>(
    groups: &[G],
    opts: RunOptions,
    job: impl Fn(&G) -> Vec<T> + Sync,
) -> Result<Vec<T>> {
    in_pool(opts.threads, || {
        groups
            .par_iter()
            .map(&job)
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    })
}

/// Sketch dimension used for `method` at sample size `n`.
pub fn method_dim(cfg: &ExperimentConfig, method: &Method, n: usize) -> usize {
    match method {
        Method::Identity => n,
        _ => cfg.sketch_dim(n),
    }
}

/// Builds the sketch for `method`. Leverage sampling reads `K` and `λ`.
pub fn build_sketch<R: RngCore + ?Sized>(
    method: &Method,
    k: &DMatrix<f64>,
    d: usize,
    lambda: f64,
    rng: &mut R,
) -> sketchkrr_core::Result<SketchMatrix> {
    let n = k.nrows();
    match method {
        Method::Nystrom => build_accumulation(n, d, 1, &SamplingDistribution::uniform(n)?, rng),
        Method::Accumulation { m } => {
            build_accumulation(n, d, *m, &SamplingDistribution::uniform(n)?, rng)
        }
        Method::Gaussian => build_gaussian(n, d, rng),
        Method::SparseProjection { s } => {
            build_sparse_projection(n, d, s.unwrap_or_else(|| default_sparsity(n)), rng)
        }
        Method::LeverageNystrom => {
            let scores: Vec<f64> = leverage_scores_from_kernel(k, lambda)?
                .into_iter()
                .map(|l| l.max(LEVERAGE_FLOOR))
                .collect();
            build_accumulation(n, d, 1, &SamplingDistribution::from_leverage(&scores)?, rng)
        }
        Method::Identity => Ok(SketchMatrix::identity(n)),
    }
}

/// Shared state of one `(n, replicate)` group.
pub(crate) struct Group<'a> {
    pub cfg: &'a ExperimentConfig,
    pub dataset: &'a str,
    pub n: usize,
    pub replicate: usize,
    pub data_seed: u64,
}

impl Group<'_> {
    fn record(&self, method: &str, m: Option<usize>, d: usize, seed: u64) -> ExperimentRecord {
        ExperimentRecord {
            experiment: self.cfg.experiment.tag().into(),
            dataset: self.dataset.into(),
            n: self.n,
            method: method.into(),
            m,
            d,
            replicate_index: self.replicate,
            seed,
            approx_error: 0.0,
            estimation_error: 0.0,
            test_mse: None,
            sketch_time_ms: 0.0,
            fit_time_ms: 0.0,
            predict_time_ms: 0.0,
            failure: None,
        }
    }

    fn method_seed(&self, method: &Method) -> u64 {
        derive_seed(
            self.cfg.master_seed,
            self.cfg.experiment.tag(),
            self.n,
            fnv1a(&method.label()),
            self.replicate,
        )
    }

    /// One failure record per configured row, used when the group cannot start.
    pub fn failed(&self, err: &dyn std::fmt::Display) -> Vec<ExperimentRecord> {
        let mut out = vec![self.record(EXACT_LABEL, None, self.n, self.data_seed)];
        for method in &self.cfg.methods {
            out.push(self.record(
                &method.label(),
                method.rounds(),
                method_dim(self.cfg, method, self.n),
                self.method_seed(method),
            ));
        }
        for r in &mut out {
            mark_failed(r, err);
        }
        out
    }

    /// Fits the exact estimator and every configured method on `train`.
    ///
    /// Without a test set, the prediction timing covers the in-sample product
    /// `K·w`; with one, it covers predicting the test inputs.
    pub fn evaluate(
        &self,
        kernel: &KernelSpec,
        k: &DMatrix<f64>,
        train: &RegressionDataset,
        test: Option<&RegressionDataset>,
    ) -> Vec<ExperimentRecord> {
        let lambda = self.cfg.lambda(self.n);
        let mut out = Vec::with_capacity(self.cfg.methods.len() + 1);

        let mut exact_rec = self.record(EXACT_LABEL, None, self.n, self.data_seed);
        let (exact, fit_ms) = timed(|| fit_exact(k, &train.y, lambda));
        exact_rec.fit_time_ms = fit_ms;
        let exact = match exact {
            Ok(fit) => fit,
            Err(e) => return self.failed(&e),
        };
        let reference = match self.score(&mut exact_rec, kernel, k, &exact, train, test, None) {
            Ok(v) => v,
            Err(e) => return self.failed(&e),
        };
        out.push(exact_rec);

        for method in &self.cfg.methods {
            let d = method_dim(self.cfg, method, self.n);
            let seed = self.method_seed(method);
            let mut rec = self.record(&method.label(), method.rounds(), d, seed);
            let result = (|| -> sketchkrr_core::Result<()> {
                let mut rng = rng_from(seed);
                let (sketch, sketch_ms) = timed(|| build_sketch(method, k, d, lambda, &mut rng));
                rec.sketch_time_ms = sketch_ms;
                let (fit, fit_ms) = timed(|| fit_sketched(k, &train.y, lambda, &sketch?));
                rec.fit_time_ms = fit_ms;
                self.score(&mut rec, kernel, k, &fit?, train, test, Some(&reference))?;
                Ok(())
            })();
            if let Err(e) = result {
                mark_failed(&mut rec, &e);
            }
            out.push(rec);
        }
        out
    }

    /// Fills error columns and prediction timing; returns the in-sample predictions.
    #[allow(clippy::too_many_arguments)]
    fn score<F: KrrFit>(
        &self,
        rec: &mut ExperimentRecord,
        kernel: &KernelSpec,
        k: &DMatrix<f64>,
        fit: &F,
        train: &RegressionDataset,
        test: Option<&RegressionDataset>,
        reference: Option<&DVector<f64>>,
    ) -> sketchkrr_core::Result<DVector<f64>> {
        let fitted = match test {
            None => {
                let (v, ms) = timed(|| k * fit.dual_weights());
                rec.predict_time_ms = ms;
                v
            }
            Some(test) => {
                let (pred, ms) =
                    timed(|| sketchkrr_core::solver::predict_batch(fit, kernel, &train.x, &test.x));
                rec.predict_time_ms = ms;
                rec.test_mse = Some(empirical_sq_norm(pred?.as_slice(), test.y.as_slice())?);
                fit.fitted().clone()
            }
        };
        if let Some(reference) = reference {
            rec.approx_error = empirical_sq_norm(fitted.as_slice(), reference.as_slice())?;
        }
        rec.estimation_error = empirical_sq_norm(fitted.as_slice(), train.f_star.as_slice())?;
        Ok(fitted)
    }
}

fn mark_failed(rec: &mut ExperimentRecord, err: &dyn std::fmt::Display) {
    rec.approx_error = f64::NAN;
    rec.estimation_error = f64::NAN;
    rec.test_mse = None;
    rec.failure = Some(err.to_string());
}

/// Median of `values`; NaN for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        len if len % 2 == 1 => v[len / 2],
        len => 0.5 * (v[len / 2 - 1] + v[len / 2]),
    }
}
