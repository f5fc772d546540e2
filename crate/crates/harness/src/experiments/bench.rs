use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sketchkrr_core::sketch::build_accumulation;
use sketchkrr_core::{DMatrix, SamplingDistribution};

use super::{bimodal_instance, elapsed_ms, median, RunOptions};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::seed::{derive_seed, fnv1a, rng_from};

/// Median wall-clock times of the two sketch products, structured against dense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub repeats: usize,
    pub structured_ks_ms: f64,
    pub dense_ks_ms: f64,
    pub structured_stks_ms: f64,
    pub dense_stks_ms: f64,
    pub ks_speedup: f64,
    pub stks_speedup: f64,
}

pub const BENCH_FIELDS: [&str; 10] = [
    "n",
    "d",
    "m",
    "repeats",
    "structured_ks_ms",
    "dense_ks_ms",
    "structured_stks_ms",
    "dense_stks_ms",
    "ks_speedup",
    "stks_speedup",
];

/// Agreement required between structured and dense products before timing.
const PRODUCT_TOLERANCE: f64 = 1e-10;

/// One discarded warm-up call, then the median of `repeats` timed calls.
fn median_ms<T>(repeats: usize, mut f: impl FnMut() -> T) -> f64 {
    black_box(f());
    let times: Vec<f64> = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            black_box(f());
            elapsed_ms(start)
        })
        .collect();
    median(&times)
}

fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Times `KS` and the full `SᵀKS` for accumulation sketches against dense products.
///
/// Runs single-threaded regardless of `opts.threads` so timings are comparable.
pub fn run_bench_products(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<BenchRow>> {
    if cfg.experiment != ExperimentKind::BenchProducts {
        return Err(HarnessError::Config(format!(
            "config describes {}, not bench_products",
            cfg.experiment.tag()
        )));
    }
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let inst = bimodal_instance(cfg, n, 0)?;
        let d = cfg.bench.d.unwrap_or_else(|| cfg.sketch_dim(n)).min(n);
        let uniform = SamplingDistribution::uniform(n)?;
        for &m in &cfg.bench.m_values {
            if opts.verbose {
                eprintln!("bench_products: n = {n}, d = {d}, m = {m}");
            }
            let seed = derive_seed(
                cfg.master_seed,
                cfg.experiment.tag(),
                n,
                fnv1a(&format!("m{m}")),
                0,
            );
            let sketch = build_accumulation(n, d, m, &uniform, &mut rng_from(seed))?;
            let dense = sketch.to_dense();
            let k = &inst.k;

            let ks = sketch.right_multiply(k)?;
            let ks_dense = k * &dense;
            let stks = sketch.transpose_apply(&ks)?;
            let stks_dense = dense.tr_mul(&ks_dense);
            let (e1, e2) = (rel_diff(&ks, &ks_dense), rel_diff(&stks, &stks_dense));
            if e1 > PRODUCT_TOLERANCE || e2 > PRODUCT_TOLERANCE {
                return Err(HarnessError::Runtime(format!(
                    "structured product disagrees with dense at n = {n}, m = {m}: {e1:.3e}, {e2:.3e}"
                )));
            }

            let repeats = cfg.bench.repeats;
            let structured_ks_ms = median_ms(repeats, || sketch.right_multiply(k));
            let dense_ks_ms = median_ms(repeats, || k * &dense);
            let structured_stks_ms = median_ms(repeats, || {
                sketch.transpose_apply(&sketch.right_multiply(k)?)
            });
            let dense_stks_ms = median_ms(repeats, || dense.tr_mul(&(k * &dense)));
            rows.push(BenchRow {
                n,
                d,
                m,
                repeats,
                structured_ks_ms,
                dense_ks_ms,
                structured_stks_ms,
                dense_stks_ms,
                ks_speedup: dense_ks_ms / structured_ks_ms,
                stks_speedup: dense_stks_ms / structured_stks_ms,
            });
        }
    }
    Ok(rows)
}
