use sketchkrr_core::kernel::gram;
use sketchkrr_core::sketch::unit_uniform;
use sketchkrr_core::synth::{
    make_dataset, split_indices, unit_variance_factors, BimodalConfig, RegressionDataset,
};
use sketchkrr_core::DVector;

use super::{run_groups, Group, RunOptions};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::data::read_dataset;
use crate::error::{HarnessError, Result};
use crate::records::ExperimentRecord;
use crate::seed::{derive_seed, rng_from, DATA_STREAM};

fn subset(data: &RegressionDataset, idx: &[usize]) -> sketchkrr_core::Result<RegressionDataset> {
    Ok(RegressionDataset {
        x: data.x.select_rows(idx)?,
        y: DVector::from_iterator(idx.len(), idx.iter().map(|&i| data.y[i])),
        f_star: DVector::from_iterator(idx.len(), idx.iter().map(|&i| data.f_star[i])),
        noise_sd: data.noise_sd,
    })
}

fn normalize(
    train: &mut RegressionDataset,
    test: &mut RegressionDataset,
) -> sketchkrr_core::Result<()> {
    let factors = unit_variance_factors(&train.x)?;
    train.x.scale_columns(&factors)?;
    test.x.scale_columns(&factors)
}

/// Train/test pair for one replicate drawn from a loaded dataset.
///
/// The test split holds `test_fraction` of all rows; `n` training rows are then
/// drawn without replacement from the remainder.
fn from_file(
    full: &RegressionDataset,
    n: usize,
    test_fraction: f64,
    seed: u64,
) -> sketchkrr_core::Result<(RegressionDataset, RegressionDataset)> {
    let mut rng = rng_from(seed);
    let (mut pool, test_idx) = split_indices(full.len(), test_fraction, &mut rng)?;
    if n > pool.len() {
        return Err(sketchkrr_core::Error::InvalidParameter(format!(
            "n = {n} exceeds the {} rows available for training",
            pool.len()
        )));
    }
    // partial Fisher–Yates: the first n slots end up a uniform sample
    for i in 0..n {
        let j = i
            + ((unit_uniform(&mut rng) * (pool.len() - i) as f64) as usize).min(pool.len() - i - 1);
        pool.swap(i, j);
    }
    let mut train_idx = pool[..n].to_vec();
    train_idx.sort_unstable();
    let mut train = subset(full, &train_idx)?;
    let mut test = subset(full, &test_idx)?;
    normalize(&mut train, &mut test)?;
    Ok((train, test))
}

/// Synthetic fallback: `n` bimodal training rows plus a test set of matching share.
fn synthetic(
    cfg: &ExperimentConfig,
    n: usize,
    seed: u64,
) -> sketchkrr_core::Result<(RegressionDataset, RegressionDataset)> {
    let n_test =
        ((n as f64 * cfg.test_fraction / (1.0 - cfg.test_fraction)).round() as usize).max(1);
    let mut rng = rng_from(seed);
    let all = make_dataset(
        &BimodalConfig::new(n + n_test, cfg.gamma)?,
        cfg.noise_sd,
        &mut rng,
    )?;
    let train_idx: Vec<usize> = (0..n).collect();
    let test_idx: Vec<usize> = (n..n + n_test).collect();
    let mut train = subset(&all, &train_idx)?;
    let mut test = subset(&all, &test_idx)?;
    normalize(&mut train, &mut test)?;
    Ok((train, test))
}

/// Accuracy/runtime trade-off on a CSV dataset, or on bimodal data when no
/// `dataset_path` is configured.
pub fn run_tradeoff(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<ExperimentRecord>> {
    if cfg.experiment != ExperimentKind::Tradeoff {
        return Err(HarnessError::Config(format!(
            "config describes {}, not tradeoff",
            cfg.experiment.tag()
        )));
    }
    let (full, label) = match &cfg.dataset_path {
        Some(path) => {
            let data = read_dataset(path, cfg.target_column.as_ref())?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into());
            (Some(data), label)
        }
        None => (None, "bimodal".to_string()),
    };
    let groups: Vec<(usize, usize)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| (0..cfg.replicates).map(move |r| (n, r)))
        .collect();
    run_groups(&groups, opts, |&(n, replicate)| {
        let data_seed = derive_seed(
            cfg.master_seed,
            cfg.experiment.tag(),
            n,
            DATA_STREAM,
            replicate,
        );
        let group = Group {
            cfg,
            dataset: &label,
            n,
            replicate,
            data_seed,
        };
        if opts.verbose {
            eprintln!("tradeoff: n = {n}, replicate {replicate}");
        }
        let prepared = (|| -> sketchkrr_core::Result<_> {
            let (train, test) = match &full {
                Some(full) => from_file(full, n, cfg.test_fraction, data_seed)?,
                None => synthetic(cfg, n, data_seed)?,
            };
            let kernel = cfg
                .kernel
                .at(n)
                .map_err(|e| sketchkrr_core::Error::InvalidParameter(e.to_string()))?;
            let k = gram(&kernel, &train.x)?;
            Ok((train, test, kernel, k))
        })();
        match prepared {
            Ok((train, test, kernel, k)) => group.evaluate(&kernel, &k, &train, Some(&test)),
            Err(e) => group.failed(&e),
        }
    })
}
