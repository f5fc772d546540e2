use sketchkrr_core::kernel::gram;
use sketchkrr_core::synth::{make_dataset, BimodalConfig, RegressionDataset};
use sketchkrr_core::{DMatrix, KernelSpec};

use super::{run_groups, Group, RunOptions};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::records::ExperimentRecord;
use crate::seed::{derive_seed, rng_from, DATA_STREAM};

/// A bimodal sample with its kernel matrix.
pub struct Instance {
    pub data: RegressionDataset,
    pub kernel: KernelSpec,
    pub k: DMatrix<f64>,
    pub lambda: f64,
    pub data_seed: u64,
}

/// Regenerates the data of replicate `replicate` at size `n`.
pub fn bimodal_instance(cfg: &ExperimentConfig, n: usize, replicate: usize) -> Result<Instance> {
    let data_seed = derive_seed(
        cfg.master_seed,
        cfg.experiment.tag(),
        n,
        DATA_STREAM,
        replicate,
    );
    let bimodal = BimodalConfig::new(n, cfg.gamma)?;
    let data = make_dataset(&bimodal, cfg.noise_sd, &mut rng_from(data_seed))?;
    let kernel = cfg.kernel.at(n)?;
    let k = gram(&kernel, &data.x)?;
    Ok(Instance {
        data,
        kernel,
        k,
        lambda: cfg.lambda(n),
        data_seed,
    })
}

/// Approximation-error experiment on bimodal synthetic data.
///
/// Each `(n, replicate)` yields an `exact` record followed by one record per
/// configured method, in config order.
pub fn run_approx_error(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<ExperimentRecord>> {
    if cfg.experiment != ExperimentKind::ApproxError {
        return Err(HarnessError::Config(format!(
            "config describes {}, not approx_error",
            cfg.experiment.tag()
        )));
    }
    let groups: Vec<(usize, usize)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| (0..cfg.replicates).map(move |r| (n, r)))
        .collect();
    run_groups(&groups, opts, |&(n, replicate)| {
        let group = Group {
            cfg,
            dataset: "bimodal",
            n,
            replicate,
            data_seed: derive_seed(
                cfg.master_seed,
                cfg.experiment.tag(),
                n,
                DATA_STREAM,
                replicate,
            ),
        };
        if opts.verbose {
            eprintln!("approx_error: n = {n}, replicate {replicate}");
        }
        match bimodal_instance(cfg, n, replicate) {
            Ok(inst) => group.evaluate(&inst.kernel, &inst.k, &inst.data, None),
            Err(e) => group.failed(&e),
        }
    })
}
