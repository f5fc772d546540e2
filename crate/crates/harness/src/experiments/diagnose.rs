use serde::{Deserialize, Serialize};
use sketchkrr_core::kernel::gram;
use sketchkrr_core::sketch::{build_accumulation, build_gaussian};
use sketchkrr_core::spectral::{check_k_satisfiability, decompose, incoherence, leverage_scores};
use sketchkrr_core::synth::{gen_bimodal, two_cluster_inputs, BimodalConfig, TwoClusterConfig};
use sketchkrr_core::{SamplingDistribution, SketchMatrix, SpectralProfile};

use super::{run_groups, RunOptions};
use crate::config::{DiagnoseInstance, ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::seed::{derive_seed, fnv1a, rng_from, DATA_STREAM};

/// Pass rates of the K-satisfiability conditions for one sketch family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub instance: String,
    pub n: usize,
    pub delta: f64,
    pub d_delta: usize,
    pub d_stat: f64,
    pub incoherence_uniform: f64,
    pub incoherence_leverage: f64,
    pub method: String,
    pub m: Option<usize>,
    pub d: usize,
    pub seeds: usize,
    pub pass1_rate: f64,
    pub pass2_rate: f64,
    pub pass_rate: f64,
}

pub const DIAGNOSTIC_FIELDS: [&str; 14] = [
    "instance",
    "n",
    "delta",
    "d_delta",
    "d_stat",
    "incoherence_uniform",
    "incoherence_leverage",
    "method",
    "m",
    "d",
    "seeds",
    "pass1_rate",
    "pass2_rate",
    "pass_rate",
];

struct Setting {
    n: usize,
    d: usize,
    /// `None` selects the Gaussian sketch.
    m: Option<usize>,
}

struct Prepared {
    label: &'static str,
    profile: SpectralProfile,
    delta: f64,
    d_delta: usize,
    d_stat: f64,
    incoherence_uniform: f64,
    incoherence_leverage: f64,
}

fn prepare(cfg: &ExperimentConfig, n: usize) -> Result<Prepared> {
    let opts = &cfg.diagnose;
    let (label, x) = match opts.instance {
        DiagnoseInstance::Block => {
            let block = TwoClusterConfig {
                n,
                isolated: opts.isolated,
                ..TwoClusterConfig::default()
            };
            ("block", two_cluster_inputs(&block)?)
        }
        DiagnoseInstance::Bimodal => {
            let seed = derive_seed(cfg.master_seed, cfg.experiment.tag(), n, DATA_STREAM, 0);
            (
                "bimodal",
                gen_bimodal(&BimodalConfig::new(n, cfg.gamma)?, &mut rng_from(seed))?,
            )
        }
    };
    let profile = decompose(&gram(&cfg.kernel.at(n)?, &x)?)?;
    let delta = opts.delta.map_or_else(|| cfg.lambda(n), |s| s.eval(n));
    let uniform = SamplingDistribution::uniform(n)?;
    let lev = leverage_scores(&profile, delta)?;
    let lev = SamplingDistribution::from_leverage(&lev)?;
    Ok(Prepared {
        label,
        delta,
        d_delta: profile.d_delta(delta),
        d_stat: profile.statistical_dimension(delta),
        incoherence_uniform: incoherence(&profile, delta, &uniform)?,
        incoherence_leverage: incoherence(&profile, delta, &lev)?,
        profile,
    })
}

fn method_label(m: Option<usize>) -> String {
    match m {
        Some(1) => "nystrom".into(),
        Some(m) => format!("accumulation_m{m}"),
        None => "gaussian".into(),
    }
}

/// Monte Carlo pass rates of both conditions over `seeds` independent sketches.
///
/// Sketch dimensions default to `2·d_δ` (at least 1, at most `n`) when none are
/// configured.
pub fn run_diagnose(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<DiagnosticRow>> {
    if cfg.experiment != ExperimentKind::Diagnose {
        return Err(HarnessError::Config(format!(
            "config describes {}, not diagnose",
            cfg.experiment.tag()
        )));
    }
    let diag = &cfg.diagnose;
    let mut prepared = Vec::with_capacity(cfg.n_list.len());
    let mut settings = Vec::new();
    for (idx, &n) in cfg.n_list.iter().enumerate() {
        let p = prepare(cfg, n)?;
        let dims: Vec<usize> = if diag.d_values.is_empty() {
            vec![(2 * p.d_delta).clamp(1, n)]
        } else {
            diag.d_values.clone()
        };
        for &d in &dims {
            let families = diag
                .m_values
                .iter()
                .map(|&m| Some(m))
                .chain(diag.include_gaussian.then_some(None));
            for m in families {
                settings.push((idx, Setting { n, d, m }));
            }
        }
        prepared.push(p);
    }

    let prepared = &prepared;
    let rows = run_groups(&settings, opts, |(idx, s)| {
        let p = &prepared[*idx];
        let method = method_label(s.m);
        if opts.verbose {
            eprintln!("diagnose: n = {}, d = {}, {method}", s.n, s.d);
        }
        let stream = fnv1a(&format!("{method}_d{}", s.d));
        let uniform = SamplingDistribution::uniform(s.n).expect("n validated positive");
        let (mut pass1, mut pass2, mut both) = (0usize, 0usize, 0usize);
        for seed_idx in 0..diag.seeds {
            let mut rng = rng_from(derive_seed(
                cfg.master_seed,
                cfg.experiment.tag(),
                s.n,
                stream,
                seed_idx,
            ));
            let sketch: sketchkrr_core::Result<SketchMatrix> = match s.m {
                Some(m) => build_accumulation(s.n, s.d, m, &uniform, &mut rng),
                None => build_gaussian(s.n, s.d, &mut rng),
            };
            let report =
                sketch.and_then(|sk| check_k_satisfiability(&sk, &p.profile, p.delta, diag.c));
            // a failed build or check counts as a failed trial
            if let Ok(r) = report {
                pass1 += r.pass1 as usize;
                pass2 += r.pass2 as usize;
                both += r.passed() as usize;
            }
        }
        let rate = |k: usize| k as f64 / diag.seeds as f64;
        vec![DiagnosticRow {
            instance: p.label.into(),
            n: s.n,
            delta: p.delta,
            d_delta: p.d_delta,
            d_stat: p.d_stat,
            incoherence_uniform: p.incoherence_uniform,
            incoherence_leverage: p.incoherence_leverage,
            method,
            m: s.m,
            d: s.d,
            seeds: diag.seeds,
            pass1_rate: rate(pass1),
            pass2_rate: rate(pass2),
            pass_rate: rate(both),
        }]
    })?;
    Ok(rows)
}
