//! Experiment configuration.
//!
//! Configs are JSON. Every size-dependent parameter is a schedule written as a
//! `[coefficient, exponent]` pair meaning `coefficient · n^exponent`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sketchkrr_core::KernelSpec;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Schedule {
    pub coefficient: f64,
    pub exponent: f64,
}

impl From<(f64, f64)> for Schedule {
    fn from((coefficient, exponent): (f64, f64)) -> Self {
        Schedule {
            coefficient,
            exponent,
        }
    }
}

impl From<Schedule> for (f64, f64) {
    fn from(s: Schedule) -> Self {
        (s.coefficient, s.exponent)
    }
}

impl Schedule {
    pub const fn new(coefficient: f64, exponent: f64) -> Self {
        Schedule {
            coefficient,
            exponent,
        }
    }

    pub fn eval(&self, n: usize) -> f64 {
        self.coefficient * (n as f64).powf(self.exponent)
    }

    /// `⌊coefficient · n^exponent⌋`, at least 1.
    pub fn eval_floor(&self, n: usize) -> usize {
        (self.eval(n).floor() as usize).max(1)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.coefficient.is_finite() && self.coefficient > 0.0 && self.exponent.is_finite() {
            Ok(())
        } else {
            Err(HarnessError::Config(format!(
                "{name}: coefficient must be positive and both entries finite, got [{}, {}]",
                self.coefficient, self.exponent
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSchedule {
    Gaussian { bandwidth: Schedule },
    Matern { lengthscale: Schedule, nu: f64 },
}

impl KernelSchedule {
    pub fn at(&self, n: usize) -> Result<KernelSpec> {
        let spec = match self {
            KernelSchedule::Gaussian { bandwidth } => KernelSpec::gaussian(bandwidth.eval(n)),
            KernelSchedule::Matern { lengthscale, nu } => {
                KernelSpec::matern(lengthscale.eval(n), *nu)
            }
        };
        spec.map_err(|e| HarnessError::Config(format!("kernel at n = {n}: {e}")))
    }

    fn validate(&self) -> Result<()> {
        match self {
            KernelSchedule::Gaussian { bandwidth } => bandwidth.validate("kernel.bandwidth"),
            KernelSchedule::Matern { lengthscale, nu } => {
                lengthscale.validate("kernel.lengthscale")?;
                sketchkrr_core::Smoothness::from_nu(*nu)
                    .map(|_| ())
                    .map_err(|e| HarnessError::Config(format!("kernel.nu: {e}")))
            }
        }
    }
}

/// A sketching method to compare against the exact fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    /// Uniform sub-sampling, i.e. accumulation with `m = 1`.
    Nystrom,
    /// `m` accumulated uniform sub-sampling rounds.
    Accumulation {
        m: usize,
    },
    Gaussian,
    /// Very sparse random projection; `s` defaults to `√n`.
    SparseProjection {
        #[serde(default)]
        s: Option<f64>,
    },
    /// Sub-sampling with exact leverage scores at level `λ`.
    LeverageNystrom,
    /// `S = I_n`; debugging aid that must reproduce the exact fit.
    Identity,
}

impl Method {
    /// Label used in records and for seed derivation.
    pub fn label(&self) -> String {
        match self {
            Method::Nystrom => "nystrom".into(),
            Method::Accumulation { m } => format!("accumulation_m{m}"),
            Method::Gaussian => "gaussian".into(),
            Method::SparseProjection { .. } => "sparse_projection".into(),
            Method::LeverageNystrom => "leverage_nystrom".into(),
            Method::Identity => "identity".into(),
        }
    }

    /// Accumulation count for record output, where meaningful.
    pub fn rounds(&self) -> Option<usize> {
        match self {
            Method::Nystrom | Method::LeverageNystrom => Some(1),
            Method::Accumulation { m } => Some(*m),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Method::Accumulation { m: 0 } => {
                Err(HarnessError::Config("accumulation needs m >= 1".into()))
            }
            Method::SparseProjection { s: Some(s) } if !(s.is_finite() && *s >= 1.0) => Err(
                HarnessError::Config(format!("sparse_projection needs s >= 1, got {s}")),
            ),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ApproxError,
    Tradeoff,
    Diagnose,
    BenchProducts,
}

impl ExperimentKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ExperimentKind::ApproxError => "approx_error",
            ExperimentKind::Tradeoff => "tradeoff",
            ExperimentKind::Diagnose => "diagnose",
            ExperimentKind::BenchProducts => "bench_products",
        }
    }
}

/// Response column of a CSV dataset: header name or zero-based index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetColumn {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnoseInstance {
    /// Tight cluster plus isolated points under a unit-bandwidth Gaussian kernel.
    #[default]
    Block,
    /// Bimodal synthetic inputs under the configured kernel.
    Bimodal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseOptions {
    pub instance: DiagnoseInstance,
    /// Number of isolated points in the block instance.
    pub isolated: usize,
    /// Level `δ`; defaults to `0.5/n` for the block instance and `λ` otherwise.
    pub delta: Option<Schedule>,
    /// Sketch dimensions; empty means `2·d_δ`.
    pub d_values: Vec<usize>,
    pub m_values: Vec<usize>,
    /// Monte Carlo draws per `(d, m)`.
    pub seeds: usize,
    /// Constant `c` in condition 2.
    pub c: f64,
    pub include_gaussian: bool,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        DiagnoseOptions {
            instance: DiagnoseInstance::Block,
            isolated: 1,
            delta: None,
            d_values: Vec::new(),
            m_values: vec![1, 4, 16],
            seeds: 200,
            c: sketchkrr_core::spectral::DEFAULT_CONDITION2_CONSTANT,
            include_gaussian: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchOptions {
    /// Fixed sketch dimension; falls back to the `d_schedule`.
    pub d: Option<usize>,
    pub m_values: Vec<usize>,
    /// Timed repetitions after one discarded warm-up; the median is reported.
    pub repeats: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            d: None,
            m_values: vec![2, 4, 8],
            repeats: 11,
        }
    }
}

fn default_gamma() -> f64 {
    0.6
}
fn default_noise_sd() -> f64 {
    0.5
}
fn default_replicates() -> usize {
    30
}
fn default_test_fraction() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub methods: Vec<Method>,
    pub kernel: KernelSchedule,
    pub lambda_schedule: Schedule,
    pub d_schedule: Schedule,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub dataset_path: Option<PathBuf>,
    /// Defaults to the last column.
    #[serde(default)]
    pub target_column: Option<TargetColumn>,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub diagnose: DiagnoseOptions,
    #[serde(default)]
    pub bench: BenchOptions,
}

pub const PRESET_NAMES: [&str; 5] = ["approx_error", "toy", "tradeoff", "diagnose", "bench"];

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::ConfigIo {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = Self::from_json(&text)?;
        // relative dataset paths resolve against the config file
        if let (Some(data), Some(dir)) = (&cfg.dataset_path, path.parent()) {
            if data.is_relative() {
                cfg.dataset_path = Some(dir.join(data));
            }
        }
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "approx_error" => include_str!("../presets/approx_error.json"),
            "toy" => include_str!("../presets/toy.json"),
            "tradeoff" => include_str!("../presets/tradeoff.json"),
            "diagnose" => include_str!("../presets/diagnose.json"),
            "bench" => include_str!("../presets/bench.json"),
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown preset {other:?}; available: {}",
                    PRESET_NAMES.join(", ")
                )))
            }
        };
        Self::from_json(text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.n_list.is_empty() {
            return fail("n_list must not be empty".into());
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < 2) {
            return fail(format!("every n must be at least 2, got {n}"));
        }
        if self.replicates == 0 {
            return fail("replicates must be at least 1".into());
        }
        self.kernel.validate()?;
        self.lambda_schedule.validate("lambda_schedule")?;
        self.d_schedule.validate("d_schedule")?;
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return fail(format!(
                "noise_sd must be non-negative, got {}",
                self.noise_sd
            ));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return fail(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            ));
        }
        for m in &self.methods {
            m.validate()?;
        }
        let needs_methods = matches!(
            self.experiment,
            ExperimentKind::ApproxError | ExperimentKind::Tradeoff
        );
        if needs_methods && self.methods.is_empty() {
            return fail(format!(
                "{} needs at least one method",
                self.experiment.tag()
            ));
        }
        let diag = &self.diagnose;
        if let Some(delta) = &diag.delta {
            delta.validate("diagnose.delta")?;
        }
        if diag.seeds == 0 || diag.m_values.contains(&0) || diag.d_values.contains(&0) {
            return fail("diagnose seeds, d_values and m_values must be positive".into());
        }
        if !(diag.c.is_finite() && diag.c > 0.0) {
            return fail(format!("diagnose.c must be positive, got {}", diag.c));
        }
        if self.bench.repeats == 0
            || self.bench.m_values.is_empty()
            || self.bench.m_values.contains(&0)
        {
            return fail("bench needs repeats >= 1 and positive m_values".into());
        }
        if self.bench.d == Some(0) {
            return fail("bench.d must be positive".into());
        }
        Ok(())
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda_schedule.eval(n)
    }

    pub fn sketch_dim(&self, n: usize) -> usize {
        self.d_schedule.eval_floor(n).min(n)
    }
}
