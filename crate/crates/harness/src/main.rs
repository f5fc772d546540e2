use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sketchkrr_harness::config::PRESET_NAMES;
use sketchkrr_harness::{run, ExperimentConfig, ExperimentKind, HarnessError, Result, RunOptions};

/// Sketched kernel ridge regression experiments.
#[derive(Debug, Parser)]
#[command(name = "sketchkrr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Approximation error of sketched fits against the exact fit on bimodal data.
    ApproxError(CommonArgs),
    /// Test error and runtime per method on a CSV dataset or bimodal data.
    Tradeoff(CommonArgs),
    /// Incoherence and K-satisfiability pass rates.
    Diagnose(CommonArgs),
    /// Structured against dense sketch products.
    BenchProducts(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON experiment config.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in config; defaults to the subcommand's own preset.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Progress messages on standard error.
    #[arg(long, short)]
    verbose: bool,
}

impl Command {
    fn parts(&self) -> (ExperimentKind, &'static str, &CommonArgs) {
        match self {
            Command::ApproxError(a) => (ExperimentKind::ApproxError, "approx_error", a),
            Command::Tradeoff(a) => (ExperimentKind::Tradeoff, "tradeoff", a),
            Command::Diagnose(a) => (ExperimentKind::Diagnose, "diagnose", a),
            Command::BenchProducts(a) => (ExperimentKind::BenchProducts, "bench", a),
        }
    }
}

fn load_config(
    kind: ExperimentKind,
    default_preset: &str,
    args: &CommonArgs,
) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::from_path(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::preset(default_preset)?,
    };
    if cfg.experiment != kind {
        return Err(HarnessError::Config(format!(
            "config describes experiment {}, but the subcommand runs {}",
            cfg.experiment.tag(),
            kind.tag()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if args.threads == Some(0) {
        return Err(HarnessError::Config("--threads must be at least 1".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<()> {
    let (kind, default_preset, args) = cli.command.parts();
    let cfg = load_config(kind, default_preset, args)?;
    let output = run(
        &cfg,
        RunOptions {
            threads: args.threads,
            verbose: args.verbose,
        },
    )?;
    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|source| HarnessError::Io {
                path: path.clone(),
                source,
            })?;
            output.write_csv(BufWriter::new(file))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            output.write_csv(&mut lock)?;
            lock.flush().map_err(|source| HarnessError::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage mistakes are configuration errors
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
