//! `tusla` command-line entry point.

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tusla_cli::{presets, resolve_output, run_job, CliError, JobKind, RunConfig, OUT_ROOT_ENV};

#[derive(Parser)]
#[command(name = "tusla", version, about = "Run TUSLA experiments from JSON configurations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run any job.
    Run(JobArgs),
    /// Run a hyperparameter sweep.
    Sweep(JobArgs),
    /// Evaluate every theoretical constant and bound.
    Bounds(JobArgs),
    /// Run the two-stage transfer-learning pipeline.
    Transfer(JobArgs),
    /// Simulate the Langevin SDE.
    Sde(JobArgs),
    /// Measure Wasserstein distances and excess risk against the Gibbs target.
    Wasserstein(JobArgs),
    /// Print a preset configuration as JSON.
    Preset {
        /// Preset name.
        #[arg(value_parser = presets::NAMES)]
        name: String,
        /// Directory holding the datasets referenced by dataset presets.
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
    },
}

#[derive(Args)]
struct JobArgs {
    /// Path to the JSON run configuration.
    config: PathBuf,
    /// Output directory of the result bundle.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the seed list, e.g. `--seeds 1,2,3`.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    seeds: Option<Vec<u64>>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Default output root when neither `--out` nor `output_dir` is given.
    #[arg(long, env = OUT_ROOT_ENV)]
    out_root: Option<PathBuf>,
}

fn execute(args: &JobArgs, expected: Option<JobKind>) -> Result<PathBuf, CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seeds) = &args.seeds {
        cfg = cfg.with_seeds(seeds.clone())?;
    }
    if let Some(kind) = expected {
        if cfg.job != kind {
            return Err(CliError::Config(format!("this subcommand runs {kind:?} jobs, the config is a {:?} job", cfg.job)));
        }
    }
    let out = resolve_output(args.out.as_deref(), &cfg, &args.config, args.out_root.as_deref());
    let bundle = run_job(&cfg, &out)?;
    Ok(bundle.dir)
}

fn print_preset(name: &str, data_dir: &Path) -> Result<(), CliError> {
    let cfg = presets::by_name(name, data_dir).ok_or_else(|| CliError::Config(format!("unknown preset '{name}'")))?;
    println!("{}", serde_json::to_string_pretty(&cfg)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => execute(a, None).map(Some),
        Command::Sweep(a) => execute(a, Some(JobKind::Sweep)).map(Some),
        Command::Bounds(a) => execute(a, Some(JobKind::Bounds)).map(Some),
        Command::Transfer(a) => execute(a, Some(JobKind::Transfer)).map(Some),
        Command::Sde(a) => execute(a, Some(JobKind::Sde)).map(Some),
        Command::Wasserstein(a) => execute(a, Some(JobKind::Wasserstein)).map(Some),
        Command::Preset { name, data_dir } => print_preset(name, data_dir).map(|_| None),
    };
    match result {
        Ok(Some(dir)) => {
            println!("{}", dir.join("summary.json").display());
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            let report = e.report();
            eprintln!("{}", serde_json::to_string(&report).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(report.exit_code as u8)
        }
    }
}
