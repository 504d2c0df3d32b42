//! `qbx`: evaluate layer potentials, map errors, tabulate operator accuracy
//! and run boundary value convergence studies from a JSON config.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qbx::QbxError;

use commands::{NumericalFailure, Output};
use config::{Config, ConfigError};

#[derive(Parser, Debug)]
#[command(name = "qbx", version, about = "Layer potentials by quadrature by expansion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config; every field has a default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    /// Reference values by adaptive quadrature. Defaults to on, except for
    /// `evaluate` where it adds reference columns.
    #[arg(long, global = true, value_enum)]
    oracle: Option<Switch>,
    /// Worker threads; all cores if absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the config's recorded seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Operator values at the nodes or at configured points.
    Evaluate,
    /// Error of a field evaluation over a grid.
    Errormap,
    /// On-surface operator errors against the oracle.
    OperatorTable,
    /// Boundary value convergence study.
    Convergence,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    Ok(Config::from_json(&text)?)
}

/// Writes each file next to its final name and renames it into place.
fn write_outputs(dir: &Path, outputs: &[Output]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let staged: Vec<(PathBuf, PathBuf)> = outputs
        .iter()
        .map(|o| {
            let target = dir.join(&o.path);
            let tmp = dir.join(format!(".{}.partial", o.path));
            fs::write(&tmp, &o.contents).with_context(|| format!("writing {}", tmp.display()))?;
            Ok((tmp, target))
        })
        .collect::<Result<_>>()?;
    for (tmp, target) in staged {
        fs::rename(&tmp, &target).with_context(|| format!("writing {}", target.display()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError("--threads: must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let oracle = |default: bool| cli.oracle.map(|s| s == Switch::On).unwrap_or(default);
    let mut outputs = match cli.command {
        Command::Evaluate => commands::evaluate(&cfg, oracle(false))?,
        Command::Errormap => commands::errormap(&cfg, oracle(true))?,
        Command::OperatorTable => commands::operator_table(&cfg, oracle(true))?,
        Command::Convergence => commands::convergence(&cfg)?,
    };
    outputs.push(Output {
        path: cfg.output.effective_config.clone(),
        contents: serde_json::to_string_pretty(&cfg)? + "\n",
    });
    write_outputs(&cli.output_dir, &outputs)
}

/// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    if err.downcast_ref::<NumericalFailure>().is_some() {
        return 3;
    }
    match err.downcast_ref::<QbxError>() {
        Some(
            QbxError::InvalidArgument(_)
            | QbxError::UnsupportedOperator(_)
            | QbxError::Domain(_)
            | QbxError::DimensionMismatch { .. },
        ) => 2,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
