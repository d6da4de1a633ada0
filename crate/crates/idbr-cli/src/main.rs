use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use idbr_cli::config::Overrides;

/// Inflated discrete beta regression for bounded ordinal responses.
#[derive(Parser)]
#[command(name = "idbr", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Input CSV (overrides the config `data`).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output document path (overrides the config `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampler seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of chains.
    #[arg(long)]
    chains: Option<usize>,
    /// Burn-in iterations per chain.
    #[arg(long, value_name = "N")]
    burn_in: Option<usize>,
    /// Retained draws per chain.
    #[arg(long)]
    keep: Option<usize>,
    /// HPD level in (0, 1).
    #[arg(long)]
    hpd_level: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model to a CSV and write a self-contained fit artifact.
    Fit(Common),
    /// Predict new covariate rows from a fit artifact.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Fit artifact produced by `idbr fit`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run a simulation study and write the metrics report.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Number of replications.
        #[arg(long)]
        replications: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, config, overrides) = match cli.command {
        Command::Fit(common) => ("fit", common.config.clone(), to_overrides(&common, None, None)),
        Command::Predict { common, model } => {
            ("predict", common.config.clone(), to_overrides(&common, model, None))
        }
        Command::Simulate { common, replications } => {
            ("simulate", common.config.clone(), to_overrides(&common, None, replications))
        }
    };
    match idbr_cli::commands::run(name, &config, &overrides) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn to_overrides(
    common: &Common,
    model: Option<PathBuf>,
    replications: Option<usize>,
) -> Overrides {
    Overrides {
        data: common.data.clone(),
        model_path: model,
        out: common.out.clone(),
        seed: common.seed,
        chains: common.chains,
        burn_in: common.burn_in,
        keep: common.keep,
        hpd_level: common.hpd_level,
        replications,
    }
}
