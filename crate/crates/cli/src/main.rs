use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use sparse_eit::pipeline::{self, RunConfig};

/// Bayesian EIT reconstruction with sparse interpolation surrogates.
#[derive(Parser, Debug)]
#[command(name = "sparse-eit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve at the truth and write a noisy observation.
    GenerateData(Common),
    /// Build the adaptive surrogate of the forward map (offline stage).
    BuildSurrogate(Common),
    /// Sample the posterior (online stage).
    RunMcmc {
        #[command(flatten)]
        common: Common,
        /// Solve the forward problem at every sample instead of using a surrogate.
        #[arg(long)]
        plain: bool,
        /// Surrogate file; defaults to `<out>/surrogate.txt`.
        #[arg(long, conflicts_with = "plain")]
        surrogate: Option<PathBuf>,
        /// Observation file; defaults to `<out>/observation.txt`.
        #[arg(long)]
        observation: Option<PathBuf>,
    },
    /// Time the offline and online stages against the budget.
    Benchmark(Common),
    /// Compare the adaptive index set with an isotropic total-degree set.
    CompareIndexSets(Common),
}

fn run(cli: Cli) -> anyhow::Result<Vec<PathBuf>> {
    let load = |c: &Common| {
        RunConfig::from_file(&c.config).with_context(|| format!("reading {}", c.config.display()))
    };
    let written = match &cli.command {
        Command::GenerateData(c) => pipeline::generate_data_to_dir(&load(c)?, &c.out)?,
        Command::BuildSurrogate(c) => pipeline::build_surrogate_to_dir(&load(c)?, &c.out)?,
        Command::RunMcmc { common, plain, surrogate, observation } => pipeline::run_mcmc_to_dir(
            &load(common)?,
            &common.out,
            *plain,
            surrogate.as_deref(),
            observation.as_deref(),
        )?,
        Command::Benchmark(c) => pipeline::benchmark_to_dir(&load(c)?, &c.out)?,
        Command::CompareIndexSets(c) => pipeline::compare_index_sets_to_dir(&load(c)?, &c.out)?,
    };
    Ok(written)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
