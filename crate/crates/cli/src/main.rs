//! `eigenmap` command line: ingest, graph, embed, sweep, baseline, synth.
//!
//! Input files are CSV with languages as rows and parameters as columns,
//! `?` or an empty cell for missing values. Every command writes its files
//! into `--out` only after the whole computation succeeded.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eigenmap::Execution;

use commands::CliError;
use config::CommonArgs;

#[derive(Parser)]
#[command(name = "eigenmap", version, about = "Graph-based spectral embedding of binary feature data")]
struct Cli {
    /// Run single-threaded even when built with the parallel feature
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter by coverage, impute, write cleaned.csv and coverage.json
    Ingest(CommonArgs),
    /// Build a proximity graph; writes graph.graphml, graph.dot, summary.json
    Graph(CommonArgs),
    /// Heat-kernel spectral embedding; writes embedding.csv, eigen.json
    Embed(CommonArgs),
    /// Connectivity, clustering and (ε, t) sweeps with a Gaussian fit
    Sweep(CommonArgs),
    /// Gaussian fits of clustering-variance curves on random binary data
    Baseline(CommonArgs),
    /// Seeded synthetic data with planted clusters
    Synth(CommonArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let (args, name) = match &cli.command {
        Command::Ingest(a) => (a, "ingest"),
        Command::Graph(a) => (a, "graph"),
        Command::Embed(a) => (a, "embed"),
        Command::Sweep(a) => (a, "sweep"),
        Command::Baseline(a) => (a, "baseline"),
        Command::Synth(a) => (a, "synth"),
    };
    let (cfg, explicit_eps_grid) = config::load(args).map_err(CliError::Usage)?;
    let outputs = match name {
        "ingest" => commands::ingest(&cfg)?,
        "graph" => commands::graph(&cfg, exec)?,
        "embed" => commands::embed_cmd(&cfg, exec)?,
        "sweep" => commands::sweep(&cfg, exec)?,
        "baseline" => commands::baseline(&cfg, explicit_eps_grid, exec)?,
        _ => commands::synth(&cfg)?,
    };
    for path in outputs.write(&cfg.out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eigenmap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
