use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gtd_core::experiment::{build_operator, ground_truth};
use gtd_core::solver::{EIG_MAX_ITER, EIG_TOL};
use gtd_core::{max_eigenvalue, run_experiment, ExperimentConfig, GtdError};

/// Low-rank tensor recovery experiments.
#[derive(Parser)]
#[command(name = "gtd", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver listed in a config and write traces, reconstructions
    /// and a summary.
    Run { config: PathBuf },
    /// Print the spectral bound of the operator described by a config.
    Eigs { config: PathBuf },
    /// Print the version.
    Version,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, GtdError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(dir) = std::env::var_os("GTD_OUTPUT_DIR") {
        cfg.output_dir = PathBuf::from(dir);
    }
    Ok(cfg)
}

fn run(cmd: Command) -> Result<(), GtdError> {
    match cmd {
        Command::Run { config } => {
            let cfg = load(&config)?;
            let rows = run_experiment(&cfg)?;
            println!("solver,loss,operator,final_objective,elapsed_s,relative_error_vs_x0");
            for r in rows {
                println!("{}", r.to_csv_line());
            }
            eprintln!("outputs written to {}", cfg.output_dir.display());
        }
        Command::Eigs { config } => {
            let cfg = load(&config)?;
            let x0 = ground_truth(&cfg.input)?;
            let op = build_operator(&cfg.operator, x0.shape())?;
            let bound = max_eigenvalue(op.as_ref(), EIG_TOL, EIG_MAX_ITER, cfg.solver.seed)?;
            println!("operator: {} ({} -> {})", op.name(), op.in_dim(), op.out_dim());
            println!("lambda: {:e}", bound.lambda);
            println!("iterations: {}", bound.iterations_used);
            println!("converged: {}", bound.converged);
        }
        Command::Version => println!("gtd {}", env!("CARGO_PKG_VERSION")),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                GtdError::Numerical(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
