//! `chargeq`: calibration, generation checks, decoherence and sweeps for
//! charge-qubit cluster-state arrays.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use chargeq_core::Guards;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod exit;
mod output;

use commands::Context;

#[derive(Debug, Parser)]
#[command(name = "chargeq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; CSV companions are written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest qubit count for any evolution (also caps the dense path).
    #[arg(long, global = true)]
    max_qubits: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve fluxes and bias currents for the configured array.
    Calibrate,
    /// Fidelity against the closed-form cluster state over a gt grid (CSV).
    Generate,
    /// Generation, periodicity and entropy checks over a range of N.
    Verify,
    /// Per-qubit rates and the cluster T2.
    Decohere,
    /// Monte Carlo sweep over fabrication spreads.
    Sweep,
    /// Wall time of diagonal versus dense evolution.
    Bench,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut guards = Guards::from_env();
    if let Some(m) = cli.max_qubits {
        guards.max_diagonal_qubits = m;
        guards.max_dense_qubits = guards.max_dense_qubits.min(m);
    }
    let ctx = Context {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        guards,
    };
    let result = match cli.command {
        Command::Calibrate => commands::calibrate(&ctx),
        Command::Generate => commands::generate(&ctx),
        Command::Verify => commands::verify(&ctx),
        Command::Decohere => commands::decohere(&ctx),
        Command::Sweep => commands::run_sweep(&ctx),
        Command::Bench => commands::bench(&ctx),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(f) => {
            eprintln!("chargeq: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
