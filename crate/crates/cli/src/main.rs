//! `mqg`: simulation and verification driver.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 suspected blow-up,
//! 3 a check ran and failed.

mod commands;
mod emit;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "mqg", version, about = "Modified quasi-geostrophic simulator and verification suites")]
struct Cli {
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `out_dir` from the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Integrate the equation and write diagnostics and snapshots.
    Simulate,
    /// Certify `Ω ω' + Υ < 0` for the configured modulus.
    CertifyMoc,
    /// Real-space kernel oracles against the spectral operators.
    KernelCheck,
    /// Littlewood-Paley partition, Bernstein and commutator suite.
    LpCheck,
    /// Compare a run with its `λ`-rescaled counterpart.
    ScalingCheck,
    /// Distance of Friedrichs-regularized runs from the unregularized one.
    FriedrichsCheck,
}

/// How a command that ran to the end came out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Blowup,
    Fail,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Blowup => 2,
            Status::Fail => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command, cli.config, cli.out, cli.threads) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            let blowup = e
                .downcast_ref::<mqg_core::Error>()
                .is_some_and(|e| matches!(e, mqg_core::Error::BlowupSuspected { .. }));
            eprintln!("error: {e:#}");
            ExitCode::from(if blowup { 2 } else { 1 })
        }
    }
}
