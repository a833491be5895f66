//! qazb — finite-dimensional workbench for the quantum az+b group at an
//! even root of unity.

mod calibrate;
mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "qazb",
    about = "Finite lattice model of the quantum az+b group: canonical operator pair, \
             quantum exponential solver, multiplicative unitary and representation theory",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a lattice model with the canonical operator pair
    Gen {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve for the quantum exponential table and attach it to the model
    SolveQexp {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long, default_value_t = 40)]
        sweeps: usize,
        #[arg(long, default_value_t = 0.5)]
        window: f64,
    },
    /// Run a gated residual check (domain | pentagon | delta | rep)
    Check {
        which: String,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        rep_file: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        window: f64,
        #[arg(long, default_value_t = 1.0)]
        gate_scale: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build a unitary representation from a parameter-pair spec
    Rep {
        #[arg(long)]
        model: PathBuf,
        /// regular | onedim:K,J | conjugate:SEED
        #[arg(long)]
        cd: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompose a representation back into its parameter pair
    Decompose {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        rep_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gate_scale: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Pretty-print a stored report; exit code follows its pass flags
    Report { file: PathBuf },
    /// Measure the calibration record on a reference lattice
    Calibrate {
        #[arg(long, default_value_t = 6)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Gen { n, m, seed, out } => commands::cmd_gen(*n, *m, *seed, out),
        Cmd::SolveQexp {
            model,
            out,
            report,
            seed,
            starts,
            sweeps,
            window,
        } => commands::cmd_solve_qexp(model, out, report, *seed, *starts, *sweeps, *window),
        Cmd::Check {
            which,
            model,
            rep_file,
            window,
            gate_scale,
            report,
        } => commands::cmd_check(model, which, rep_file, *window, *gate_scale, report),
        Cmd::Rep { model, cd, out } => commands::cmd_rep(model, cd, out),
        Cmd::Decompose {
            model,
            rep_file,
            out,
            gate_scale,
            report,
        } => commands::cmd_decompose(model, rep_file, out, *gate_scale, report),
        Cmd::Report { file } => commands::cmd_report(file),
        Cmd::Calibrate { n, m, seed, out } => commands::cmd_calibrate(*n, *m, *seed, out),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::EXIT_PRECONDITION as u8)
        }
    }
}
