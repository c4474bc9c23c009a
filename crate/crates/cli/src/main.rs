//! `treeharm` experiment runner.
//!
//! Exit codes: 0 success, 1 tolerance failure, 2 usage or config error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::CommonArgs;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, or parameters rejected by the library.
    Config(String),
    /// The run finished but missed its tolerance.
    Tolerance(String),
}

impl CliError {
    pub fn from_library(e: treeharm::Error) -> Self {
        CliError::Config(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Tolerance(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "error: {m}"),
            CliError::Tolerance(m) => write!(f, "tolerance check failed: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "treeharm", version, about = "Harmonic analysis experiments on homogeneous trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Helgason-Fourier transform of a random function and back; reports
    /// per-vertex reconstruction errors.
    InvertRoundtrip {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare the direct and contour-shifted kernels for d <= 2R.
    KernelCheck {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Finite-section norm lower bounds of T_Psi over growing balls.
    NormSweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated radii; defaults to 1..=radius.
        #[arg(long)]
        radii: Option<String>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Lattice section norm of the induced symbol next to the tree norm.
    Transference {
        #[command(flatten)]
        common: CommonArgs,
        /// Radius of the tree section; defaults to min(window, 3).
        #[arg(long)]
        tree_radius: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Spherical function values phi_z(d).
    SphericalTable {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated spectral parameters, e.g. `0,0.5,0.3+0.1i`.
        #[arg(long)]
        z: Option<String>,
        #[arg(long)]
        max_dist: Option<usize>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TREEHARM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("TREEHARM_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::InvertRoundtrip { common } => commands::invert_roundtrip(&common),
        Command::KernelCheck { common } => commands::kernel_check(&common),
        Command::NormSweep { common, radii, max_iters } => {
            commands::norm_sweep(&common, radii, max_iters)
        }
        Command::Transference { common, tree_radius, max_iters } => {
            commands::transference(&common, tree_radius, max_iters)
        }
        Command::SphericalTable { common, z, max_dist } => {
            commands::spherical_table(&common, z, max_dist)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
