use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;

use config::Preset;

#[derive(Parser, Debug)]
#[command(name = "ldrot", version, about = "Coulomb-cluster MD, Lamb-Dicke line shapes and rotational spectra of HD+")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Configuration file; overrides --preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    preset: Option<Preset>,
    /// Overrides the seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for force and per-ion loops.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "ldrot-out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the MD for every configured temperature and write trajectories.
    Simulate(SimulateArgs),
    /// Motion statistics, transverse histogram and spectral densities.
    Analyze(TrajectoryArgs),
    /// Line shapes and Lamb-Dicke peak estimators.
    Lineshape(TrajectoryArgs),
    /// Synthetic REMPD spectra at each power, Lorentzian fits and budget.
    Spectrum(SimulateArgs),
    /// Systematic-shift budget table.
    Budget(SimulateArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct TrajectoryArgs {
    #[command(flatten)]
    common: Common,
    /// Trajectory written by `simulate`.
    #[arg(long)]
    trajectory: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a.common),
        Command::Analyze(a) => commands::analyze(&a.common, &a.trajectory),
        Command::Lineshape(a) => commands::lineshape(&a.common, &a.trajectory),
        Command::Spectrum(a) => commands::spectrum(&a.common),
        Command::Budget(a) => commands::budget(&a.common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
