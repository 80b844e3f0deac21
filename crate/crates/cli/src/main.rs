//! Command-line front end binding profiles, the mode solver, Bogolubov
//! extraction, Fock constructions, constraint checks, radiation statistics,
//! and spectra into reproducible runs.
//!
//! Exit codes: 0 on success, 1 for configuration or usage errors, 2 for
//! numerical failures (tolerance or cutoff not met).

mod commands;
mod config;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use commands::{resolve_out_dir, CliError, RunContext};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "vacrad",
    version,
    about = "Photon production from the vacuum in a time-dependent dielectric: \
             mode sweeps, squeezed states, covariant-constraint checks, \
             transition-radiation statistics, spectra"
)]
struct Cli {
    /// Configuration file (sectioned key = value grammar; see README)
    #[arg(short, long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one value, e.g. --set profile.tau=0.5 (repeatable)
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,

    /// Output directory (overrides output.dir and VACRAD_OUT)
    #[arg(short, long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for parallel sweeps (0 = library default)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the dielectric profile on a time grid
    Profile,
    /// Integrate one mode and dump its trajectory
    Modes,
    /// Sweep the k-grid and emit per-mode Bogolubov coefficients
    Bogolubov,
    /// Photon-number spectrum and radiated-energy estimate
    Spectrum {
        /// Report the energy fraction inside an [LO, HI] band in eV
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        band: Option<Vec<f64>>,
    },
    /// Build the two-mode squeezed in-vacuum and dump it
    Squeeze,
    /// Covariant-quantization constraint checks on the coherent sector
    Constraints,
    /// Odd-photon emission statistics of a current in the squeezed vacuum
    Radiate,
    /// Print the canonical normalized configuration and exit
    Config,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            RunConfig::parse(&text).map_err(CliError::Config)?
        }
        None => RunConfig::default(),
    };
    for assignment in &cli.set {
        config
            .apply_override(assignment)
            .map_err(CliError::Config)?;
    }
    Ok(config)
}

#[cfg(feature = "parallel")]
fn init_threads(threads: usize) {
    if threads > 0 {
        // Ignore the error if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn init_threads(_threads: usize) {}

fn execute(cli: Cli) -> Result<(), CliError> {
    init_threads(cli.threads);
    let config = load_config(&cli)?;
    let out_dir = resolve_out_dir(cli.out.clone(), &config);
    let mut ctx = RunContext::new(config, out_dir)?;
    let name = match &cli.command {
        Command::Profile => {
            ctx.cmd_profile()?;
            "profile"
        }
        Command::Modes => {
            ctx.cmd_modes()?;
            "modes"
        }
        Command::Bogolubov => {
            ctx.cmd_bogolubov()?;
            "bogolubov"
        }
        Command::Spectrum { band } => {
            let band = band.as_ref().map(|b| (b[0], b[1]));
            ctx.cmd_spectrum(band)?;
            "spectrum"
        }
        Command::Squeeze => {
            ctx.cmd_squeeze()?;
            "squeeze"
        }
        Command::Constraints => {
            ctx.cmd_constraints()?;
            "constraints"
        }
        Command::Radiate => {
            ctx.cmd_radiate()?;
            "radiate"
        }
        Command::Config => {
            ctx.cmd_config()?;
            return Ok(()); // no artifacts, no manifest
        }
    };
    ctx.write_manifest(name)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
