mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use hyploop::loopmass::FormulaId;

use config::RunConfig;

pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_HORIZON: u8 = 4;
pub const EXIT_ACCEPTANCE: u8 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hyploop::Error),
    #[error("acceptance failure: {0}")]
    Acceptance(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use hyploop::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Acceptance(_) => EXIT_ACCEPTANCE,
            CliError::Io(_) => EXIT_IO,
            CliError::Core(e) => match e {
                E::Horizon { .. } => EXIT_HORIZON,
                E::Numeric { .. } | E::Fit(_) | E::Grunsky { .. } | E::Schwarz(_) | E::Classification { .. } => {
                    EXIT_NUMERIC
                }
                E::Domain(_) | E::InfiniteMass(_) | E::UnverifiedMarking(_) | E::UnsupportedPresentation(_) => {
                    EXIT_CONFIG
                }
                E::Io(_) | E::CacheVersion { .. } | E::CacheChecksum { .. } | E::CacheMalformed(_) => EXIT_IO,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hyploop",
    version,
    about = "Brownian loop masses, length spectra and Laplacian determinants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (overrides the config; 1 gives bit-exact runs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate a length spectrum; writes a cache file and CSV.
    Spectrum { config: PathBuf },
    /// Evaluate a mass formula by id; writes a JSON record.
    Mass { config: PathBuf },
    /// Puncture identity partial sums and extrapolation.
    Identity { config: PathBuf },
    /// Log-determinant of the Laplacian by both routes.
    Detlap { config: PathBuf },
    /// Monte Carlo hit mass on a flat torus.
    Mc { config: PathBuf },
    /// Run the acceptance suite.
    Selftest { config: PathBuf },
}

fn formula_help() -> String {
    let mut s = String::from("Formula ids (for [mass] formula):\n");
    for id in FormulaId::ALL {
        s.push_str(&format!("  {:<28}{}\n", id.name(), id.description()));
    }
    s.push_str(&format!(
        "\nExit codes: 0 success, {EXIT_IO} i/o, {EXIT_CONFIG} config, {EXIT_NUMERIC} numeric, \
         {EXIT_HORIZON} horizon, {EXIT_ACCEPTANCE} acceptance failure"
    ));
    s
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = match &cli.command {
        Command::Spectrum { config }
        | Command::Mass { config }
        | Command::Identity { config }
        | Command::Detlap { config }
        | Command::Mc { config }
        | Command::Selftest { config } => config,
    };
    let mut cfg = RunConfig::load(path)?;
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.out_dir.is_some() {
        cfg.out_dir = cli.out_dir.clone();
    }
    let out = cfg.out_dir();
    std::fs::create_dir_all(&out)?;
    match cli.command {
        Command::Spectrum { .. } => commands::spectrum(&cfg, &out),
        Command::Mass { .. } => commands::mass(&cfg, &out),
        Command::Identity { .. } => commands::identity(&cfg, &out),
        Command::Detlap { .. } => commands::detlap(&cfg, &out),
        Command::Mc { .. } => commands::mc(&cfg, &out),
        Command::Selftest { .. } => commands::selftest(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().after_help(formula_help()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hyploop: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
