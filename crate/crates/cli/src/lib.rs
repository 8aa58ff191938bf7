//! Command-line front end: sweep drivers around the library, with CSV/JSON
//! output for external plotting.
//!
//! Every output file starts with a `#`-prefixed JSON metadata header
//! (units convention, parameters, component versions, timestamp); the data
//! section below it is byte-reproducible for fixed inputs and seed,
//! independent of the worker-thread count.

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;
pub mod sweep;

pub const CLI_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "solimg",
    version,
    about = "Information content of pixelized density images of a 1D/2D Bose gas"
)]
pub struct Cli {
    /// Flat key=value configuration file; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,

    /// Worker threads for sweeps and sampling (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Print the output-column documentation for the subcommand and exit.
    #[arg(long, global = true)]
    pub schema: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean-field (Poisson) information-rate sweeps: closed forms,
    /// quadrature, pixel sums and the finite-box variant.
    FisherMf(commands::fisher_mf::Args),
    /// Gaussian-image Fisher information from Bogoliubov statistics.
    FisherGauss(commands::fisher_gauss::Args),
    /// Phonon wavenumbers, energies and mode-function tables.
    Modes(commands::modes::Args),
    /// Beyond-mean-field density profiles across the notch.
    Density(commands::density::Args),
    /// Correlation kernel on a spatial grid.
    Corr(commands::corr::Args),
    /// Gain construction, noise split and Monte Carlo bound check.
    Snr(commands::snr::Args),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FisherMf(_) => "fisher-mf",
            Command::FisherGauss(_) => "fisher-gauss",
            Command::Modes(_) => "modes",
            Command::Density(_) => "density",
            Command::Corr(_) => "corr",
            Command::Snr(_) => "snr",
        }
    }
}

/// Parse argv with config-file expansion applied (config entries become
/// flags placed before the user's own, so the command line wins).
pub fn parse_args<I, S>(argv: I) -> anyhow::Result<Cli>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let expanded = config::expand_config_args(&argv)?;
    Ok(Cli::try_parse_from(expanded)?)
}

/// Execute a parsed invocation.
pub fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        // Ignore the error when a global pool already exists (tests invoke
        // run() repeatedly in one process).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    if cli.schema {
        print!("{}", schema(cli.command.name()));
        return Ok(());
    }
    match &cli.command {
        Command::FisherMf(args) => commands::fisher_mf::run(args),
        Command::FisherGauss(args) => commands::fisher_gauss::run(args),
        Command::Modes(args) => commands::modes::run(args),
        Command::Density(args) => commands::density::run(args),
        Command::Corr(args) => commands::corr::run(args),
        Command::Snr(args) => commands::snr::run(args),
    }
}

/// Column documentation for each subcommand's output.
pub fn schema(command: &str) -> String {
    let body = match command {
        "fisher-mf" => commands::fisher_mf::SCHEMA,
        "fisher-gauss" => commands::fisher_gauss::SCHEMA,
        "modes" => commands::modes::SCHEMA,
        "density" => commands::density::SCHEMA,
        "corr" => commands::corr::SCHEMA,
        "snr" => commands::snr::SCHEMA,
        _ => "",
    };
    format!("# {command} output schema\n{body}")
}
