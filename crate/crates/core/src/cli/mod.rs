//! Command-line front end.

pub mod commands;
pub mod config;
pub mod output;
pub mod tables;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::error::Error;
use crate::optimize::{Engine, Sweep};
use crate::verify::VerifyGrid;

use self::config::{config_echo, load_config, parse_list, ConfigArgs};
use self::output::{Format, RunManifest, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::ConfigInvalid(_) | Error::DomainError(_)) => EXIT_USAGE,
            _ => EXIT_VERIFY_FAILED,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qtel", version, about = "Entanglement-assisted telescope network simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent. A manifest is written next
    /// to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    FisherPhi,
    ResolutionAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    BruteForce,
    ClosedForm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outcome probabilities of the star-mode mixture.
    Probs {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recompute the published optimal-baseline tables.
    Tables {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fisher information against phase, or resolution against baseline.
    Curve {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t = SweepArg::FisherPhi)]
        sweep: SweepArg,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Sweep start; defaults to -π for phase and 0.5 for baseline.
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        /// Sweep end; defaults to π for phase and 12 for baseline.
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Local minima of the resolution over the baseline.
    Optimize {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0.5)]
        alpha_min: f64,
        #[arg(long, default_value_t = 12.0)]
        alpha_max: f64,
        #[arg(long, value_enum, default_value_t = EngineArg::BruteForce)]
        engine: EngineArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare brute-force Fisher information with the closed forms.
    Verify {
        /// Loss probabilities, comma separated.
        #[arg(long)]
        p_values: Option<String>,
        /// Indistinguishability values, comma separated.
        #[arg(long)]
        indist_values: Option<String>,
        /// Occupancies, comma separated.
        #[arg(long)]
        epsilon_values: Option<String>,
        /// Phases, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        phi_values: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn unit_list(key: &str, raw: &Option<String>, default: Vec<f64>) -> Result<Vec<f64>, Error> {
    let Some(raw) = raw else { return Ok(default) };
    let values = parse_list(key, raw)?;
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::ConfigInvalid(format!("{key}: {v} is outside [0, 1]")));
    }
    Ok(values)
}

fn emit(table: &Table, output: &OutputArgs, echo: &[(String, String)]) -> Result<(), CliError> {
    let text = table.render(output.format);
    match &output.out {
        None => print!("{text}"),
        Some(path) => {
            let io = |source| CliError::Io {
                path: path.clone(),
                source,
            };
            std::fs::write(path, &text).map_err(io)?;
            let mut manifest = RunManifest::new(&table.command, echo);
            manifest.record(path, text.as_bytes());
            let manifest_path = RunManifest::path_for(path);
            std::fs::write(&manifest_path, manifest.to_json()).map_err(|source| CliError::Io {
                path: manifest_path.clone(),
                source,
            })?;
        }
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Probs { config, output } => {
            let cfg = load_config(&config)?;
            emit(&commands::cmd_probs(&cfg)?, &output, &config_echo(&cfg))?;
        }
        Command::Tables { config, output } => {
            let cfg = load_config(&config)?;
            let table = commands::cmd_tables(&cfg)?;
            emit(&table, &output, &table.header.clone())?;
        }
        Command::Curve {
            config,
            sweep,
            samples,
            from,
            to,
            output,
        } => {
            let cfg = load_config(&config)?;
            let sweep = match sweep {
                SweepArg::FisherPhi => Sweep::FisherVsPhi,
                SweepArg::ResolutionAlpha => Sweep::ResolutionVsAlpha,
            };
            let (lo, hi) = sweep.default_range();
            let range = (from.unwrap_or(lo), to.unwrap_or(hi));
            let table = commands::cmd_curve(&cfg, sweep, range, samples)?;
            emit(&table, &output, &config_echo(&cfg))?;
        }
        Command::Optimize {
            config,
            alpha_min,
            alpha_max,
            engine,
            output,
        } => {
            let cfg = load_config(&config)?;
            let engine = match engine {
                EngineArg::BruteForce => Engine::BruteForceFisher,
                EngineArg::ClosedForm => Engine::ClosedFormFisher,
            };
            let table = commands::cmd_optimize(&cfg, (alpha_min, alpha_max), engine)?;
            emit(&table, &output, &config_echo(&cfg))?;
        }
        Command::Verify {
            p_values,
            indist_values,
            epsilon_values,
            phi_values,
            output,
        } => {
            let d = VerifyGrid::default();
            let phi_values = match &phi_values {
                None => d.phi_values.clone(),
                Some(raw) => parse_list("phi_values", raw)?,
            };
            let grid = VerifyGrid {
                p_values: unit_list("p_values", &p_values, d.p_values.clone())?,
                indist_values: unit_list("indist_values", &indist_values, d.indist_values.clone())?,
                epsilon_values: unit_list("epsilon_values", &epsilon_values, d.epsilon_values.clone())?,
                phi_values,
                ..d
            };
            let (report, table) = commands::cmd_verify(&grid)?;
            eprint!("{}", report.render());
            emit(&table, &output, &table.header.clone())?;
            if !report.passed() {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Sizes the global thread pool from `QTEL_THREADS` when set.
pub fn init_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("QTEL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::ConfigInvalid(format!("QTEL_THREADS must be a positive integer, got '{raw}'")))?;
    // A pool may already exist when called more than once in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
