//! Command-line front end: configuration ingestion, dataset I/O and the
//! simulation and fitting commands.

pub mod config;
pub mod io;
pub mod svg;

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Bad flags, unreadable inputs or an invalid configuration.
pub const EXIT_USAGE: i32 = 1;
/// A fit ran but did not produce a trustworthy result.
pub const EXIT_FIT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("{0}")]
    Model(#[from] spinres::Error),
    #[error("fit failed: {0}")]
    Fit(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, err: impl ToString) -> Self {
        CliError::Io { path: path.into(), msg: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Fit(_) => EXIT_FIT,
            _ => EXIT_USAGE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "spinres", version, about = "Spin-ensemble resonator simulation and fitting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Electronic line positions of every configured species, optionally with
    /// a simulated transmission map.
    SimulateEsr(SimulateEsrArgs),
    /// Joint avoided-crossing fit of a field-frequency map.
    FitAnticrossing(FitAnticrossingArgs),
    /// Lorentzian fit of an absorption trace.
    FitAbsorption(FitTraceArgs),
    /// Exponential recovery fit of a relaxation series.
    FitRelaxation(FitRelaxationArgs),
    /// DC and AC g-factors and coupling versus rotation angle.
    SweepAngle(SweepAngleArgs),
    /// Synthetic trace or map with a truth sidecar.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct SimulateEsrArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Probe frequency for the line table [Hz].
    #[arg(long = "freq-hz")]
    pub freq_hz: f64,
    /// Field range `LO:HI` [T]; enables the map output.
    #[arg(long = "field-range-t")]
    pub field_range: Option<String>,
    #[arg(long = "field-points", default_value_t = 201)]
    pub field_points: usize,
    /// Frequency range `LO:HI` [Hz]; defaults to the resonators plus margins.
    #[arg(long = "freq-range-hz")]
    pub freq_range: Option<String>,
    #[arg(long = "freq-points", default_value_t = 801)]
    pub freq_points: usize,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// none, gaussian_relative or gaussian_absolute.
    #[arg(long = "noise-kind", default_value = "none")]
    pub kind: String,
    #[arg(long = "noise-level", default_value_t = 0.0)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitAnticrossingArgs {
    /// Map in `field_T,freq_Hz,power` long format.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// External coupling rate of the resonator [Hz], held fixed.
    #[arg(long = "kappa-c")]
    pub kappa_c: f64,
    /// Internal loss rate of the resonator [Hz], held fixed.
    #[arg(long = "kappa-i")]
    pub kappa_i: f64,
    /// Bare resonator frequency [Hz]; fitted on the reference cut if absent.
    #[arg(long = "f-c")]
    pub f_c: Option<f64>,
    /// Effective g-factor of the spin line along the field.
    #[arg(long = "g-eff", conflicts_with = "slope")]
    pub g_eff: Option<f64>,
    /// Tuning rate of the spin line [Hz/T].
    #[arg(long = "slope-hz-per-t")]
    pub slope: Option<f64>,
    #[arg(long = "init-v")]
    pub init_v: Option<f64>,
    #[arg(long = "init-gamma2")]
    pub init_gamma2: Option<f64>,
    #[arg(long = "init-b-cross")]
    pub init_b_cross: Option<f64>,
    /// Approximate frequency of an uncoupled resonance to subtract [Hz].
    #[arg(long = "extra-resonance")]
    pub extra: Vec<f64>,
    /// Field of the cut used for baseline calibration [T]; the lowest field
    /// by default.
    #[arg(long = "reference-field-t")]
    pub reference_field: Option<f64>,
    /// The power column is in dB (`10 log10 |S21|^2`) instead of linear.
    #[arg(long)]
    pub db: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitTraceArgs {
    /// Trace CSV.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// The power column is in dB (`10 log10 |S21|^2`) instead of linear.
    #[arg(long)]
    pub db: bool,
    /// Result JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional plot of data and fit.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitRelaxationArgs {
    #[command(flatten)]
    pub trace: FitTraceArgs,
    /// Transition frequency for the equilibrium population ratio [Hz].
    #[arg(long = "freq-hz", requires = "temperature")]
    pub freq_hz: Option<f64>,
    #[arg(long = "temperature-k", requires = "freq_hz")]
    pub temperature: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepAngleArgs {
    #[arg(long)]
    pub gy: f64,
    #[arg(long)]
    pub gz: f64,
    /// AC field amplitude per spin [T].
    #[arg(long = "b1")]
    pub b1: f64,
    #[arg(long = "n-spins")]
    pub n_spins: f64,
    #[arg(long, default_value_t = 1.0)]
    pub polarization: f64,
    /// Last angle of the 1° grid [deg].
    #[arg(long = "max-deg", default_value_t = 90)]
    pub max_deg: u32,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// linear, lorentzian, exponential, notch, notch-spin, multifano:N or
    /// anticrossing (a field-frequency map).
    #[arg(long)]
    pub model: String,
    /// Model parameter as `name=value`; repeat for each parameter.
    #[arg(long = "param")]
    pub params: Vec<String>,
    /// Axis kind of a trace: frequency, time or field.
    #[arg(long)]
    pub axis: Option<String>,
    #[arg(long = "x-min")]
    pub x_min: f64,
    #[arg(long = "x-max")]
    pub x_max: f64,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    /// Field grid of a map [T].
    #[arg(long = "field-min-t")]
    pub field_min: Option<f64>,
    #[arg(long = "field-max-t")]
    pub field_max: Option<f64>,
    #[arg(long, default_value_t = 41)]
    pub fields: usize,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Data file; the truth sidecar goes next to it as `<stem>.truth.json`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match thread_count() {
        Ok(Some(n)) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| commands::dispatch(&cli.command)),
            Err(e) => Err(CliError::usage(format!("cannot start thread pool: {e}"))),
        },
        Ok(None) => commands::dispatch(&cli.command),
        Err(e) => Err(e),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_count() -> CliResult<Option<usize>> {
    match std::env::var("SPINRES_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::usage(format!(
                "SPINRES_THREADS must be a positive integer, got '{s}'"
            ))),
        },
        Err(_) => Ok(None),
    }
}
