mod anticrossing;
mod fits;
mod gen;
mod simulate;
mod sweep;

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use spinres::fitlab::FitResult;
use spinres::synth::{NoiseKind, NoiseSpec};

use crate::{io, CliError, CliResult, Command, NoiseArgs};

pub(crate) fn dispatch(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::SimulateEsr(a) => simulate::run(a),
        Command::FitAnticrossing(a) => anticrossing::run(a),
        Command::FitAbsorption(a) => fits::absorption(a),
        Command::FitRelaxation(a) => fits::relaxation(a),
        Command::SweepAngle(a) => sweep::run(a),
        Command::Gen(a) => gen::run(a),
    }
}

/// Parses `LO:HI` with `LO < HI`.
pub(crate) fn parse_range(flag: &str, s: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::usage(format!("--{flag} expects LO:HI with LO < HI, got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub(crate) fn noise_spec(a: &NoiseArgs) -> CliResult<NoiseSpec> {
    let kind = NoiseKind::parse(&a.kind)
        .ok_or_else(|| CliError::usage(format!("unknown noise kind '{}'", a.kind)))?;
    NoiseSpec::new(kind, a.level, a.seed).map_err(|e| CliError::usage(e.to_string()))
}

pub(crate) fn positive(flag: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::usage(format!("--{flag} must be > 0, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub(crate) enum Status {
    Ok,
    /// The fit converged but found no significant signal.
    Null,
    Failed,
}

/// Result document written by the fitting commands.
#[derive(Debug, Serialize)]
pub(crate) struct FitReport {
    pub command: &'static str,
    pub model: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Physical quantities derived from the fit, in SI units.
    pub derived: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult>,
}

impl FitReport {
    pub fn new(command: &'static str, model: impl Into<String>) -> Self {
        FitReport {
            command,
            model: model.into(),
            status: Status::Ok,
            error: None,
            derived: BTreeMap::new(),
            fit: None,
        }
    }

    pub fn failed(mut self, msg: impl Into<String>) -> Self {
        self.status = Status::Failed;
        self.error = Some(msg.into());
        self
    }

    /// Writes the report and maps a failed status to the fit-failure exit.
    pub fn finish(self, path: &Path) -> CliResult<()> {
        io::write_json(path, &self)?;
        match self.status {
            Status::Failed => Err(CliError::Fit(self.error.unwrap_or_else(|| "fit did not converge".into()))),
            _ => Ok(()),
        }
    }
}

/// Signal amplitudes below this many standard errors count as no detection.
/// The dip position is searched over the whole trace, hence the margin.
pub(crate) const DETECTION_SIGMA: f64 = 5.0;

/// `true` when `|value| <= DETECTION_SIGMA * sigma` or the uncertainty is
/// unavailable.
pub(crate) fn insignificant(fit: &FitResult, name: &str) -> bool {
    let (v, s) = (fit.value(name), fit.sigma(name));
    !s.is_finite() || v.abs() <= DETECTION_SIGMA * s
}
