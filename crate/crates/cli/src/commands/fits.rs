//! Absorption and relaxation trace fits.

use spinres::dynamics::{boltzmann_ratio, polarization};
use spinres::fitlab::{fit_exponential, fit_lorentzian, FitResult, Model};
use spinres::spincore::{AxisKind, Spectrum1D};

use super::{insignificant, positive, FitReport, Status};
use crate::svg::{line_plot, Series};
use crate::{io, CliError, CliResult, FitRelaxationArgs, FitTraceArgs};

fn plot(path: &std::path::Path, title: &str, data: &Spectrum1D, model: Model, fit: &FitResult) -> CliResult<()> {
    let p = fit.values();
    let curve: Vec<f64> = data.axis().iter().map(|&x| model.eval(x, &p)).collect();
    let kind = data.kind();
    let svg = line_plot(
        title,
        &format!("{} [{}]", kind.name(), kind.unit()),
        "power",
        &[
            Series { label: "data", x: data.axis(), y: data.values(), points: true },
            Series { label: "fit", x: data.axis(), y: &curve, points: false },
        ],
    );
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
}

fn expect_axis(data: &Spectrum1D, want: AxisKind, path: &std::path::Path) -> CliResult<()> {
    if data.kind() != want {
        return Err(CliError::usage(format!(
            "{}: expected a {} trace, found {}",
            path.display(),
            want.name(),
            data.kind().name()
        )));
    }
    Ok(())
}

pub(super) fn absorption(a: &FitTraceArgs) -> CliResult<()> {
    let data = io::read_trace(&a.input, a.db)?;
    expect_axis(&data, AxisKind::Frequency, &a.input)?;
    let mut report = FitReport::new("fit-absorption", Model::Lorentzian.to_string());
    match fit_lorentzian(&data) {
        Err(e) => report = report.failed(e.to_string()),
        Ok(fit) => {
            for (key, name) in [("center_hz", "center"), ("fwhm_hz", "fwhm"), ("depth", "depth")] {
                report.derived.insert(key.into(), fit.value(name));
                report.derived.insert(format!("{key}_sigma"), fit.sigma(name));
            }
            // a dip narrower than the sample spacing is a noise spike
            let step = data.axis().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            if insignificant(&fit, "depth") || fit.value("fwhm") < step {
                report.status = Status::Null;
            } else if !fit.converged {
                report = report.failed(format!("Lorentzian fit did not converge: {}", fit.reason));
            }
            if let Some(svg) = &a.svg {
                plot(svg, "absorption", &data, Model::Lorentzian, &fit)?;
            }
            report.fit = Some(fit);
        }
    }
    summary(&report);
    report.finish(&a.out)
}

pub(super) fn relaxation(a: &FitRelaxationArgs) -> CliResult<()> {
    let data = io::read_trace(&a.trace.input, a.trace.db)?;
    expect_axis(&data, AxisKind::Time, &a.trace.input)?;
    let mut report = FitReport::new("fit-relaxation", Model::Exponential.to_string());
    if let (Some(f), Some(t)) = (a.freq_hz, a.temperature) {
        positive("freq-hz", f)?;
        positive("temperature-k", t)?;
        report.derived.insert("boltzmann_ratio".into(), boltzmann_ratio(f, t)?);
        report.derived.insert("polarization".into(), polarization(f, t)?);
    }
    match fit_exponential(&data) {
        Err(e) => report = report.failed(e.to_string()),
        Ok(fit) => {
            report.derived.insert("t1_s".into(), fit.value("t1"));
            report.derived.insert("t1_s_sigma".into(), fit.sigma("t1"));
            report.derived.insert("equilibrium".into(), fit.value("a"));
            if insignificant(&fit, "b") {
                report.status = Status::Null;
            } else if !fit.converged {
                report = report.failed(format!("recovery fit did not converge: {}", fit.reason));
            }
            if let Some(svg) = &a.trace.svg {
                plot(svg, "recovery", &data, Model::Exponential, &fit)?;
            }
            report.fit = Some(fit);
        }
    }
    summary(&report);
    report.finish(&a.trace.out)
}

fn summary(r: &FitReport) {
    let values: Vec<String> = r
        .derived
        .iter()
        .filter(|(k, _)| !k.ends_with("_sigma"))
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    println!("{}: {:?} {}", r.command, r.status, values.join(" "));
}
