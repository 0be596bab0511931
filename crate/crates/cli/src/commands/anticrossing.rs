//! Baseline correction and joint avoided-crossing fit of a field-frequency
//! map.

use spinres::cavity::{cooperativity, notch_s21, SpinLine};
use spinres::fitlab::{
    fit_anticrossing_map, fit_multifano, least_squares_fit, normalize_and_subtract, AnticrossingInit,
    AnticrossingMap, FanoHint, FitOptions, FitProblem, FitResult, Model, MultiFanoFit,
};
use spinres::spincore::constants::MU_B_OVER_H;
use spinres::spincore::{FieldMap2D, Resonator, Spectrum1D};

use super::{positive, FitReport};
use crate::{io, CliError, CliResult, FitAnticrossingArgs};

pub const CORRECTED_HEADER: [&str; 4] = ["field_T", "freq_Hz", "corrected", "model"];

pub(super) fn run(a: &FitAnticrossingArgs) -> CliResult<()> {
    let kappa_c = positive("kappa-c", a.kappa_c)?;
    let kappa_i = positive("kappa-i", a.kappa_i)?;
    let slope = match (a.g_eff, a.slope) {
        (Some(g), None) => MU_B_OVER_H * positive("g-eff", g)?,
        (None, Some(s)) if s.is_finite() && s != 0.0 => s,
        (None, Some(s)) => return Err(CliError::usage(format!("--slope-hz-per-t must be nonzero, got {s}"))),
        _ => return Err(CliError::usage("one of --g-eff or --slope-hz-per-t is required")),
    };
    if let Some(f) = a.f_c {
        positive("f-c", f)?;
    }
    for f in &a.extra {
        positive("extra-resonance", *f)?;
    }
    let map = io::read_map(&a.input, a.db)?;
    if map.freqs().len() < 10 {
        return Err(CliError::usage(format!("{}: too few frequency points", a.input.display())));
    }
    let fit_json = a.out.join("fit.json");
    let mut report = FitReport::new("fit-anticrossing", "anticrossing");

    let outcome = pipeline(a, &map, kappa_c, kappa_i, slope, &mut report);
    match outcome {
        Ok((res, fit, cuts)) => {
            let (v, gamma2) = (fit.value("v"), fit.value("gamma2"));
            let d = &mut report.derived;
            d.insert("f_c_hz".into(), res.f_c);
            d.insert("f_c_hz_sigma".into(), fit.sigma("f_c"));
            d.insert("kappa_c_hz".into(), kappa_c);
            d.insert("kappa_i_hz".into(), kappa_i);
            for (key, name) in [("v_hz", "v"), ("gamma2_hz", "gamma2"), ("b_cross_t", "b_cross"), ("slope_hz_per_t", "slope")] {
                d.insert(key.into(), fit.value(name));
                d.insert(format!("{key}_sigma"), fit.sigma(name));
            }
            d.insert("splitting_hz".into(), 2.0 * v);
            match cooperativity(v, kappa_c, gamma2) {
                Ok(c) => {
                    d.insert("cooperativity".into(), c);
                }
                Err(e) => report = report.failed(e.to_string()),
            }
            if !fit.converged {
                report = report.failed(format!("joint fit did not converge: {}", fit.reason));
            }
            write_corrected(&a.out, &map, &cuts, &res, &fit)?;
            report.fit = Some(fit);
        }
        Err(msg) => report = report.failed(msg),
    }
    let summary: Vec<String> = ["v_hz", "gamma2_hz", "b_cross_t", "cooperativity"]
        .iter()
        .filter_map(|k| report.derived.get(*k).map(|v| format!("{k}={v}")))
        .collect();
    println!("fit-anticrossing: {:?} {}", report.status, summary.join(" "));
    report.finish(&fit_json)
}

type Outcome = (Resonator, FitResult, Vec<Spectrum1D>);

/// Reference-cut calibration, per-cut correction and the joint fit. Errors
/// past input validation are fit failures.
fn pipeline(
    a: &FitAnticrossingArgs,
    map: &FieldMap2D,
    kappa_c: f64,
    kappa_i: f64,
    slope: f64,
    report: &mut FitReport,
) -> Result<Outcome, String> {
    let fields = map.fields();
    let ref_idx = match a.reference_field {
        Some(b) => (0..fields.len())
            .min_by(|&i, &j| (fields[i] - b).abs().total_cmp(&(fields[j] - b).abs()))
            .unwrap_or(0),
        None => 0,
    };
    let reference = map.cut(ref_idx);
    let kappa = kappa_c + kappa_i;
    let n = 1 + a.extra.len();
    let hints: Option<Vec<FanoHint>> = a.f_c.map(|f| {
        std::iter::once(f)
            .chain(a.extra.iter().copied())
            .map(|center| FanoHint { center, fwhm: kappa })
            .collect()
    });
    let fano = fit_multifano(&reference, n, hints.as_deref()).map_err(|e| format!("reference cut: {e}"))?;
    report.derived.insert("reference_field_t".into(), fields[ref_idx]);

    let coupled = coupled_index(&fano, a.f_c, &a.extra);
    let cuts: Vec<Spectrum1D> = (0..fields.len())
        .map(|i| normalize_and_subtract(&map.cut(i), &fano, &[coupled]))
        .collect::<spinres::Result<_>>()
        .map_err(|e| format!("baseline correction: {e}"))?;

    // without a given f_c, start from the mean of the edge cuts, where the
    // dispersive pulls have opposite signs, and let the joint fit refine it
    let f_c = match a.f_c {
        Some(f) => f,
        None => {
            let start = fano.resonances[coupled].f_i;
            let lo = bare_frequency(&cuts[0], start, kappa_c, kappa_i)?;
            let hi = bare_frequency(&cuts[cuts.len() - 1], start, kappa_c, kappa_i)?;
            0.5 * (lo + hi)
        }
    };
    let res = Resonator::new("fit", f_c, kappa_c, kappa_i).map_err(|e| e.to_string())?;
    let corrected = AnticrossingMap::from_cuts(fields, &cuts).map_err(|e| e.to_string())?;
    let init = AnticrossingInit {
        slope,
        v: a.init_v,
        gamma2: a.init_gamma2,
        b_cross: a.init_b_cross,
        free_f_c: a.f_c.is_none(),
    };
    let fit = fit_anticrossing_map(&corrected, &res, &init).map_err(|e| e.to_string())?;
    let res = Resonator::new("fit", fit.value("f_c"), kappa_c, kappa_i).map_err(|e| e.to_string())?;
    Ok((res, fit, cuts))
}

/// The fitted resonance closest to `f_c`, or failing that the one farthest
/// from every listed uncoupled resonance.
fn coupled_index(fano: &MultiFanoFit, f_c: Option<f64>, extra: &[f64]) -> usize {
    let r = &fano.resonances;
    let by = |key: &dyn Fn(f64) -> f64| {
        (0..r.len())
            .min_by(|&i, &j| key(r[i].f_i).total_cmp(&key(r[j].f_i)))
            .unwrap_or(0)
    };
    match f_c {
        Some(fc) => by(&|f| (f - fc).abs()),
        None if extra.is_empty() => 0,
        None => by(&|f| -extra.iter().map(|e| (f - e).abs()).fold(f64::INFINITY, f64::min)),
    }
}

/// Resonator frequency from a notch fit of one corrected cut with the rates
/// held fixed.
fn bare_frequency(cut: &Spectrum1D, start: f64, kappa_c: f64, kappa_i: f64) -> Result<f64, String> {
    let problem = FitProblem::new(Model::Notch, cut.clone(), &[start, kappa_c, kappa_i])
        .and_then(|p| p.freeze("kappa_c"))
        .and_then(|p| p.freeze("kappa_i"))
        .map_err(|e| e.to_string())?;
    let fit = least_squares_fit(&problem, &FitOptions::default()).map_err(|e| format!("resonator frequency: {e}"))?;
    if !fit.converged {
        return Err(format!("resonator frequency fit did not converge: {}", fit.reason));
    }
    Ok(fit.value("f_c"))
}

fn write_corrected(
    dir: &std::path::Path,
    map: &FieldMap2D,
    cuts: &[Spectrum1D],
    res: &Resonator,
    fit: &FitResult,
) -> CliResult<()> {
    let (v, gamma2, b_cross, slope) = (fit.value("v"), fit.value("gamma2"), fit.value("b_cross"), fit.value("slope"));
    let rows = map.fields().iter().zip(cuts).flat_map(|(&b, cut)| {
        let spin = [SpinLine { f_s: res.f_c + slope * (b - b_cross), gamma2, v }];
        cut.axis().iter().zip(cut.values()).map(move |(&f, &p)| {
            let m = notch_s21(f, res.f_c, res.kappa_c, res.kappa_i, &spin).norm_sqr();
            vec![b.to_string(), f.to_string(), p.to_string(), m.to_string()]
        })
    });
    io::write_table(&dir.join("corrected.csv"), &CORRECTED_HEADER, rows)
}
