//! Multi-Fano fit of a transmission trace, baseline normalization and removal
//! of uncoupled resonances.

use crate::cavity::{Baseline, FanoResonance};
use crate::spincore::{AxisKind, Spectrum1D};
use crate::{Error, Result};

use super::{least_squares_fit, median, smooth, FitOptions, FitProblem, FitResult, Model};

/// Approximate position and width of one resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoHint {
    pub center: f64,
    pub fwhm: f64,
}

#[derive(Debug, Clone)]
pub struct MultiFanoFit {
    pub model: Model,
    pub baseline: Baseline,
    /// Sorted by center frequency.
    pub resonances: Vec<FanoResonance>,
    pub result: FitResult,
}

/// Greedy dip picking: repeatedly take the deepest unmasked point of the
/// smoothed dip profile and mask a few widths around it.
fn detect_dips(x: &[f64], y: &[f64], reference: f64, n: usize) -> Result<Vec<FanoHint>> {
    let m = y.len();
    let diffs: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let dev: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let noise = 1.4826 * median(&dev) / std::f64::consts::SQRT_2;
    let d: Vec<f64> = smooth(y, (m / 400).max(1)).iter().map(|v| reference - v).collect();
    let dx = (x[m - 1] - x[0]) / (m - 1) as f64;
    let mut masked = vec![false; m];
    let mut hints = Vec::with_capacity(n);
    for _ in 0..n {
        let k = (0..m)
            .filter(|&i| !masked[i])
            .max_by(|&a, &b| d[a].total_cmp(&d[b]));
        let Some(k) = k else { break };
        let depth = d[k];
        if !(depth > 5.0 * noise) || depth <= 0.0 {
            break;
        }
        let (mut l, mut r) = (k, k);
        while l > 0 && d[l] > 0.5 * depth {
            l -= 1;
        }
        while r + 1 < m && d[r] > 0.5 * depth {
            r += 1;
        }
        let fwhm = (x[r] - x[l]).max(2.0 * dx);
        let reach = 2.0 * fwhm;
        for (i, mi) in masked.iter_mut().enumerate() {
            if (x[i] - x[k]).abs() <= reach {
                *mi = true;
            }
        }
        hints.push(FanoHint { center: x[k], fwhm });
    }
    if hints.len() < n {
        return Err(Error::Initialization(format!(
            "found {} resonances, expected {n}",
            hints.len()
        )));
    }
    Ok(hints)
}

/// Fits a quadratic baseline and `n` Fano resonances. Without hints the
/// resonances are initialized from the `n` deepest dips.
pub fn fit_multifano(spectrum: &Spectrum1D, n: usize, hints: Option<&[FanoHint]>) -> Result<MultiFanoFit> {
    let x = spectrum.axis();
    let y = spectrum.values();
    let model = Model::multifano_for(n, x)?;
    if x.len() < model.arity() {
        return Err(Error::invalid("fewer points than multi-Fano parameters"));
    }
    let (lo, hi) = (x[0], x[x.len() - 1]);
    let span = hi - lo;
    let dx = span / (x.len() - 1) as f64;
    let c0 = median(y);
    if !(c0 > 0.0) {
        return Err(Error::Initialization("baseline level is not positive".into()));
    }
    let (hints, auto) = match hints {
        Some(h) if h.len() != n => {
            return Err(Error::invalid(format!("{} hints for {n} resonances", h.len())));
        }
        Some(h) => {
            if let Some(bad) = h.iter().find(|h| h.center < lo || h.center > hi || !(h.fwhm > 0.0)) {
                return Err(Error::invalid(format!(
                    "hint at {} Hz lies outside the spectrum or has no width",
                    bad.center
                )));
            }
            (h.to_vec(), false)
        }
        None => (detect_dips(x, y, c0, n)?, true),
    };
    let mut hints = hints;
    hints.sort_by(|a, b| a.center.total_cmp(&b.center));

    let mut init = vec![c0, 0.0, 0.0];
    for h in &hints {
        let k = x.partition_point(|&v| v < h.center).min(x.len() - 1);
        let depth = ((c0 - y[k]) / c0).clamp(0.0, 1.0);
        init.extend_from_slice(&[h.center, h.fwhm, -depth * h.fwhm * h.fwhm / 4.0, 0.0]);
    }
    let mut problem = FitProblem::new(model, spectrum.clone(), &init)?.bound("c0", 0.0, f64::INFINITY)?;
    for (i, h) in hints.iter().enumerate() {
        let (f_lo, f_hi) = if auto { (lo, hi) } else { (h.center - 2.0 * h.fwhm, h.center + 2.0 * h.fwhm) };
        problem = problem
            .bound(&format!("f_{i}"), f_lo, f_hi)?
            .bound(&format!("gamma_{i}"), 0.1 * dx, 2.0 * span)?;
    }
    let result = least_squares_fit(&problem, &FitOptions::default())?;
    let (baseline, mut resonances) = model.fano_parts(&result.values()).expect("multi-Fano model");
    resonances.sort_by(|a, b| a.f_i.total_cmp(&b.f_i));
    Ok(MultiFanoFit { model, baseline, resonances, result })
}

/// Divides by the fitted baseline and subtracts every resonance not listed in
/// `keep`.
pub fn normalize_and_subtract(spectrum: &Spectrum1D, fit: &MultiFanoFit, keep: &[usize]) -> Result<Spectrum1D> {
    if keep.is_empty() {
        return Err(Error::invalid("at least one resonance must be kept"));
    }
    if let Some(&bad) = keep.iter().find(|&&i| i >= fit.resonances.len()) {
        return Err(Error::invalid(format!(
            "resonance index {bad} out of range ({} fitted)",
            fit.resonances.len()
        )));
    }
    if !fit.result.converged {
        return Err(Error::invalid(format!(
            "multi-Fano fit did not converge: {}",
            fit.result.reason
        )));
    }
    let dropped: Vec<&FanoResonance> = fit
        .resonances
        .iter()
        .enumerate()
        .filter(|(i, _)| !keep.contains(i))
        .map(|(_, r)| r)
        .collect();
    let mut out = Vec::with_capacity(spectrum.len());
    for (&f, &p) in spectrum.axis().iter().zip(spectrum.values()) {
        let b = fit.baseline.eval(f);
        if !(b > 0.0) {
            return Err(Error::domain(format!("fitted baseline is {b} at {f} Hz")));
        }
        out.push(p / b - dropped.iter().map(|r| r.term(f)).sum::<f64>());
    }
    Spectrum1D::new(AxisKind::Frequency, spectrum.axis().to_vec(), out)
}
