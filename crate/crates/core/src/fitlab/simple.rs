//! Lorentzian absorption and exponential recovery fits with automatic
//! initialization.

use crate::spincore::Spectrum1D;
use crate::{Error, Result};

use super::{dip_estimate, least_squares_fit, median, FitOptions, FitProblem, FitResult, Model};

/// Fits `background * (1 - depth L(f))` with `L` a unit-height Lorentzian.
/// Parameters: `center`, `fwhm`, `depth`, `background`.
pub fn fit_lorentzian(spectrum: &Spectrum1D) -> Result<FitResult> {
    let x = spectrum.axis();
    let y = spectrum.values();
    if x.len() < 5 {
        return Err(Error::invalid("Lorentzian fit needs at least 5 points"));
    }
    let span = x[x.len() - 1] - x[0];
    let edge = (x.len() / 10).max(1);
    let mut edges: Vec<f64> = y[..edge].to_vec();
    edges.extend_from_slice(&y[y.len() - edge..]);
    let background = median(&edges);
    if !(background > 0.0) {
        return Err(Error::Initialization("background level is not positive".into()));
    }
    let (k, dip, width) = dip_estimate(x, y, background);
    let depth = (dip / background).clamp(0.0, 0.99);
    let fwhm = if width > 0.0 && width < span { width } else { 0.1 * span };
    let init = [x[k], fwhm, depth, background];
    let problem = FitProblem::new(Model::Lorentzian, spectrum.clone(), &init)?
        .bound("center", x[0] - span, x[x.len() - 1] + span)?
        .bound("fwhm", 1e-9 * span, 10.0 * span)?
        .bound("depth", -1.0, 1.0)?
        .bound("background", 0.0, f64::INFINITY)?;
    least_squares_fit(&problem, &FitOptions::default())
}

/// Fits `a - b exp(-t / t1)`. Parameters: `a`, `b`, `t1`.
pub fn fit_exponential(series: &Spectrum1D) -> Result<FitResult> {
    let t = series.axis();
    let y = series.values();
    if t.len() < 4 {
        return Err(Error::invalid("exponential fit needs at least 4 points"));
    }
    let span = t[t.len() - 1] - t[0];
    let tail = (t.len() / 10).max(1);
    let a = y[y.len() - tail..].iter().sum::<f64>() / tail as f64;
    let head = 3.min(y.len());
    let y0 = y[..head].iter().sum::<f64>() / head as f64;
    let b = a - y0;
    let target = a - b / std::f64::consts::E;
    let t1 = t
        .iter()
        .zip(y)
        .find(|(_, &v)| if b >= 0.0 { v >= target } else { v <= target })
        .map(|(&ti, _)| ti - t[0])
        .filter(|&d| d > 0.0)
        .unwrap_or(span / 3.0);
    let b = b * (t[0] / t1).exp();
    let problem = FitProblem::new(Model::Exponential, series.clone(), &[a, b, t1])?
        .bound("t1", 1e-9 * span, 100.0 * span)?;
    least_squares_fit(&problem, &FitOptions::default())
}
