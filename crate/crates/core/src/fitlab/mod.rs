//! Least-squares engine and the fitting pipelines built on it.

mod anticrossing;
mod engine;
mod models;
mod multifano;
mod orientation;
mod simple;

pub use anticrossing::{
    fit_anticrossing, fit_anticrossing_cut, fit_anticrossing_map, AnticrossingInit, AnticrossingMap,
    CutFitInit,
};
pub use engine::{
    forward_jacobian, minimize, numerical_jacobian, FitOptions, FitResult, Objective, Param,
    ParamEstimate,
};
pub use models::{Curve, Model};
pub use multifano::{fit_multifano, normalize_and_subtract, FanoHint, MultiFanoFit};
pub use orientation::{fit_orientation, ObservedLine, OrientationFit};
pub use simple::{fit_exponential, fit_lorentzian};

use crate::spincore::Spectrum1D;
use crate::{Error, Result};

/// A registered model, a data trace and its starting parameters.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub model: Model,
    pub data: Spectrum1D,
    pub params: Vec<Param>,
    pub weights: Option<Vec<f64>>,
}

impl FitProblem {
    /// Unbounded, all-free parameters named after the model.
    pub fn new(model: Model, data: Spectrum1D, init: &[f64]) -> Result<Self> {
        if init.len() != model.arity() {
            return Err(Error::invalid(format!(
                "model {model} takes {} parameters, got {}",
                model.arity(),
                init.len()
            )));
        }
        let params = model
            .param_names()
            .into_iter()
            .zip(init)
            .map(|(n, &v)| Param::new(n, v))
            .collect();
        Ok(Self { model, data, params, weights: None })
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.params
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::invalid(format!("model {} has no parameter '{name}'", self.model)))
    }

    pub fn bound(mut self, name: &str, lower: f64, upper: f64) -> Result<Self> {
        let k = self.index(name)?;
        self.params[k].lower = lower;
        self.params[k].upper = upper;
        Ok(self)
    }

    pub fn freeze(mut self, name: &str) -> Result<Self> {
        let k = self.index(name)?;
        self.params[k].frozen = true;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }
}

pub fn least_squares_fit(problem: &FitProblem, opts: &FitOptions) -> Result<FitResult> {
    if problem.data.is_empty() {
        return Err(Error::invalid("no data to fit"));
    }
    if problem.params.len() != problem.model.arity() {
        return Err(Error::invalid(format!(
            "model {} takes {} parameters, got {}",
            problem.model,
            problem.model.arity(),
            problem.params.len()
        )));
    }
    let curve = Curve { model: problem.model, x: problem.data.axis() };
    minimize(
        &curve,
        problem.data.values(),
        problem.weights.as_deref(),
        &problem.params,
        opts,
    )
}

/// Deepest point of a smoothed copy of `y`, and the width at half depth below
/// `reference`.
pub(crate) fn dip_estimate(x: &[f64], y: &[f64], reference: f64) -> (usize, f64, f64) {
    let s = smooth(y, (y.len() / 100).max(1));
    let k = (0..s.len()).min_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap_or(0);
    let depth = reference - s[k];
    let half = reference - 0.5 * depth;
    let mut l = k;
    while l > 0 && s[l] < half {
        l -= 1;
    }
    let mut r = k;
    while r + 1 < s.len() && s[r] < half {
        r += 1;
    }
    let width = (x[r] - x[l]).max(x[(k + 1).min(x.len() - 1)] - x[k.saturating_sub(1)]);
    (k, depth, width)
}

/// Centered moving average with half-window `h`, truncated at the ends.
pub(crate) fn smooth(y: &[f64], h: usize) -> Vec<f64> {
    let n = y.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + y[i];
    }
    (0..n)
        .map(|i| {
            let a = i.saturating_sub(h);
            let b = (i + h + 1).min(n);
            (prefix[b] - prefix[a]) / (b - a) as f64
        })
        .collect()
}

pub(crate) fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
