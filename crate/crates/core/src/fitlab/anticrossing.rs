//! Avoided-crossing fits: a joint fit over all field cuts of a map and a
//! per-trace variant.

use rayon::prelude::*;

use crate::cavity::{notch_s21, SpinLine};
use crate::spincore::{FieldMap2D, Resonator, Spectrum1D};
use crate::{Error, Result};

use super::engine::{minimize, Objective, Param};
use super::{least_squares_fit, FitOptions, FitProblem, FitResult, Model};

/// Field-frequency grid with (possibly baseline-corrected) power, row-major by
/// field. Unlike [`FieldMap2D`] the values may be negative.
#[derive(Debug, Clone)]
pub struct AnticrossingMap {
    fields: Vec<f64>,
    freqs: Vec<f64>,
    values: Vec<f64>,
}

impl AnticrossingMap {
    pub fn from_map(map: &FieldMap2D) -> Self {
        Self {
            fields: map.fields().to_vec(),
            freqs: map.freqs().to_vec(),
            values: map.power().to_vec(),
        }
    }

    /// One cut per field; all cuts must share one frequency axis.
    pub fn from_cuts(fields: &[f64], cuts: &[Spectrum1D]) -> Result<Self> {
        if fields.len() != cuts.len() || cuts.is_empty() {
            return Err(Error::invalid("need one cut per field"));
        }
        if fields.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("fields must be strictly increasing"));
        }
        let freqs = cuts[0].axis().to_vec();
        if cuts.iter().any(|c| c.axis() != freqs.as_slice()) {
            return Err(Error::invalid("cuts do not share a frequency axis"));
        }
        let values = cuts.iter().flat_map(|c| c.values().iter().copied()).collect();
        Ok(Self { fields: fields.to_vec(), freqs, values })
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Parameter order of the joint model.
const NAMES: [&str; 7] = ["v", "gamma2", "b_cross", "slope", "f_c", "kappa_c", "kappa_i"];

struct Joint<'a> {
    fields: &'a [f64],
    freqs: &'a [f64],
}

impl Objective for Joint<'_> {
    fn len(&self) -> usize {
        self.fields.len() * self.freqs.len()
    }

    fn predict(&self, p: &[f64], out: &mut [f64]) {
        let (v, gamma2, b_cross, slope, f_c, kc, ki) = (p[0], p[1], p[2], p[3], p[4], p[5], p[6]);
        out.par_chunks_mut(self.freqs.len())
            .zip(self.fields.par_iter())
            .for_each(|(row, &b)| {
                let spin = [SpinLine { f_s: f_c + slope * (b - b_cross), gamma2, v }];
                for (o, &f) in row.iter_mut().zip(self.freqs) {
                    *o = notch_s21(f, f_c, kc, ki, &spin).norm_sqr();
                }
            });
    }
}

/// Starting point for the joint fit. `slope` [Hz/T] is required; missing
/// values are found by a coarse grid scan.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnticrossingInit {
    pub slope: f64,
    pub v: Option<f64>,
    pub gamma2: Option<f64>,
    pub b_cross: Option<f64>,
    /// Fit the resonator frequency instead of holding it at `res.f_c`.
    pub free_f_c: bool,
}

fn cost(obj: &Joint<'_>, data: &[f64], p: &[f64]) -> f64 {
    let mut pred = vec![0.0; obj.len()];
    obj.predict(p, &mut pred);
    pred.iter().zip(data).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Joint fit of `v`, `gamma2`, `b_cross` and `slope` over every cut, with the
/// spin line `f_s(B) = f_c + slope (B - b_cross)` and the resonator rates held
/// fixed. `f_c` is held too unless `init.free_f_c` is set.
pub fn fit_anticrossing(map: &FieldMap2D, res: &Resonator, init: &AnticrossingInit) -> Result<FitResult> {
    fit_anticrossing_map(&AnticrossingMap::from_map(map), res, init)
}

pub fn fit_anticrossing_map(
    map: &AnticrossingMap,
    res: &Resonator,
    init: &AnticrossingInit,
) -> Result<FitResult> {
    if !(init.slope.is_finite() && init.slope != 0.0) {
        return Err(Error::invalid("spin line slope must be finite and nonzero"));
    }
    let (b_lo, b_hi) = (map.fields[0], map.fields[map.fields.len() - 1]);
    if let Some(b) = init.b_cross {
        if !(b_lo..=b_hi).contains(&b) {
            return Err(Error::NoCrossing { lo: b_lo, hi: b_hi });
        }
    }
    let f_span = map.freqs[map.freqs.len() - 1] - map.freqs[0];
    if !(f_span > 0.0) {
        return Err(Error::invalid("map needs at least two frequencies"));
    }
    let obj = Joint { fields: &map.fields, freqs: &map.freqs };
    let gamma2 = init.gamma2.unwrap_or(res.kappa());

    let v_grid: Vec<f64> = match init.v {
        Some(v) => vec![v],
        None => {
            let (a, b) = ((0.25 * res.kappa()).max(1e-6 * f_span), 0.25 * f_span);
            (0..12).map(|k| a * (b / a).powf(k as f64 / 11.0)).collect()
        }
    };
    let b_grid: Vec<f64> = match init.b_cross {
        Some(b) => vec![b],
        None => {
            let n = map.fields.len().min(81);
            (0..n).map(|k| b_lo + (b_hi - b_lo) * k as f64 / (n.max(2) - 1) as f64).collect()
        }
    };
    let candidates: Vec<(f64, f64)> = b_grid
        .iter()
        .flat_map(|&b| v_grid.iter().map(move |&v| (v, b)))
        .collect();
    let costs: Vec<f64> = candidates
        .par_iter()
        .map(|&(v, b)| cost(&obj, &map.values, &[v, gamma2, b, init.slope, res.f_c, res.kappa_c, res.kappa_i]))
        .collect();
    let best = (0..costs.len())
        .min_by(|&a, &b| costs[a].total_cmp(&costs[b]))
        .expect("non-empty candidate grid");
    let (v0, b0) = candidates[best];

    let start = [v0, gamma2, b0, init.slope, res.f_c, res.kappa_c, res.kappa_i];
    let params: Vec<Param> = NAMES
        .iter()
        .zip(start)
        .enumerate()
        .map(|(k, (name, value))| {
            let p = Param::new(*name, value);
            match k {
                0 => p.bounded(0.0, f_span),
                1 => p.bounded(1e-6 * f_span, f_span),
                2 => p.bounded(b_lo, b_hi),
                3 => p,
                4 => p.with_frozen(!init.free_f_c),
                _ => p.frozen(),
            }
        })
        .collect();
    let result = minimize(&obj, &map.values, None, &params, &FitOptions::default())?;

    let b = result.value("b_cross");
    let pinned = (b - b_lo).abs() <= 1e-9 * (b_hi - b_lo) || (b - b_hi).abs() <= 1e-9 * (b_hi - b_lo);
    let v = result.value("v");
    let sigma_v = result.sigma("v");
    if pinned && v > 2.0 * sigma_v {
        return Err(Error::NoCrossing { lo: b_lo, hi: b_hi });
    }
    Ok(result)
}

/// Starting point for a single-trace fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutFitInit {
    pub f_s: f64,
    pub gamma2: f64,
    pub v: f64,
}

/// Fits `f_s`, `gamma2` and `v` of one field cut with the resonator frozen.
pub fn fit_anticrossing_cut(spectrum: &Spectrum1D, res: &Resonator, init: &CutFitInit) -> Result<FitResult> {
    let (lo, hi) = spectrum
        .span()
        .ok_or_else(|| Error::invalid("empty spectrum"))?;
    let span = hi - lo;
    let start = [res.f_c, res.kappa_c, res.kappa_i, init.f_s, init.gamma2, init.v];
    let problem = FitProblem::new(Model::NotchSpin, spectrum.clone(), &start)?
        .freeze("f_c")?
        .freeze("kappa_c")?
        .freeze("kappa_i")?
        .bound("f_s", lo - span, hi + span)?
        .bound("gamma2", 1e-6 * span, span)?
        .bound("v", 0.0, span)?;
    least_squares_fit(&problem, &FitOptions::default())
}
