//! Bounded Levenberg-Marquardt least squares with numerical Jacobians.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

/// Anything that predicts a fixed-length vector of observations from a
/// parameter vector.
pub trait Objective: Sync {
    fn len(&self) -> usize;
    fn predict(&self, params: &[f64], out: &mut [f64]);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub frozen: bool,
}

impl Param {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            frozen: false,
        }
    }

    pub fn bounded(mut self, lower: f64, upper: f64) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn frozen(mut self) -> Self {
        self.frozen = true;
        self
    }

    pub fn with_frozen(mut self, frozen: bool) -> Self {
        self.frozen = frozen;
        self
    }

    fn clamp(&self, x: f64) -> f64 {
        x.max(self.lower).min(self.upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative per-parameter step below which the fit is considered converged.
    pub step_tol: f64,
    /// Relative cost decrease that counts as stalled.
    pub cost_tol: f64,
    /// Consecutive stalled iterations required for convergence.
    pub stall_iterations: usize,
    /// Largest allowed cosine between the residual and any Jacobian column.
    pub gradient_tol: f64,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            step_tol: 1e-10,
            cost_tol: 1e-12,
            stall_iterations: 3,
            gradient_tol: 1e-5,
            lambda_init: 1e-3,
            lambda_up: 5.0,
            lambda_down: 0.3,
            lambda_min: 1e-12,
            lambda_max: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamEstimate {
    pub name: String,
    pub value: f64,
    /// 1σ; infinite (serialized as null) when the normal matrix is singular.
    pub sigma: f64,
    pub frozen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: Vec<ParamEstimate>,
    pub covariance: Vec<Vec<f64>>,
    /// `sqrt(sum w r^2)` at the solution.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub reason: String,
    /// Weighted cost after every accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&ParamEstimate> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.value)
    }

    pub fn sigma(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.sigma)
    }

    pub fn values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.value).collect()
    }
}

/// Central-difference Jacobian of `predict` with respect to the parameters in
/// `cols`, one-sided where a bound is closer than the step. Column-major
/// `m x cols.len()` result.
pub fn numerical_jacobian<O: Objective + ?Sized>(
    obj: &O,
    params: &[Param],
    values: &[f64],
    cols: &[usize],
) -> DMatrix<f64> {
    let m = obj.len();
    let columns: Vec<Vec<f64>> = cols
        .par_iter()
        .map(|&k| {
            let h = (1e-7 * values[k].abs()).max(1e-7);
            let x = values[k];
            let (lo, hi) = (params[k].lower, params[k].upper);
            let mut plus = values.to_vec();
            let mut minus = values.to_vec();
            let mut fp = vec![0.0; m];
            let mut fm = vec![0.0; m];
            let (a, b) = if x + h <= hi && x - h >= lo {
                (x + h, x - h)
            } else if x + h <= hi {
                (x + h, x)
            } else {
                (x, x - h)
            };
            plus[k] = a;
            minus[k] = b;
            obj.predict(&plus, &mut fp);
            obj.predict(&minus, &mut fm);
            let inv = 1.0 / (a - b);
            fp.iter().zip(&fm).map(|(p, q)| (p - q) * inv).collect()
        })
        .collect();
    let mut j = DMatrix::zeros(m, cols.len());
    for (c, col) in columns.iter().enumerate() {
        j.column_mut(c).copy_from_slice(col);
    }
    j
}

/// Forward-difference Jacobian with a step 100 times smaller than the central
/// one, used to cross-check [`numerical_jacobian`].
pub fn forward_jacobian<O: Objective + ?Sized>(obj: &O, values: &[f64], cols: &[usize]) -> DMatrix<f64> {
    let m = obj.len();
    let mut base = vec![0.0; m];
    obj.predict(values, &mut base);
    let mut j = DMatrix::zeros(m, cols.len());
    let mut f = vec![0.0; m];
    for (c, &k) in cols.iter().enumerate() {
        let h = (1e-9 * values[k].abs()).max(1e-9);
        let mut p = values.to_vec();
        p[k] += h;
        obj.predict(&p, &mut f);
        for i in 0..m {
            j[(i, c)] = (f[i] - base[i]) / h;
        }
    }
    j
}

struct Problem<'a, O: Objective + ?Sized> {
    obj: &'a O,
    data: &'a [f64],
    sqrt_w: Vec<f64>,
    params: &'a [Param],
    free: Vec<usize>,
}

impl<O: Objective + ?Sized> Problem<'_, O> {
    fn residuals(&self, values: &[f64]) -> Vec<f64> {
        let mut pred = vec![0.0; self.obj.len()];
        self.obj.predict(values, &mut pred);
        pred.iter()
            .zip(self.data)
            .zip(&self.sqrt_w)
            .map(|((p, y), w)| w * (y - p))
            .collect()
    }

    /// Jacobian of the weighted residual vector.
    fn jacobian(&self, values: &[f64]) -> DMatrix<f64> {
        let mut j = numerical_jacobian(self.obj, self.params, values, &self.free);
        for (i, w) in self.sqrt_w.iter().enumerate() {
            for c in 0..j.ncols() {
                j[(i, c)] *= -w;
            }
        }
        j
    }
}

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Minimizes `sum_j w_j (data_j - predict_j(p))^2` over the non-frozen
/// parameters, keeping every parameter inside its bounds.
pub fn minimize<O: Objective + ?Sized>(
    obj: &O,
    data: &[f64],
    weights: Option<&[f64]>,
    params: &[Param],
    opts: &FitOptions,
) -> Result<FitResult> {
    let m = obj.len();
    if m == 0 || data.len() != m {
        return Err(Error::invalid(format!(
            "data length {} does not match model length {}",
            data.len(),
            m
        )));
    }
    let sqrt_w = match weights {
        Some(w) if w.len() != m => {
            return Err(Error::invalid("weights length does not match data"));
        }
        Some(w) if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) => {
            return Err(Error::invalid("weights must be finite and >= 0"));
        }
        Some(w) => w.iter().map(|x| x.sqrt()).collect(),
        None => vec![1.0; m],
    };
    for p in params {
        if !p.value.is_finite() || p.lower > p.upper || p.value < p.lower || p.value > p.upper {
            return Err(Error::invalid(format!(
                "initial value {} of '{}' outside bounds [{}, {}]",
                p.value, p.name, p.lower, p.upper
            )));
        }
    }
    let free: Vec<usize> = (0..params.len()).filter(|&k| !params[k].frozen).collect();
    let prob = Problem { obj, data, sqrt_w, params, free };

    let mut x: Vec<f64> = params.iter().map(|p| p.value).collect();
    let mut r = prob.residuals(&x);
    let mut cost = cost_of(&r);
    if !cost.is_finite() {
        return Err(Error::Numerical("model is not finite at the initial point".into()));
    }
    let mut history = vec![cost];
    let data_scale: f64 = data.iter().zip(&prob.sqrt_w).map(|(y, w)| (w * y).powi(2)).sum();
    // residuals at this level are model roundoff, not signal
    let floor = 1e-24 * data_scale.max(f64::MIN_POSITIVE);

    let n = prob.free.len();
    let mut lambda = opts.lambda_init;
    let mut iterations = 0;
    let mut stalled = 0;
    let mut converged = false;
    let mut reason = String::from("iteration limit reached");
    let mut diag_scale = vec![0.0f64; n];

    if n == 0 {
        converged = true;
        reason = "no free parameters".into();
    } else if cost <= floor {
        converged = true;
        reason = "exact fit".into();
    }

    // a convergence test fires only once the gradient at the new point is
    // also small; otherwise iteration continues
    let mut pending: Option<&str> = None;
    let mut last_j: Option<DMatrix<f64>> = None;
    while !converged && n > 0 {
        let j = prob.jacobian(&x);
        let cosine = projected_gradient_cosine(&j, &r, &x, params, &prob.free);
        if let Some(why) = pending.take() {
            if cosine <= opts.gradient_tol {
                converged = true;
                reason = why.into();
                last_j = Some(j);
                break;
            }
            stalled = 0;
        }
        if cosine < 1e-14 {
            converged = true;
            reason = "gradient vanishes".into();
            last_j = Some(j);
            break;
        }
        if iterations >= opts.max_iterations {
            last_j = Some(j);
            break;
        }
        iterations += 1;
        let jtj = j.transpose() * &j;
        let g = j.transpose() * DVector::from_column_slice(&r);
        last_j = Some(j);
        for k in 0..n {
            diag_scale[k] = diag_scale[k].max(jtj[(k, k)]);
        }
        let dmax = diag_scale.iter().cloned().fold(0.0, f64::max);
        if dmax == 0.0 {
            reason = "Jacobian vanishes".into();
            break;
        }

        // solve in column-scaled variables; raw column norms can span many
        // orders of magnitude
        let scale: Vec<f64> = diag_scale.iter().map(|d| d.max(1e-30 * dmax).sqrt()).collect();
        let scaled = DMatrix::from_fn(n, n, |a, b| jtj[(a, b)] / (scale[a] * scale[b]));
        let g_scaled = DVector::from_fn(n, |a, _| -g[a] / scale[a]);
        loop {
            let mut a = scaled.clone();
            for k in 0..n {
                a[(k, k)] += lambda;
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&g_scaled),
                None => match a.lu().solve(&g_scaled) {
                    Some(s) => s,
                    None => DVector::from_element(n, f64::NAN),
                },
            };
            let step = DVector::from_fn(n, |a, _| step[a] / scale[a]);
            let mut trial = x.clone();
            if step.iter().all(|s| s.is_finite()) {
                for (c, &k) in prob.free.iter().enumerate() {
                    trial[k] = params[k].clamp(x[k] + step[c]);
                }
            }
            let r_new = prob.residuals(&trial);
            let cost_new = cost_of(&r_new);
            if cost_new.is_finite() && cost_new < cost {
                let small_step = prob
                    .free
                    .iter()
                    .all(|&k| (trial[k] - x[k]).abs() <= opts.step_tol * (x[k].abs() + opts.step_tol));
                let rel_drop = (cost - cost_new) / cost;
                x = trial;
                r = r_new;
                cost = cost_new;
                history.push(cost);
                lambda = (lambda * opts.lambda_down).max(opts.lambda_min);
                stalled = if rel_drop < opts.cost_tol { stalled + 1 } else { 0 };
                if cost <= floor {
                    converged = true;
                    reason = "exact fit".into();
                    last_j = None;
                } else if small_step {
                    pending = Some("relative step below tolerance");
                } else if stalled >= opts.stall_iterations {
                    pending = Some("relative cost decrease below tolerance");
                }
                break;
            }
            lambda *= opts.lambda_up;
            if lambda > opts.lambda_max {
                // no downhill step at any damping
                reason = "no further decrease possible".into();
                converged = projected_gradient_cosine(
                    last_j.as_ref().expect("Jacobian computed this iteration"),
                    &r,
                    &x,
                    params,
                    &prob.free,
                ) <= opts.gradient_tol;
                if !converged {
                    reason.push_str("; gradient criterion not met");
                }
                lambda = opts.lambda_max;
                break;
            }
        }
        if lambda >= opts.lambda_max {
            break;
        }
    }

    let j = match last_j {
        Some(j) => Some(j),
        None if n > 0 => Some(prob.jacobian(&x)),
        None => None,
    };
    let (covariance, sigma) = covariance(j.as_ref(), cost, m, params.len(), &prob.free);
    let estimates = params
        .iter()
        .enumerate()
        .map(|(k, p)| ParamEstimate {
            name: p.name.clone(),
            value: x[k],
            sigma: sigma[k],
            frozen: p.frozen,
        })
        .collect();
    Ok(FitResult {
        params: estimates,
        covariance,
        residual_norm: cost.sqrt(),
        iterations,
        converged,
        reason,
        cost_history: history,
    })
}

/// Gradient cosine ignoring components that push against an active bound.
fn projected_gradient_cosine(
    j: &DMatrix<f64>,
    r: &[f64],
    x: &[f64],
    params: &[Param],
    free: &[usize],
) -> f64 {
    let rv = DVector::from_column_slice(r);
    let rn = rv.norm();
    if rn == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for (c, &k) in free.iter().enumerate() {
        let col = j.column(c);
        let cn = col.norm();
        if cn == 0.0 {
            continue;
        }
        // descent direction for parameter k is -(J^T r)_k
        let g = col.dot(&rv);
        let at_lower = x[k] <= params[k].lower;
        let at_upper = x[k] >= params[k].upper;
        if (at_lower && g > 0.0) || (at_upper && g < 0.0) {
            continue;
        }
        worst = worst.max(g.abs() / (cn * rn));
    }
    worst
}

fn covariance(
    j: Option<&DMatrix<f64>>,
    cost: f64,
    m: usize,
    n_all: usize,
    free: &[usize],
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut cov = vec![vec![0.0; n_all]; n_all];
    let mut sigma = vec![0.0; n_all];
    let Some(j) = j else {
        return (cov, sigma);
    };
    let n = free.len();
    let dof = m.saturating_sub(n);
    let s2 = cost / dof.max(1) as f64;
    let jtj = j.transpose() * j;
    let scale: Vec<f64> = (0..n).map(|k| jtj[(k, k)].sqrt()).collect();
    let inv = if dof > 0 && scale.iter().all(|&s| s > 0.0 && s.is_finite()) {
        let scaled = DMatrix::from_fn(n, n, |a, b| jtj[(a, b)] / (scale[a] * scale[b]));
        scaled.cholesky().map(|c| c.inverse()).filter(|inv| {
            // reject numerically singular systems
            inv.iter().all(|v| v.is_finite()) && inv.diagonal().iter().all(|&d| d > 0.0 && d < 1e14)
        })
    } else {
        None
    };
    match inv {
        Some(inv) => {
            for a in 0..n {
                for b in 0..n {
                    let sym = 0.5 * (inv[(a, b)] + inv[(b, a)]);
                    cov[free[a]][free[b]] = s2 * sym / (scale[a] * scale[b]);
                }
            }
            for a in 0..n {
                let v = cov[free[a]][free[a]];
                sigma[free[a]] = if v >= 0.0 { v.sqrt() } else { f64::INFINITY };
            }
        }
        None => {
            for &a in free {
                sigma[a] = f64::INFINITY;
                for &b in free {
                    cov[a][b] = f64::INFINITY;
                }
            }
        }
    }
    (cov, sigma)
}
