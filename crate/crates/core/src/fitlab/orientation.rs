//! Crystal orientation from measured electronic line positions.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::spincore::constants::MU_B_OVER_H;
use crate::spincore::{direction_from_angles, g_matrix, SpinSpecies};
use crate::{Error, Result};

use super::engine::{minimize, Objective, Param};
use super::{FitOptions, FitResult};

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedLine {
    /// Label of the species producing the line.
    pub label: String,
    /// Resonance field [T].
    pub field: f64,
}

#[derive(Debug, Clone)]
pub struct OrientationFit {
    /// Polar angle of the field in the crystal frame [rad].
    pub theta: f64,
    /// Azimuth in `[0, 2π)` [rad].
    pub phi: f64,
    /// Set when the solution sits on a pole, where `phi` carries no information.
    pub phi_indeterminate: bool,
    /// Every `(theta, phi)` reproducing the lines equally well, including
    /// `(theta, phi)` itself and its inversion partner `(π - theta, phi + π)`.
    pub equivalents: Vec<(f64, f64)>,
    /// `(label, observed, fitted)` fields [T].
    pub residuals: Vec<(String, f64, f64)>,
    pub result: FitResult,
}

const THETA_STARTS: usize = 12;
const PHI_STARTS: usize = 24;
const POLE_TOL: f64 = 1e-3;

struct Lines {
    tensors: Vec<Matrix3<f64>>,
    f_res: f64,
}

impl Lines {
    fn field(&self, g: &Matrix3<f64>, theta: f64, phi: f64) -> f64 {
        let ge = (g * direction_from_angles(theta, phi)).norm();
        self.f_res / (MU_B_OVER_H * ge)
    }
}

impl Objective for Lines {
    fn len(&self) -> usize {
        self.tensors.len()
    }

    fn predict(&self, p: &[f64], out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(&self.tensors) {
            *o = self.field(g, p[0], p[1]);
        }
    }
}

fn wrap_phi(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn angle_between(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (u, v) = (direction_from_angles(a.0, a.1), direction_from_angles(b.0, b.1));
    u.dot(&v).clamp(-1.0, 1.0).acos()
}

/// Multi-start least-squares fit of `(theta, phi)` to observed electronic
/// resonance fields at frequency `f_res` [Hz].
pub fn fit_orientation(observed: &[ObservedLine], species: &[SpinSpecies], f_res: f64) -> Result<OrientationFit> {
    if observed.len() < 2 {
        return Err(Error::invalid(format!(
            "orientation fit needs at least 2 lines, got {}",
            observed.len()
        )));
    }
    if !(f_res > 0.0) {
        return Err(Error::invalid("resonance frequency must be > 0"));
    }
    let mut tensors = Vec::with_capacity(observed.len());
    for line in observed {
        let sp = species
            .iter()
            .find(|s| s.label == line.label)
            .ok_or_else(|| Error::invalid(format!("no species labelled '{}'", line.label)))?;
        if !(line.field > 0.0) {
            return Err(Error::invalid(format!("line '{}' has non-positive field", line.label)));
        }
        tensors.push(g_matrix(&sp.g));
    }
    let lines = Lines { tensors, f_res };
    let data: Vec<f64> = observed.iter().map(|l| l.field).collect();

    let starts: Vec<(f64, f64)> = (0..THETA_STARTS)
        .flat_map(|i| {
            (0..PHI_STARTS).map(move |j| {
                (
                    (i as f64 + 0.5) * PI / THETA_STARTS as f64,
                    (j as f64 + 0.5) * TAU / PHI_STARTS as f64,
                )
            })
        })
        .collect();

    // a flat objective over the whole start grid means the lines carry no
    // angular information
    let flat = lines.tensors.iter().all(|g| {
        let vals: Vec<f64> = starts.iter().map(|&(t, p)| lines.field(g, t, p)).collect();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        hi - lo <= 1e-9 * hi.abs()
    });

    let opts = FitOptions::default();
    let run = |&(t, p): &(f64, f64)| {
        let params = [Param::new("theta", t).bounded(0.0, PI), Param::new("phi", p)];
        minimize(&lines, &data, None, &params, &opts)
    };
    if flat {
        let mut result = run(&starts[0])?;
        result.converged = false;
        result.reason = "orientation unidentifiable".into();
        let (theta, phi) = (result.value("theta"), wrap_phi(result.value("phi")));
        return Ok(OrientationFit {
            theta,
            phi,
            phi_indeterminate: true,
            equivalents: Vec::new(),
            residuals: residuals(observed, &lines, theta, phi),
            result,
        });
    }

    let fits: Vec<FitResult> = starts.par_iter().map(run).collect::<Result<_>>()?;
    let cost = |r: &FitResult| r.residual_norm * r.residual_norm;
    let best_cost = fits.iter().map(cost).fold(f64::INFINITY, f64::min);
    let scale: f64 = data.iter().map(|b| b * b).sum();
    let tol = best_cost * 1e-3 + 1e-24 * scale;

    let mut equivalents: Vec<(f64, f64)> = Vec::new();
    let mut push = |a: (f64, f64)| {
        if !equivalents.iter().any(|&e| angle_between(e, a) < 0.5f64.to_radians()) {
            equivalents.push(a);
        }
    };
    for r in fits.iter().filter(|r| cost(r) <= best_cost + tol) {
        let a = (r.value("theta"), wrap_phi(r.value("phi")));
        push(a);
        push((PI - a.0, wrap_phi(a.1 + PI)));
    }
    equivalents.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let (mut theta, mut phi) = equivalents[0];

    // the fit from the start nearest the canonical solution supplies the
    // reported uncertainties
    let mut result = fits
        .iter()
        .filter(|r| cost(r) <= best_cost + tol)
        .min_by(|a, b| {
            let da = angle_between((a.value("theta"), a.value("phi")), (theta, phi));
            let db = angle_between((b.value("theta"), b.value("phi")), (theta, phi));
            da.total_cmp(&db)
        })
        .cloned()
        .expect("at least one best fit");

    let mut phi_indeterminate = false;
    if theta < POLE_TOL {
        theta = 0.0;
        phi_indeterminate = true;
    } else if theta > PI - POLE_TOL {
        theta = PI;
        phi_indeterminate = true;
    }
    if phi_indeterminate {
        phi = 0.0;
    }
    for p in &mut result.params {
        match p.name.as_str() {
            "theta" => p.value = theta,
            "phi" => p.value = phi,
            _ => {}
        }
    }
    Ok(OrientationFit {
        theta,
        phi,
        phi_indeterminate,
        equivalents,
        residuals: residuals(observed, &lines, theta, phi),
        result,
    })
}

fn residuals(observed: &[ObservedLine], lines: &Lines, theta: f64, phi: f64) -> Vec<(String, f64, f64)> {
    observed
        .iter()
        .zip(&lines.tensors)
        .map(|(o, g)| (o.label.clone(), o.field, lines.field(g, theta, phi)))
        .collect()
}
