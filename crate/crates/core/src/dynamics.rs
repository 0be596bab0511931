//! Thermal polarization and longitudinal relaxation after saturation.

use crate::spincore::constants::{H, K_B};
use crate::{Error, Result};

/// Population ratio `N2/N1 = exp(-h f / (k_B T))`.
pub fn boltzmann_ratio(f: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::invalid(format!("temperature must be > 0 K, got {temperature}")));
    }
    if !(f >= 0.0) || !f.is_finite() {
        return Err(Error::invalid(format!("frequency must be >= 0, got {f}")));
    }
    Ok((-H * f / (K_B * temperature)).exp())
}

/// Net polarization `(1 - r)/(1 + r)` of a two-level ensemble.
pub fn polarization(f: f64, temperature: f64) -> Result<f64> {
    let r = boltzmann_ratio(f, temperature)?;
    Ok((1.0 - r) / (1.0 + r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationModel {
    /// [s]
    pub t1: f64,
    pub mz_eq: f64,
    pub mz0: f64,
}

impl RelaxationModel {
    pub fn new(t1: f64, mz_eq: f64, mz0: f64) -> Result<Self> {
        if !(t1 > 0.0) || !t1.is_finite() {
            return Err(Error::invalid(format!("t1 must be > 0, got {t1}")));
        }
        if !(mz_eq.abs() <= 1.0) || !(mz0.abs() <= 1.0) {
            return Err(Error::invalid(format!(
                "magnetizations must lie in [-1, 1], got mz_eq={mz_eq}, mz0={mz0}"
            )));
        }
        Ok(Self { t1, mz_eq, mz0 })
    }

    /// Recovery from full saturation towards full equilibrium magnetization.
    pub fn saturated(t1: f64) -> Result<Self> {
        Self::new(t1, 1.0, 0.0)
    }
}

pub fn mz_recovery(t: f64, model: &RelaxationModel) -> f64 {
    model.mz_eq + (model.mz0 - model.mz_eq) * (-t / model.t1).exp()
}

/// Absorption-dip depth proportional to the instantaneous magnetization.
pub fn dip_depth_series(times: &[f64], model: &RelaxationModel, depth_eq: f64) -> Result<Vec<f64>> {
    if model.mz_eq == 0.0 {
        return Err(Error::domain("equilibrium magnetization is zero"));
    }
    if !(0.0..=1.0).contains(&depth_eq) {
        return Err(Error::invalid(format!("depth_eq must lie in [0, 1], got {depth_eq}")));
    }
    Ok(times
        .iter()
        .map(|&t| depth_eq * mz_recovery(t, model) / model.mz_eq)
        .collect())
}
