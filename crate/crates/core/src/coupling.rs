//! Closed-form anisotropic g-factors for a crystal rotated about the g-tensor
//! x axis, single-spin and collective coupling strengths, and spin counting.
//!
//! With the DC field at angle `phi` from the y principal axis in the y-z plane
//! and the AC field perpendicular to it in the same plane:
//!
//! ```text
//! g(phi)^2 = gy^2 cos^2(phi) + gz^2 sin^2(phi)
//! g1(phi)  = gy gz / g(phi)
//! v1       = mu_B g1 |B1| / (2 h)          [Hz]
//! v        = v1 sqrt(N p)                  [Hz]
//! ```

use crate::spincore::constants::{H, MU_B};
use crate::{Error, Result};

/// The two principal values spanning the rotation plane, ordered `g_y <= g_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropyPlane {
    g_y: f64,
    g_z: f64,
}

impl AnisotropyPlane {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
            return Err(Error::invalid(format!(
                "principal g values must be finite and >= 0, got ({a}, {b})"
            )));
        }
        Ok(Self {
            g_y: a.min(b),
            g_z: a.max(b),
        })
    }

    pub fn g_y(&self) -> f64 {
        self.g_y
    }

    pub fn g_z(&self) -> f64 {
        self.g_z
    }
}

/// DC (tuning) g-factor.
pub fn g_dc(plane: &AnisotropyPlane, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    (plane.g_y * plane.g_y * c * c + plane.g_z * plane.g_z * s * s).sqrt()
}

/// AC (coupling) g-factor.
pub fn g_ac(plane: &AnisotropyPlane, phi: f64) -> Result<f64> {
    let g = g_dc(plane, phi);
    if g == 0.0 {
        return Err(Error::domain("g_dc vanishes, AC g-factor undefined"));
    }
    // divide first by the principal value that dominates g so the ratio is
    // exactly 1 on the principal axes
    let (s, c) = phi.sin_cos();
    if c.abs() >= s.abs() {
        Ok(plane.g_z * (plane.g_y / g))
    } else {
        Ok(plane.g_y * (plane.g_z / g))
    }
}

/// Single-spin coupling `v1` [Hz] for AC amplitude `b1` [T].
pub fn single_spin_coupling(g1: f64, b1: f64) -> Result<f64> {
    if !(b1 >= 0.0) || !b1.is_finite() {
        return Err(Error::invalid(format!("AC amplitude must be >= 0, got {b1}")));
    }
    if !g1.is_finite() {
        return Err(Error::invalid("g1 must be finite"));
    }
    Ok(MU_B * g1 * b1 / (2.0 * H))
}

/// Collective coupling of `n_spins` spins with net polarization `polarization`.
pub fn collective_coupling(v1: f64, n_spins: f64, polarization: f64) -> Result<f64> {
    if !(n_spins >= 0.0) {
        return Err(Error::invalid(format!("spin count must be >= 0, got {n_spins}")));
    }
    if !(0.0..=1.0).contains(&polarization) {
        return Err(Error::invalid(format!(
            "polarization must lie in [0, 1], got {polarization}"
        )));
    }
    Ok(v1 * (n_spins * polarization).sqrt())
}

/// Spin density and mode volume of one ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    /// Spins per m³.
    pub density: f64,
    /// m³.
    pub mode_volume: f64,
    pub polarization: f64,
    /// AC field amplitude [T].
    pub b1: f64,
}

impl EnsembleSpec {
    pub fn new(density: f64, mode_volume: f64, polarization: f64, b1: f64) -> Result<Self> {
        let all = [density, mode_volume, polarization, b1];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) || polarization > 1.0 {
            return Err(Error::invalid(format!(
                "ensemble spec fields must be >= 0 with polarization <= 1, got {all:?}"
            )));
        }
        Ok(Self {
            density,
            mode_volume,
            polarization,
            b1,
        })
    }
}

pub fn per_cm3_to_per_m3(n: f64) -> f64 {
    n * 1e6
}

pub fn cm3_to_m3(v: f64) -> f64 {
    v * 1e-6
}

/// Number of spins in the mode volume (real valued).
pub fn spin_count(spec: &EnsembleSpec) -> f64 {
    spec.density * spec.mode_volume
}

/// Collective coupling of an ensemble at rotation angle `phi`.
pub fn ensemble_coupling(plane: &AnisotropyPlane, phi: f64, spec: &EnsembleSpec) -> Result<f64> {
    let v1 = single_spin_coupling(g_ac(plane, phi)?, spec.b1)?;
    collective_coupling(v1, spin_count(spec), spec.polarization)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn site1() -> AnisotropyPlane {
        AnisotropyPlane::new(1.5, 14.8).unwrap()
    }

    #[test]
    fn g_dc_endpoints() {
        let p = site1();
        assert_eq!(g_dc(&p, 0.0), 1.5);
        assert!((g_dc(&p, FRAC_PI_2) - 14.8).abs() < 1e-14);
        let iso = AnisotropyPlane::new(2.0, 2.0).unwrap();
        for k in 0..50 {
            assert!((g_dc(&iso, 0.37 * k as f64) - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn g_ac_values() {
        let p = site1();
        assert_eq!(g_ac(&p, 0.0).unwrap(), 14.8);
        assert_eq!(g_ac(&p, FRAC_PI_2).unwrap(), 1.5);
        let expect = 22.2 / ((1.5f64.powi(2) + 14.8f64.powi(2)) / 2.0).sqrt();
        assert!((g_ac(&p, FRAC_PI_4).unwrap() - expect).abs() < 1e-14);
        assert!((expect - 2.1105).abs() < 1e-4);
        let zero = AnisotropyPlane::new(0.0, 0.0).unwrap();
        assert!(matches!(g_ac(&zero, 0.3), Err(Error::ModelDomain(_))));
    }

    #[test]
    fn plane_orders_values() {
        let p = AnisotropyPlane::new(14.8, 1.5).unwrap();
        assert_eq!((p.g_y(), p.g_z()), (1.5, 14.8));
        assert!(AnisotropyPlane::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn product_identity_on_grid() {
        let p = site1();
        for k in 0..1000 {
            let phi = 2.0 * PI * k as f64 / 1000.0;
            let prod = g_dc(&p, phi) * g_ac(&p, phi).unwrap();
            assert!((prod - 22.2).abs() <= 1e-12 * 22.2);
        }
    }

    #[test]
    fn g_dc_periodicity_and_extrema() {
        let p = site1();
        let n = 1000;
        let grid: Vec<f64> = (0..n).map(|k| PI * k as f64 / n as f64).collect();
        for &phi in &grid {
            assert!((g_dc(&p, phi) - g_dc(&p, phi + PI)).abs() < 1e-12);
        }
        let vals: Vec<f64> = grid.iter().map(|&x| g_dc(&p, x)).collect();
        let argmin = (0..n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        let argmax = (0..n).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        assert_eq!(grid[argmin], 0.0);
        assert_eq!(grid[argmax], FRAC_PI_2);
    }

    #[test]
    fn single_spin_values() {
        let v = single_spin_coupling(14.8, 1e-6).unwrap();
        let oracle = 9.2740100783e-24 * 14.8 * 1e-6 / (2.0 * 6.62607015e-34);
        assert!((v - oracle).abs() < 1e-9 * oracle);
        assert!((v - 103.56e3).abs() < 0.05e3);
        assert_eq!(single_spin_coupling(3.3, 0.0).unwrap(), 0.0);
        let v2 = single_spin_coupling(3.3, 2e-6).unwrap();
        assert_eq!(v2, 2.0 * single_spin_coupling(3.3, 1e-6).unwrap());
        assert!(single_spin_coupling(1.0, -1e-9).is_err());
    }

    #[test]
    fn collective_values() {
        let v = collective_coupling(40.6, 7e11, 1.0).unwrap();
        assert!((v - 33.97e6).abs() < 0.01e6, "{v}");
        assert_eq!(collective_coupling(40.6, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(collective_coupling(40.6, 1.0, 1.0).unwrap(), 40.6);
        assert!(collective_coupling(40.6, -1.0, 1.0).is_err());
        assert!(collective_coupling(40.6, 1.0, 1.1).is_err());
    }

    #[test]
    fn collective_is_monotone() {
        let base = collective_coupling(40.0, 1e10, 0.5).unwrap();
        assert!(collective_coupling(41.0, 1e10, 0.5).unwrap() > base);
        assert!(collective_coupling(40.0, 2e10, 0.5).unwrap() > base);
        assert!(collective_coupling(40.0, 1e10, 0.6).unwrap() > base);
    }

    #[test]
    fn spin_counts() {
        let spec = EnsembleSpec::new(per_cm3_to_per_m3(7e17), cm3_to_m3(1e-6), 1.0, 0.0).unwrap();
        assert!((spin_count(&spec) - 7e11).abs() < 1e-3 * 7e11 * 1e-9);
        let zero = EnsembleSpec::new(0.0, 1e-12, 1.0, 0.0).unwrap();
        assert_eq!(spin_count(&zero), 0.0);
        let e18 = EnsembleSpec::new(per_cm3_to_per_m3(1e18), cm3_to_m3(1e-6), 1.0, 0.0).unwrap();
        assert!((spin_count(&e18) - 1e12).abs() < 1.0);
        assert!(EnsembleSpec::new(1.0, 1.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn coupling_decreases_with_tuning_g() {
        // fixed gy*gz and b1*sqrt(N): v falls as g_dc grows
        let spec = EnsembleSpec::new(7e23, 1e-12, 1.0, 1e-7).unwrap();
        let p = site1();
        let mut last = f64::INFINITY;
        let mut last_g = 0.0;
        for k in 0..=90 {
            let phi = (k as f64).to_radians();
            let g = g_dc(&p, phi);
            let v = ensemble_coupling(&p, phi, &spec).unwrap();
            if k > 0 {
                assert!(g > last_g);
                assert!(v < last);
            }
            last = v;
            last_g = g;
        }
    }
}
