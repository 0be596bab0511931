//! Rotations and small vector helpers.
//!
//! Euler angles follow the ZYZ convention used by common ESR toolkits:
//! `R(alpha, beta, gamma) = Rz(alpha) * Ry(beta) * Rz(gamma)`, active
//! rotations, angles in radians.

use nalgebra::{Matrix3, Vector3};

use crate::{Error, Result};

pub fn rotation_from_euler(alpha: f64, beta: f64, gamma: f64) -> Result<Matrix3<f64>> {
    if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
        return Err(Error::invalid(format!(
            "Euler angles must be finite, got ({alpha}, {beta}, {gamma})"
        )));
    }
    Ok(rot_z(alpha) * rot_y(beta) * rot_z(gamma))
}

pub fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Largest deviation of `RᵀR` from the identity, and `det R`.
pub fn orthonormality_defect(r: &Matrix3<f64>) -> (f64, f64) {
    let d = r.transpose() * r - Matrix3::identity();
    (d.abs().max(), r.determinant())
}

/// Unit vector from polar angle `theta` (from the crystal b axis, z) and
/// azimuth `phi` (from D1, x).
pub fn direction_from_angles(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}

pub(crate) fn check_unit(n: &Vector3<f64>, what: &str) -> Result<()> {
    let norm = n.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "{what} must be a unit vector (|n| = {norm})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn zero_angles_give_identity() {
        let r = rotation_from_euler(0.0, 0.0, 0.0).unwrap();
        assert_eq!(r, Matrix3::identity());
    }

    #[test]
    fn pi_about_z_flips_x_and_y() {
        let r = rotation_from_euler(PI, 0.0, 0.0).unwrap();
        let expect = Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 1.0));
        assert!((r - expect).abs().max() < 1e-15);
    }

    #[test]
    fn generic_angles_are_orthonormal() {
        let r = rotation_from_euler(0.3, 0.7, 1.1).unwrap();
        let (defect, det) = orthonormality_defect(&r);
        assert!(defect < 1e-14, "defect {defect}");
        assert!((det - 1.0).abs() < 1e-14);
    }

    #[test]
    fn x_rotation_expressed_in_zyz() {
        let a = 0.83;
        let r = rotation_from_euler(-FRAC_PI_2, a, FRAC_PI_2).unwrap();
        assert!((r - rot_x(a)).abs().max() < 1e-15);
    }

    #[test]
    fn non_finite_angles_rejected() {
        assert!(matches!(
            rotation_from_euler(f64::NAN, 0.0, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(rotation_from_euler(0.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn direction_is_unit() {
        let n = direction_from_angles(44f64.to_radians(), 111f64.to_radians());
        assert!((n.norm() - 1.0).abs() < 1e-15);
        assert!(check_unit(&n, "n").is_ok());
        assert!(check_unit(&(n * 1.1), "n").is_err());
    }
}
