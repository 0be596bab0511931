use nalgebra::{Matrix3, Vector3};

use super::rotation::{direction_from_angles, orthonormality_defect, rotation_from_euler};
use crate::{Error, Result};

/// Anisotropic g-tensor: principal values plus the ZYZ Euler angles of the
/// rotation taking the principal frame into the crystal frame (D1, D2, b).
#[derive(Debug, Clone, PartialEq)]
pub struct GTensor {
    principal: [f64; 3],
    euler: [f64; 3],
    frame: Matrix3<f64>,
}

impl GTensor {
    pub fn new(principal: [f64; 3], euler: [f64; 3]) -> Result<Self> {
        if principal.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::invalid(format!(
                "g-tensor principal values must be finite and >= 0, got {principal:?}"
            )));
        }
        let frame = rotation_from_euler(euler[0], euler[1], euler[2])?;
        let (defect, det) = orthonormality_defect(&frame);
        if defect > 1e-12 || (det - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("g-tensor frame is not a proper rotation"));
        }
        Ok(Self {
            principal,
            euler,
            frame,
        })
    }

    /// Tensor whose principal axes coincide with the crystal axes.
    pub fn diagonal(gx: f64, gy: f64, gz: f64) -> Result<Self> {
        Self::new([gx, gy, gz], [0.0; 3])
    }

    pub fn isotropic(g: f64) -> Result<Self> {
        Self::diagonal(g, g, g)
    }

    pub fn principal(&self) -> [f64; 3] {
        self.principal
    }

    pub fn euler(&self) -> [f64; 3] {
        self.euler
    }

    pub fn frame(&self) -> &Matrix3<f64> {
        &self.frame
    }

    /// The tensor in the crystal frame, `R diag(g) Rᵀ`.
    pub fn matrix(&self) -> Matrix3<f64> {
        g_matrix(self)
    }
}

pub fn g_matrix(g: &GTensor) -> Matrix3<f64> {
    let d = Matrix3::from_diagonal(&Vector3::from(g.principal));
    let m = g.frame * d * g.frame.transpose();
    // symmetrize away rounding so downstream Hermiticity checks stay tight
    (m + m.transpose()) * 0.5
}

/// Nuclear spin quantum number, stored as `2I` so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct NuclearSpin(u32);

impl NuclearSpin {
    pub const ZERO: NuclearSpin = NuclearSpin(0);

    pub fn from_twice(two_i: u32) -> Self {
        NuclearSpin(two_i)
    }

    /// Accepts integer or half-integer values such as `3.5`.
    pub fn from_f64(i: f64) -> Result<Self> {
        let two = 2.0 * i;
        if !two.is_finite() || two < 0.0 || (two - two.round()).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "nuclear spin must be a non-negative half-integer, got {i}"
            )));
        }
        Ok(NuclearSpin(two.round() as u32))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Number of nuclear projections, `2I + 1`.
    pub fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// An electron spin-1/2 species with an optional nuclear spin.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSpecies {
    pub label: String,
    pub g: GTensor,
    pub nuclear_spin: NuclearSpin,
    /// Hyperfine tensor [Hz], crystal frame.
    pub hyperfine_a: Matrix3<f64>,
    /// Traceless quadrupole tensor [Hz], crystal frame.
    pub quadrupole_q: Matrix3<f64>,
    pub abundance: f64,
}

impl SpinSpecies {
    /// Electron-only species (I = 0), full abundance.
    pub fn electronic(label: impl Into<String>, g: GTensor) -> Self {
        SpinSpecies {
            label: label.into(),
            g,
            nuclear_spin: NuclearSpin::ZERO,
            hyperfine_a: Matrix3::zeros(),
            quadrupole_q: Matrix3::zeros(),
            abundance: 1.0,
        }
    }

    pub fn new(
        label: impl Into<String>,
        g: GTensor,
        nuclear_spin: NuclearSpin,
        hyperfine_a: Matrix3<f64>,
        quadrupole_q: Matrix3<f64>,
        abundance: f64,
    ) -> Result<Self> {
        let s = SpinSpecies {
            label: label.into(),
            g,
            nuclear_spin,
            hyperfine_a,
            quadrupole_q,
            abundance,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let label = &self.label;
        if !(0.0..=1.0).contains(&self.abundance) {
            return Err(Error::invalid(format!(
                "species {label}: abundance {} outside [0, 1]",
                self.abundance
            )));
        }
        for (name, t) in [("hyperfine", &self.hyperfine_a), ("quadrupole", &self.quadrupole_q)] {
            if t.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("species {label}: {name} tensor not finite")));
            }
            let asym = (t - t.transpose()).abs().max();
            if asym > 1e-12 * t.abs().max().max(1.0) {
                return Err(Error::invalid(format!(
                    "species {label}: {name} tensor not symmetric"
                )));
            }
        }
        if self.nuclear_spin.is_zero()
            && (self.hyperfine_a.abs().max() > 0.0 || self.quadrupole_q.abs().max() > 0.0)
        {
            return Err(Error::invalid(format!(
                "species {label}: hyperfine and quadrupole tensors must vanish for I = 0"
            )));
        }
        let q_norm = self.quadrupole_q.norm();
        if q_norm > 0.0 && self.quadrupole_q.trace().abs() >= 1e-9 * q_norm {
            return Err(Error::invalid(format!(
                "species {label}: quadrupole tensor must be traceless"
            )));
        }
        Ok(())
    }
}

/// Direction of the DC field in the crystal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalOrientation {
    theta: f64,
    phi: f64,
}

impl CrystalOrientation {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) || !(0.0..=std::f64::consts::PI).contains(&theta)
        {
            return Err(Error::invalid(format!(
                "orientation theta must lie in [0, pi], got {theta}"
            )));
        }
        let tau = 2.0 * std::f64::consts::PI;
        let phi = phi.rem_euclid(tau);
        // rem_euclid can round up to exactly 2π for tiny negative inputs
        let phi = if phi >= tau { 0.0 } else { phi };
        Ok(Self { theta, phi })
    }

    pub fn from_degrees(theta: f64, phi: f64) -> Result<Self> {
        Self::new(theta.to_radians(), phi.to_radians())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn direction(&self) -> Vector3<f64> {
        direction_from_angles(self.theta, self.phi)
    }
}

/// One lumped-element resonator mode. Rates are FWHM in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Resonator {
    pub label: String,
    pub f_c: f64,
    pub kappa_c: f64,
    pub kappa_i: f64,
}

impl Resonator {
    pub fn new(label: impl Into<String>, f_c: f64, kappa_c: f64, kappa_i: f64) -> Result<Self> {
        let label = label.into();
        if !(f_c.is_finite() && f_c > 0.0) {
            return Err(Error::invalid(format!("resonator {label}: f_c must be > 0")));
        }
        if !(kappa_c.is_finite() && kappa_c > 0.0) {
            return Err(Error::invalid(format!("resonator {label}: kappa_c must be > 0")));
        }
        if !(kappa_i.is_finite() && kappa_i >= 0.0) {
            return Err(Error::invalid(format!("resonator {label}: kappa_i must be >= 0")));
        }
        Ok(Self {
            label,
            f_c,
            kappa_c,
            kappa_i,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_c + self.kappa_i
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisKind {
    Frequency,
    Time,
    Field,
}

impl AxisKind {
    pub fn name(self) -> &'static str {
        match self {
            AxisKind::Frequency => "frequency",
            AxisKind::Time => "time",
            AxisKind::Field => "field",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            AxisKind::Frequency => "Hz",
            AxisKind::Time => "s",
            AxisKind::Field => "T",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.trim() {
            "frequency" => Some(AxisKind::Frequency),
            "time" => Some(AxisKind::Time),
            "field" => Some(AxisKind::Field),
            _ => None,
        }
    }
}

fn check_axis(axis: &[f64], what: &str) -> Result<()> {
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("{what} axis contains non-finite values")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("{what} axis is not strictly increasing")));
    }
    Ok(())
}

/// A 1D trace of linear power (or another finite quantity) versus an axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum1D {
    kind: AxisKind,
    axis: Vec<f64>,
    values: Vec<f64>,
}

impl Spectrum1D {
    pub fn new(kind: AxisKind, axis: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if axis.len() != values.len() {
            return Err(Error::invalid(format!(
                "axis has {} points but values has {}",
                axis.len(),
                values.len()
            )));
        }
        check_axis(&axis, kind.name())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("spectrum values must be finite"));
        }
        Ok(Self { kind, axis, values })
    }

    pub fn kind(&self) -> AxisKind {
        self.kind
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((*self.axis.first()?, *self.axis.last()?))
    }
}

/// Power versus DC field (rows) and frequency (columns), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap2D {
    fields: Vec<f64>,
    freqs: Vec<f64>,
    power: Vec<f64>,
}

impl FieldMap2D {
    pub fn new(fields: Vec<f64>, freqs: Vec<f64>, power: Vec<f64>) -> Result<Self> {
        check_axis(&fields, "field")?;
        check_axis(&freqs, "frequency")?;
        if power.len() != fields.len() * freqs.len() {
            return Err(Error::invalid(format!(
                "power matrix has {} entries, expected {} x {}",
                power.len(),
                fields.len(),
                freqs.len()
            )));
        }
        if power.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("map power must be finite and >= 0"));
        }
        Ok(Self {
            fields,
            freqs,
            power,
        })
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.freqs.len();
        &self.power[i * n..(i + 1) * n]
    }

    /// The frequency cut at field index `i`.
    pub fn cut(&self, i: usize) -> Spectrum1D {
        Spectrum1D {
            kind: AxisKind::Frequency,
            axis: self.freqs.clone(),
            values: self.row(i).to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spincore::rotation::rot_x;
    use std::f64::consts::FRAC_PI_2;

    fn sorted_eigs(m: &Matrix3<f64>) -> Vec<f64> {
        let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn site1_identity_frame() {
        let g = GTensor::diagonal(0.0, 1.5, 14.8).unwrap();
        let m = g_matrix(&g);
        let expect = Matrix3::from_diagonal(&Vector3::new(0.0, 1.5, 14.8));
        assert_eq!(m, expect);
    }

    #[test]
    fn isotropic_is_rotation_invariant() {
        let g = GTensor::new([2.0; 3], [0.4, 1.3, -2.2]).unwrap();
        let m = g_matrix(&g);
        assert!((m - Matrix3::identity() * 2.0).abs().max() < 1e-14);
    }

    #[test]
    fn quarter_turn_about_x_swaps_y_and_z() {
        // Rx(pi/2) in ZYZ form
        let g = GTensor::new([0.0, 1.5, 14.8], [-FRAC_PI_2, FRAC_PI_2, FRAC_PI_2]).unwrap();
        assert!((g.frame() - rot_x(FRAC_PI_2)).abs().max() < 1e-15);
        let m = g_matrix(&g);
        let expect = Matrix3::from_diagonal(&Vector3::new(0.0, 14.8, 1.5));
        assert!((m - expect).abs().max() < 1e-13);
    }

    #[test]
    fn eigenvalues_match_principal_values() {
        let g = GTensor::new([0.3, 1.5, 14.8], [0.3, 0.7, 1.1]).unwrap();
        let m = g_matrix(&g);
        assert!((m - m.transpose()).abs().max() < 1e-12);
        let e = sorted_eigs(&m);
        for (a, b) in e.iter().zip([0.3, 1.5, 14.8]) {
            assert!((a - b).abs() < 1e-10 * 14.8);
        }
    }

    #[test]
    fn rejects_negative_principal() {
        assert!(GTensor::diagonal(-0.1, 1.0, 1.0).is_err());
        assert!(GTensor::diagonal(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn nuclear_spin_parsing() {
        assert_eq!(NuclearSpin::from_f64(3.5).unwrap().twice(), 7);
        assert_eq!(NuclearSpin::from_f64(3.5).unwrap().multiplicity(), 8);
        assert!(NuclearSpin::from_f64(0.3).is_err());
        assert!(NuclearSpin::from_f64(-0.5).is_err());
    }

    #[test]
    fn species_tensor_rules() {
        let g = GTensor::isotropic(2.0).unwrap();
        let a = Matrix3::from_diagonal(&Vector3::new(1e8, 1e8, 5e8));
        assert!(SpinSpecies::new("x", g.clone(), NuclearSpin::ZERO, a, Matrix3::zeros(), 1.0).is_err());
        let i = NuclearSpin::from_twice(7);
        assert!(SpinSpecies::new("x", g.clone(), i, a, Matrix3::zeros(), 0.23).is_ok());
        let q_bad = Matrix3::from_diagonal(&Vector3::new(1e6, 1e6, 1e6));
        assert!(SpinSpecies::new("x", g.clone(), i, a, q_bad, 0.23).is_err());
        let q = Matrix3::from_diagonal(&Vector3::new(-1e6, -1e6, 2e6));
        assert!(SpinSpecies::new("x", g.clone(), i, a, q, 0.23).is_ok());
        assert!(SpinSpecies::new("x", g, i, a, q, 1.5).is_err());
    }

    #[test]
    fn orientation_ranges() {
        let o = CrystalOrientation::new(1.0, -0.5).unwrap();
        assert!((0.0..2.0 * std::f64::consts::PI).contains(&o.phi()));
        assert!(CrystalOrientation::new(-0.1, 0.0).is_err());
        assert!(CrystalOrientation::new(4.0, 0.0).is_err());
    }

    #[test]
    fn resonator_validation() {
        assert!(Resonator::new("#5", 4.891e9, 4.7e6, 0.7e6).is_ok());
        assert!(Resonator::new("#5", 0.0, 4.7e6, 0.7e6).is_err());
        assert!(Resonator::new("#5", 5e9, 0.0, 0.7e6).is_err());
        assert!(Resonator::new("#5", 5e9, 1.0, -1.0).is_err());
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum1D::new(AxisKind::Time, vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Spectrum1D::new(AxisKind::Time, vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Spectrum1D::new(AxisKind::Time, vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        let s = Spectrum1D::new(AxisKind::Time, vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(s.span(), Some((0.0, 1.0)));
    }

    #[test]
    fn map_validation() {
        assert!(FieldMap2D::new(vec![0.1, 0.2], vec![1.0, 2.0, 3.0], vec![1.0; 6]).is_ok());
        assert!(FieldMap2D::new(vec![0.1, 0.2], vec![1.0, 2.0, 3.0], vec![1.0; 5]).is_err());
        assert!(FieldMap2D::new(vec![0.2, 0.1], vec![1.0], vec![1.0; 2]).is_err());
        let mut p = vec![1.0; 6];
        p[3] = -1e-3;
        assert!(FieldMap2D::new(vec![0.1, 0.2], vec![1.0, 2.0, 3.0], p).is_err());
    }
}
