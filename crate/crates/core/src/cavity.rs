//! Microwave transmission forward models: the multi-resonance Fano lineshape,
//! a notch resonator coupled to spin ensembles, normal modes, the dispersive
//! limit, cooperativity and bare Lorentzian absorption.
//!
//! All rates are FWHM in Hz and every power is linear `|S21|^2`.

use num_complex::Complex64;

use crate::spincore::Resonator;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoResonance {
    /// Center [Hz].
    pub f_i: f64,
    /// FWHM [Hz].
    pub gamma_i: f64,
    /// Absorptive amplitude [Hz^2].
    pub a1: f64,
    /// Dispersive amplitude [Hz].
    pub a2: f64,
}

impl FanoResonance {
    pub fn new(f_i: f64, gamma_i: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(gamma_i > 0.0) || ![f_i, gamma_i, a1, a2].iter().all(|x| x.is_finite()) {
            return Err(Error::invalid(format!(
                "Fano resonance needs finite parameters and gamma > 0 (f={f_i}, gamma={gamma_i})"
            )));
        }
        Ok(Self { f_i, gamma_i, a1, a2 })
    }

    /// Resonant term `(a1 + a2 (f - f_i)) / ((f - f_i)^2 + gamma^2/4)`.
    pub fn term(&self, f: f64) -> f64 {
        let d = f - self.f_i;
        (self.a1 + self.a2 * d) / (d * d + 0.25 * self.gamma_i * self.gamma_i)
    }
}

/// Quadratic baseline `c0 + c1 u + c2 u^2` in the normalized offset
/// `u = (f - center) / half_span`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    pub center: f64,
    pub half_span: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Baseline {
    pub fn new(center: f64, half_span: f64, c0: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(half_span > 0.0) || ![center, half_span, c0, c1, c2].iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("baseline needs finite coefficients and half_span > 0"));
        }
        Ok(Self { center, half_span, c0, c1, c2 })
    }

    /// Baseline normalized to the window `[f_lo, f_hi]`.
    pub fn for_window(f_lo: f64, f_hi: f64, c0: f64, c1: f64, c2: f64) -> Result<Self> {
        Self::new(0.5 * (f_lo + f_hi), 0.5 * (f_hi - f_lo), c0, c1, c2)
    }

    pub fn constant(c0: f64) -> Self {
        Self { center: 0.0, half_span: 1.0, c0, c1: 0.0, c2: 0.0 }
    }

    pub fn eval(&self, f: f64) -> f64 {
        let u = (f - self.center) / self.half_span;
        self.c0 + u * (self.c1 + u * self.c2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinLine {
    /// Center [Hz].
    pub f_s: f64,
    /// FWHM [Hz].
    pub gamma2: f64,
    /// Collective coupling [Hz].
    pub v: f64,
}

impl SpinLine {
    pub fn new(f_s: f64, gamma2: f64, v: f64) -> Result<Self> {
        if !f_s.is_finite() || !(gamma2 > 0.0) || !gamma2.is_finite() || !(v >= 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!(
                "spin line needs gamma2 > 0 and v >= 0 (gamma2={gamma2}, v={v})"
            )));
        }
        Ok(Self { f_s, gamma2, v })
    }
}

/// Unchecked multi-Fano power at one frequency.
pub fn multifano_value(f: f64, baseline: &Baseline, resonances: &[FanoResonance]) -> f64 {
    let sum: f64 = resonances.iter().map(|r| r.term(f)).sum();
    baseline.eval(f) * (1.0 + sum)
}

/// Multi-Fano power on a frequency grid.
pub fn multifano_power(
    freqs: &[f64],
    baseline: &Baseline,
    resonances: &[FanoResonance],
) -> Result<Vec<f64>> {
    freqs
        .iter()
        .map(|&f| {
            let b = baseline.eval(f);
            if !(b > 0.0) {
                return Err(Error::domain(format!("baseline is {b} at {f} Hz")));
            }
            Ok(multifano_value(f, baseline, resonances))
        })
        .collect()
}

/// Complex transmission of a notch resonator coupled to spin ensembles.
pub fn notch_transmission(f: f64, res: &Resonator, spins: &[SpinLine]) -> Complex64 {
    notch_s21(f, res.f_c, res.kappa_c, res.kappa_i, spins)
}

pub fn notch_power(f: f64, res: &Resonator, spins: &[SpinLine]) -> f64 {
    notch_transmission(f, res, spins).norm_sqr()
}

/// Raw-parameter form of [`notch_transmission`], used by the fitting models.
pub fn notch_s21(f: f64, f_c: f64, kappa_c: f64, kappa_i: f64, spins: &[SpinLine]) -> Complex64 {
    let mut denom = Complex64::new(0.5 * (kappa_c + kappa_i), f_c - f);
    for s in spins {
        if s.v != 0.0 {
            denom += s.v * s.v / Complex64::new(0.5 * s.gamma2, s.f_s - f);
        }
    }
    Complex64::new(1.0, 0.0) - 0.5 * kappa_c / denom
}

/// Complex mode frequencies ordered so that `Re(upper) >= Re(lower)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModes {
    pub upper: Complex64,
    pub lower: Complex64,
}

impl NormalModes {
    /// `Re(upper - lower)`.
    pub fn splitting(&self) -> f64 {
        self.upper.re - self.lower.re
    }
}

pub fn normal_modes(res: &Resonator, spin: &SpinLine) -> NormalModes {
    let a = Complex64::new(res.f_c, -0.5 * res.kappa());
    let b = Complex64::new(spin.f_s, -0.5 * spin.gamma2);
    let (p, q) = if spin.v == 0.0 {
        (a, b)
    } else {
        let mean = 0.5 * (a + b);
        let half = 0.5 * (a - b);
        let root = (half * half + spin.v * spin.v).sqrt();
        (mean + root, mean - root)
    };
    if p.re >= q.re {
        NormalModes { upper: p, lower: q }
    } else {
        NormalModes { upper: q, lower: p }
    }
}

/// Cavity frequency pull and added damping (FWHM increment of kappa_i) from an
/// off-resonant spin line at detuning `delta = f_s - f_c`.
pub fn dispersive_response(delta: f64, v: f64, gamma2: f64) -> Result<(f64, f64)> {
    let denom = delta * delta + 0.25 * gamma2 * gamma2;
    if denom == 0.0 {
        return Err(Error::domain("dispersive response singular at delta = gamma2 = 0"));
    }
    let v2 = v * v;
    Ok((-v2 * delta / denom, v2 * gamma2 / denom))
}

/// `C = 2 v^2 / (kappa_c gamma2)`.
pub fn cooperativity(v: f64, kappa_c: f64, gamma2: f64) -> Result<f64> {
    if !(kappa_c > 0.0) || !(gamma2 > 0.0) {
        return Err(Error::invalid(format!(
            "cooperativity needs kappa_c > 0 and gamma2 > 0 (got {kappa_c}, {gamma2})"
        )));
    }
    Ok(2.0 * v * v / (kappa_c * gamma2))
}

/// Lorentzian absorption dip of fractional `depth` on a transmission line.
pub fn line_absorption_power(f: f64, f_s: f64, gamma2: f64, depth: f64) -> f64 {
    let hw2 = 0.25 * gamma2 * gamma2;
    let d = f - f_s;
    1.0 - depth * hw2 / (d * d + hw2)
}
