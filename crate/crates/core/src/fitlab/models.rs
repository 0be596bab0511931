//! Registered one-dimensional forward models.

use std::fmt;

use crate::cavity::{self, Baseline, FanoResonance, SpinLine};
use crate::{Error, Result};

use super::engine::Objective;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// `slope * x + intercept`
    Linear,
    /// `background * line_absorption_power(x; center, fwhm, depth)`
    Lorentzian,
    /// `a - b exp(-t / t1)`
    Exponential,
    /// Baseline times `1 + sum` of `n` Fano terms, baseline normalized to the
    /// window `center +- half_span`.
    MultiFano { n: usize, center: f64, half_span: f64 },
    /// Bare notch resonator power.
    Notch,
    /// Notch resonator power with one coupled spin line.
    NotchSpin,
}

impl Model {
    /// Multi-Fano model with its baseline normalized to the given axis.
    pub fn multifano_for(n: usize, axis: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("need at least one resonance"));
        }
        let (lo, hi) = match (axis.first(), axis.last()) {
            (Some(&a), Some(&b)) if b > a => (a, b),
            _ => return Err(Error::invalid("multi-Fano window needs at least two points")),
        };
        Ok(Model::MultiFano {
            n,
            center: 0.5 * (lo + hi),
            half_span: 0.5 * (hi - lo),
        })
    }

    /// Parses `linear`, `lorentzian`, `exponential`, `notch`, `notch-spin` and
    /// `multifano:N`. Multi-Fano windows are filled in from `axis`.
    pub fn parse(name: &str, axis: &[f64]) -> Result<Self> {
        match name {
            "linear" => Ok(Model::Linear),
            "lorentzian" => Ok(Model::Lorentzian),
            "exponential" => Ok(Model::Exponential),
            "notch" => Ok(Model::Notch),
            "notch-spin" => Ok(Model::NotchSpin),
            _ => match name.strip_prefix("multifano:").map(str::parse::<usize>) {
                Some(Ok(n)) => Self::multifano_for(n, axis),
                _ => Err(Error::invalid(format!("unknown model '{name}'"))),
            },
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        let fixed: &[&str] = match self {
            Model::Linear => &["slope", "intercept"],
            Model::Lorentzian => &["center", "fwhm", "depth", "background"],
            Model::Exponential => &["a", "b", "t1"],
            Model::Notch => &["f_c", "kappa_c", "kappa_i"],
            Model::NotchSpin => &["f_c", "kappa_c", "kappa_i", "f_s", "gamma2", "v"],
            Model::MultiFano { n, .. } => {
                let mut names: Vec<String> = vec!["c0".into(), "c1".into(), "c2".into()];
                for i in 0..*n {
                    for p in ["f", "gamma", "a1", "a2"] {
                        names.push(format!("{p}_{i}"));
                    }
                }
                return names;
            }
        };
        fixed.iter().map(|s| s.to_string()).collect()
    }

    pub fn arity(&self) -> usize {
        match self {
            Model::Linear => 2,
            Model::Lorentzian => 4,
            Model::Exponential => 3,
            Model::Notch => 3,
            Model::NotchSpin => 6,
            Model::MultiFano { n, .. } => 3 + 4 * n,
        }
    }

    /// Unchecked evaluation at one abscissa.
    pub fn eval(&self, x: f64, p: &[f64]) -> f64 {
        match *self {
            Model::Linear => p[0] * x + p[1],
            Model::Lorentzian => p[3] * cavity::line_absorption_power(x, p[0], p[1], p[2]),
            Model::Exponential => p[0] - p[1] * (-x / p[2]).exp(),
            Model::Notch => cavity::notch_s21(x, p[0], p[1], p[2], &[]).norm_sqr(),
            Model::NotchSpin => {
                let s = SpinLine { f_s: p[3], gamma2: p[4], v: p[5] };
                cavity::notch_s21(x, p[0], p[1], p[2], &[s]).norm_sqr()
            }
            Model::MultiFano { n, center, half_span } => {
                let u = (x - center) / half_span;
                let base = p[0] + u * (p[1] + u * p[2]);
                let mut sum = 0.0;
                for i in 0..n {
                    let q = &p[3 + 4 * i..7 + 4 * i];
                    let d = x - q[0];
                    sum += (q[2] + q[3] * d) / (d * d + 0.25 * q[1] * q[1]);
                }
                base * (1.0 + sum)
            }
        }
    }

    /// Checks the parameter vector against the model's physical domain.
    pub fn validate(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.arity() {
            return Err(Error::invalid(format!(
                "model {self} takes {} parameters, got {}",
                self.arity(),
                p.len()
            )));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        let bad = |msg: &str| Err(Error::invalid(format!("model {self}: {msg}")));
        match *self {
            Model::Lorentzian if !(p[1] > 0.0) => bad("fwhm must be > 0"),
            Model::Lorentzian if !(0.0..=1.0).contains(&p[2]) => bad("depth must lie in [0, 1]"),
            Model::Exponential if !(p[2] > 0.0) => bad("t1 must be > 0"),
            Model::Notch | Model::NotchSpin if !(p[1] > 0.0) || p[2] < 0.0 => {
                bad("kappa_c must be > 0 and kappa_i >= 0")
            }
            Model::NotchSpin if !(p[4] > 0.0) || p[5] < 0.0 => bad("gamma2 must be > 0 and v >= 0"),
            Model::MultiFano { n, .. } if (0..n).any(|i| !(p[4 + 4 * i] > 0.0)) => {
                bad("Fano widths must be > 0")
            }
            _ => Ok(()),
        }
    }

    /// Splits a multi-Fano parameter vector into baseline and resonances.
    pub fn fano_parts(&self, p: &[f64]) -> Option<(Baseline, Vec<FanoResonance>)> {
        let Model::MultiFano { n, center, half_span } = *self else {
            return None;
        };
        let baseline = Baseline { center, half_span, c0: p[0], c1: p[1], c2: p[2] };
        let res = (0..n)
            .map(|i| FanoResonance {
                f_i: p[3 + 4 * i],
                gamma_i: p[4 + 4 * i],
                a1: p[5 + 4 * i],
                a2: p[6 + 4 * i],
            })
            .collect();
        Some((baseline, res))
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Linear => write!(f, "linear"),
            Model::Lorentzian => write!(f, "lorentzian"),
            Model::Exponential => write!(f, "exponential"),
            Model::Notch => write!(f, "notch"),
            Model::NotchSpin => write!(f, "notch-spin"),
            Model::MultiFano { n, .. } => write!(f, "multifano:{n}"),
        }
    }
}

/// A model evaluated on a fixed abscissa grid.
pub struct Curve<'a> {
    pub model: Model,
    pub x: &'a [f64],
}

impl Objective for Curve<'_> {
    fn len(&self) -> usize {
        self.x.len()
    }

    fn predict(&self, params: &[f64], out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(self.x) {
            *o = self.model.eval(x, params);
        }
    }
}
