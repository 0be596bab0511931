//! Deterministic synthetic data: transmission maps and 1D traces with seeded
//! Gaussian noise.
//!
//! The generator is xorshift64* (Vigna's 64-bit multiply variant) seeded
//! through one splitmix64 step. Uniforms take the top 53 bits; Gaussians use
//! the cosine branch of Box-Muller, consuming two uniforms per draw.

use rayon::prelude::*;

use crate::cavity::{notch_power, SpinLine};
use crate::fitlab::Model;
use crate::spincore::{AxisKind, FieldMap2D, Resonator, Spectrum1D};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        // xorshift state must be nonzero
        Self { state: if z == 0 { 0x9E37_79B9_7F4A_7C15 } else { z } }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    None,
    /// Standard deviation `level * |value|` per point.
    GaussianRelative,
    /// Standard deviation `level` per point.
    GaussianAbsolute,
}

impl NoiseKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(NoiseKind::None),
            "gaussian_relative" | "relative" => Some(NoiseKind::GaussianRelative),
            "gaussian_absolute" | "absolute" => Some(NoiseKind::GaussianAbsolute),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, level: f64, seed: u64) -> Result<Self> {
        if !(level >= 0.0) || !level.is_finite() {
            return Err(Error::invalid(format!("noise level must be >= 0, got {level}")));
        }
        Ok(Self { kind, level, seed })
    }

    pub fn none() -> Self {
        Self { kind: NoiseKind::None, level: 0.0, seed: 0 }
    }

    /// Adds noise in place, in index order.
    pub fn apply(&self, values: &mut [f64]) {
        if self.kind == NoiseKind::None || self.level == 0.0 {
            return;
        }
        let mut rng = Rng::new(self.seed);
        for v in values.iter_mut() {
            let sigma = match self.kind {
                NoiseKind::GaussianRelative => self.level * v.abs(),
                _ => self.level,
            };
            *v += sigma * rng.gaussian();
        }
    }
}

/// A spin line tuned linearly by the DC field:
/// `f_s(B) = f_cross + slope (B - b_cross)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSweep {
    pub b_cross: f64,
    pub f_cross: f64,
    /// [Hz/T]
    pub slope: f64,
    pub gamma2: f64,
    /// Collective coupling to each resonator, in resonator order.
    pub couplings: Vec<f64>,
}

impl SpinSweep {
    pub fn line_at(&self, b: f64, v: f64) -> SpinLine {
        SpinLine { f_s: self.f_cross + self.slope * (b - self.b_cross), gamma2: self.gamma2, v }
    }
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(format!("{what} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(format!("{what} grid must be finite and strictly increasing")));
    }
    Ok(())
}

/// Transmission power over a field-frequency grid: the product of the notch
/// responses of all resonators, each coupled to every swept spin line. Noisy
/// samples are clamped at zero.
pub fn gen_map(
    resonators: &[Resonator],
    spins: &[SpinSweep],
    fields: &[f64],
    freqs: &[f64],
    noise: &NoiseSpec,
) -> Result<FieldMap2D> {
    check_grid(fields, "field")?;
    check_grid(freqs, "frequency")?;
    for s in spins {
        if s.couplings.len() != resonators.len() {
            return Err(Error::invalid(format!(
                "{} couplings for {} resonators",
                s.couplings.len(),
                resonators.len()
            )));
        }
        if !(s.gamma2 > 0.0) || s.couplings.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invalid("spin sweep needs gamma2 > 0 and couplings >= 0"));
        }
    }
    let nf = freqs.len();
    let mut power = vec![0.0; fields.len() * nf];
    power.par_chunks_mut(nf).zip(fields.par_iter()).for_each(|(row, &b)| {
        let lines: Vec<Vec<SpinLine>> = resonators
            .iter()
            .enumerate()
            .map(|(k, _)| spins.iter().map(|s| s.line_at(b, s.couplings[k])).collect())
            .collect();
        for (o, &f) in row.iter_mut().zip(freqs) {
            *o = resonators
                .iter()
                .zip(&lines)
                .map(|(r, l)| notch_power(f, r, l))
                .product();
        }
    });
    noise.apply(&mut power);
    for p in power.iter_mut() {
        *p = p.max(0.0);
    }
    FieldMap2D::new(fields.to_vec(), freqs.to_vec(), power)
}

/// A registered forward model on `grid`, plus noise.
pub fn gen_trace(model: Model, params: &[f64], kind: AxisKind, grid: &[f64], noise: &NoiseSpec) -> Result<Spectrum1D> {
    check_grid(grid, kind.name())?;
    model.validate(params)?;
    let mut values: Vec<f64> = grid.iter().map(|&x| model.eval(x, params)).collect();
    noise.apply(&mut values);
    Spectrum1D::new(kind, grid.to_vec(), values)
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MHZ: f64 = 1e6;

    fn res5() -> Resonator {
        Resonator::new("r5", 5.331e9, 4.7 * MHZ, 0.7 * MHZ).unwrap()
    }

    #[test]
    fn generator_is_reproducible() {
        let a: Vec<u64> = {
            let mut r = Rng::new(42);
            (0..5).map(|_| r.next_u64()).collect()
        };
        let mut r = Rng::new(42);
        let b: Vec<u64> = (0..5).map(|_| r.next_u64()).collect();
        assert_eq!(a, b);
        assert_ne!(Rng::new(43).next_u64(), a[0]);
        let mut r = Rng::new(0);
        assert!((0..1000).map(|_| r.next_f64()).all(|u| (0.0..1.0).contains(&u)));
    }

    #[test]
    fn noise_statistics() {
        for (kind, level) in [(NoiseKind::GaussianAbsolute, 0.02), (NoiseKind::GaussianRelative, 0.01)] {
            let noise = NoiseSpec::new(kind, level, 7).unwrap();
            let mut v = vec![1.0; 20_000];
            noise.apply(&mut v);
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            assert!((sd - level).abs() < 0.03 * level, "{sd}");
            assert!((mean - 1.0).abs() < 4.0 * level / n.sqrt());
        }
        assert!(NoiseSpec::new(NoiseKind::GaussianAbsolute, -1.0, 0).is_err());
    }

    #[test]
    fn map_rows_identical_without_spins() {
        let fields = linspace(0.2, 0.3, 7);
        let freqs = linspace(5.2e9, 5.4e9, 101);
        let map = gen_map(&[res5()], &[], &fields, &freqs, &NoiseSpec::none()).unwrap();
        for i in 1..fields.len() {
            assert_eq!(map.row(i), map.row(0));
        }
    }

    #[test]
    fn map_is_reproducible() {
        let sweep = SpinSweep { b_cross: 0.2732, f_cross: 5.331e9, slope: 2e10, gamma2: 12.0 * MHZ, couplings: vec![34.0 * MHZ] };
        let fields = linspace(0.27, 0.276, 9);
        let freqs = linspace(5.2e9, 5.4e9, 201);
        let noise = NoiseSpec::new(NoiseKind::GaussianRelative, 0.01, 99).unwrap();
        let a = gen_map(&[res5()], std::slice::from_ref(&sweep), &fields, &freqs, &noise).unwrap();
        let b = gen_map(&[res5()], std::slice::from_ref(&sweep), &fields, &freqs, &noise).unwrap();
        assert_eq!(a, b);
        let bits = |m: &FieldMap2D| m.power().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn crossing_cut_splits_by_two_v() {
        let r = res5();
        let sweep = SpinSweep { b_cross: 0.2732, f_cross: r.f_c, slope: 2e10, gamma2: 12.0 * MHZ, couplings: vec![34.0 * MHZ] };
        let freqs = linspace(r.f_c - 100.0 * MHZ, r.f_c + 100.0 * MHZ, 4001);
        let map = gen_map(&[r], std::slice::from_ref(&sweep), &[0.2732], &freqs, &NoiseSpec::none()).unwrap();
        let row = map.row(0);
        let mins: Vec<f64> = (1..row.len() - 1)
            .filter(|&k| row[k] < row[k - 1] && row[k] <= row[k + 1])
            .map(|k| freqs[k])
            .collect();
        assert_eq!(mins.len(), 2);
        assert!((mins[1] - mins[0] - 68.0 * MHZ).abs() < 1.0 * MHZ);
    }

    #[test]
    fn overlapping_resonators_multiply() {
        let a = Resonator::new("a", 5.0e9, 2.0 * MHZ, 0.5 * MHZ).unwrap();
        let b = Resonator::new("b", 5.001e9, 3.0 * MHZ, 0.5 * MHZ).unwrap();
        let freqs = linspace(4.99e9, 5.01e9, 51);
        let map = gen_map(&[a.clone(), b.clone()], &[], &[0.1], &freqs, &NoiseSpec::none()).unwrap();
        for (k, &f) in freqs.iter().enumerate() {
            assert_eq!(map.row(0)[k], notch_power(f, &a, &[]) * notch_power(f, &b, &[]));
        }
        assert!(gen_map(&[a], &[], &[0.2, 0.1], &freqs, &NoiseSpec::none()).is_err());
    }

    #[test]
    fn noiseless_trace_equals_model() {
        let grid = linspace(5.28e9, 5.38e9, 401);
        let p = [5.331e9, 13.8 * MHZ, 0.12, 1.0];
        let t = gen_trace(Model::Lorentzian, &p, AxisKind::Frequency, &grid, &NoiseSpec::none()).unwrap();
        for (x, y) in grid.iter().zip(t.values()) {
            assert_eq!(*y, Model::Lorentzian.eval(*x, &p));
        }
        let k = grid.iter().position(|&f| f == 5.331e9).unwrap_or(200);
        assert!((t.values()[k] - 0.88).abs() < 1e-3);

        let times = linspace(0.0, 25.0, 100);
        let r = gen_trace(Model::Exponential, &[0.12, 0.12, 4.3], AxisKind::Time, &times, &NoiseSpec::none()).unwrap();
        assert_eq!(r.values()[0], 0.0);
        assert!(gen_trace(Model::Exponential, &[0.1, 0.1, -1.0], AxisKind::Time, &times, &NoiseSpec::none()).is_err());
    }
}
