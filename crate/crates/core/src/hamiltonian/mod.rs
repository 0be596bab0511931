//! Effective spin Hamiltonian of an electron spin-1/2 with anisotropic g-tensor,
//! optionally coupled to a nuclear spin:
//!
//! ```text
//! H/h = (mu_B/h) B0·g·S + S·A·I + I·Q·I - g_n (mu_N/h) B0·I      [Hz]
//! ```
//!
//! The product basis is `|m_S> ⊗ |m_I>` with both projections descending.

mod eigen;
mod operators;

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

pub use eigen::{eigensystem, reconstruction_error, Eigensystem, MAX_DIM};
pub use operators::spin_matrices;

use crate::spincore::constants::{H, MU_B_OVER_H, MU_N};
use crate::spincore::rotation::check_unit;
use crate::spincore::{g_matrix, CrystalOrientation, GTensor, SpinSpecies};
use crate::{Error, Result};

/// Two weights closer than this make the nuclear projection ambiguous.
const TIE_TOL: f64 = 1e-6;
/// Transitions whose element is below this fraction of the AC coupling scale
/// are treated as forbidden.
const FORBIDDEN_REL: f64 = 1e-9;

pub const FIELD_BRACKET: (f64, f64) = (1e-5, 2.0);
pub const FREQ_TOL_HZ: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    pub species: SpinSpecies,
    /// DC field in the crystal frame [T].
    pub b0: Vector3<f64>,
    /// Nuclear g-factor, 0 disables the nuclear Zeeman term.
    pub nuclear_g: f64,
}

impl HamiltonianModel {
    pub fn new(species: SpinSpecies, b0: Vector3<f64>) -> Result<Self> {
        let m = HamiltonianModel {
            species,
            b0,
            nuclear_g: 0.0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_nuclear_g(mut self, g_n: f64) -> Self {
        self.nuclear_g = g_n;
        self
    }

    pub fn dim(&self) -> usize {
        2 * self.species.nuclear_spin.multiplicity()
    }

    fn validate(&self) -> Result<()> {
        if self.b0.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("DC field must be finite"));
        }
        if !self.nuclear_g.is_finite() {
            return Err(Error::invalid("nuclear g-factor must be finite"));
        }
        let dim = self.dim();
        if dim > MAX_DIM {
            return Err(Error::Capacity { dim, max: MAX_DIM });
        }
        self.species.validate()
    }
}

struct SpinOps {
    s: [DMatrix<Complex64>; 3],
    i: [DMatrix<Complex64>; 3],
}

impl SpinOps {
    fn new(two_i: u32) -> Self {
        let ni = two_i as usize + 1;
        let id_e = DMatrix::<Complex64>::identity(2, 2);
        let id_n = DMatrix::<Complex64>::identity(ni, ni);
        let se = spin_matrices(1);
        let ie = spin_matrices(two_i);
        SpinOps {
            s: se.map(|m| m.kronecker(&id_n)),
            i: ie.map(|m| id_e.kronecker(&m)),
        }
    }
}

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Hamiltonian matrix in Hz.
pub fn build_hamiltonian(model: &HamiltonianModel) -> Result<DMatrix<Complex64>> {
    model.validate()?;
    let dim = model.dim();
    let sp = &model.species;
    let ops = SpinOps::new(sp.nuclear_spin.twice());
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);

    let g = g_matrix(&sp.g);
    let zeeman = g.transpose() * model.b0 * MU_B_OVER_H;
    for j in 0..3 {
        if zeeman[j] != 0.0 {
            h += &ops.s[j] * cr(zeeman[j]);
        }
    }
    if !sp.nuclear_spin.is_zero() {
        for a in 0..3 {
            for b in 0..3 {
                let aab = sp.hyperfine_a[(a, b)];
                if aab != 0.0 {
                    h += &ops.s[a] * &ops.i[b] * cr(aab);
                }
                let qab = sp.quadrupole_q[(a, b)];
                if qab != 0.0 {
                    h += &ops.i[a] * &ops.i[b] * cr(qab);
                }
            }
        }
        if model.nuclear_g != 0.0 {
            let nz = model.b0 * (-model.nuclear_g * MU_N / H);
            for j in 0..3 {
                h += &ops.i[j] * cr(nz[j]);
            }
        }
    }
    Ok((&h + h.adjoint()) * cr(0.5))
}

/// Effective g-factor `|g n|` for a field along the unit vector `n`.
pub fn g_effective(g: &GTensor, direction: &Vector3<f64>) -> Result<f64> {
    check_unit(direction, "field direction")?;
    Ok((g_matrix(g) * direction).norm())
}

/// AC g-factor of the electronic transition: the part of `g n_ac`
/// perpendicular to the quantization axis `g n_dc`, so that the single-spin
/// coupling is `mu_B g1 B1 / 2h`.
pub fn g_ac_effective(g: &GTensor, dc_direction: &Vector3<f64>, ac_direction: &Vector3<f64>) -> Result<f64> {
    check_unit(dc_direction, "field direction")?;
    check_unit(ac_direction, "AC field direction")?;
    let m = g_matrix(g);
    let k = m * dc_direction;
    let kn = k.norm();
    if !(kn > 0.0) {
        return Err(Error::ModelDomain("g n vanishes along the field direction".into()));
    }
    Ok(k.cross(&(m * ac_direction)).norm() / kn)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineKind {
    Electronic,
    /// Nuclear projection conserved (Δm_I = 0).
    HyperfineHf,
    /// Nuclear projection changes by one (|Δm_I| = 1).
    QuadrupoleQ,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionLine {
    pub level_lo: usize,
    pub level_hi: usize,
    pub freq: f64,
    /// `(mu_B/h) |<hi| n_ac·g·S |lo>|` in Hz per tesla of AC amplitude.
    pub element: f64,
    pub delta_mi: i32,
    pub kind: LineKind,
    /// Set when the dominant nuclear projection of either level was a tie.
    pub ambiguous: bool,
}

/// Dominant nuclear projection (as `2 m_I`) of each eigenvector, and whether
/// the choice was a tie.
fn nuclear_projections(
    model: &HamiltonianModel,
    es: &Eigensystem,
) -> Result<Vec<(i32, bool)>> {
    let sp = &model.species;
    let two_i = sp.nuclear_spin.twice();
    let ni = two_i as usize + 1;
    let g = g_matrix(&sp.g);

    let unit = |v: Vector3<f64>| {
        let n = v.norm();
        (n > 0.0 && n.is_finite()).then(|| v / n)
    };
    let z = Vector3::z();
    let electron_axis = unit(g * model.b0).or_else(|| unit(model.b0)).unwrap_or(z);
    let scale = sp.hyperfine_a.abs().max();
    let hf_axis = unit(sp.hyperfine_a * electron_axis)
        .filter(|_| (sp.hyperfine_a * electron_axis).norm() > 1e-12 * scale);
    let axis = hf_axis.or_else(|| unit(model.b0)).unwrap_or(electron_axis);

    let [ix, iy, iz] = spin_matrices(two_i);
    let ik = ix * cr(axis.x) + iy * cr(axis.y) + iz * cr(axis.z);
    let nuc = eigensystem(&ik)?;
    // nuc.values ascending: -I .. I, so column k has 2m = 2k - 2I
    let mut out = Vec::with_capacity(es.dim());
    for k in 0..es.dim() {
        let psi = es.vectors.column(k);
        let mut weights = vec![0.0; ni];
        for ms in 0..2 {
            for (m, w) in weights.iter_mut().enumerate() {
                let mut amp = Complex64::new(0.0, 0.0);
                for mi in 0..ni {
                    amp += nuc.vectors[(mi, m)].conj() * psi[ms * ni + mi];
                }
                *w += amp.norm_sqr();
            }
        }
        let mut idx: Vec<usize> = (0..ni).collect();
        idx.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
        let tie = ni > 1 && weights[idx[0]] - weights[idx[1]] < TIE_TOL;
        out.push((2 * idx[0] as i32 - two_i as i32, tie));
    }
    Ok(out)
}

/// Magnetic-dipole transitions with frequency inside `freq_window` (inclusive),
/// sorted by frequency. Forbidden pairs (vanishing element) are dropped.
pub fn transitions(
    model: &HamiltonianModel,
    ac_direction: &Vector3<f64>,
    freq_window: (f64, f64),
) -> Result<Vec<TransitionLine>> {
    check_unit(ac_direction, "AC field direction")?;
    let (w0, w1) = freq_window;
    if !(w0.is_finite() && w1.is_finite()) || w1 < w0 {
        return Err(Error::invalid("frequency window must be a finite, non-empty interval"));
    }
    let h = build_hamiltonian(model)?;
    let es = eigensystem(&h)?;
    let dim = es.dim();
    let sp = &model.species;
    let has_nucleus = !sp.nuclear_spin.is_zero();

    let u = g_matrix(&sp.g) * ac_direction;
    let ops = SpinOps::new(sp.nuclear_spin.twice());
    let w = &ops.s[0] * cr(u.x) + &ops.s[1] * cr(u.y) + &ops.s[2] * cr(u.z);
    let threshold = FORBIDDEN_REL * MU_B_OVER_H * u.norm();

    let projections = if has_nucleus {
        nuclear_projections(model, &es)?
    } else {
        vec![(0, false); dim]
    };

    let wv = &w * &es.vectors;
    let mut lines = Vec::new();
    for lo in 0..dim {
        for hi in (lo + 1)..dim {
            let freq = es.values[hi] - es.values[lo];
            if freq < w0 || freq > w1 {
                continue;
            }
            let amp = es.vectors.column(hi).dotc(&wv.column(lo));
            let element = MU_B_OVER_H * amp.norm();
            if element <= threshold {
                continue;
            }
            let (m_lo, tie_lo) = projections[lo];
            let (m_hi, tie_hi) = projections[hi];
            let delta_mi = (m_hi - m_lo) / 2;
            let ambiguous = tie_lo || tie_hi;
            let kind = if !has_nucleus || ambiguous {
                LineKind::Electronic
            } else {
                match delta_mi.abs() {
                    0 => LineKind::HyperfineHf,
                    1 => LineKind::QuadrupoleQ,
                    _ => LineKind::Electronic,
                }
            };
            lines.push(TransitionLine {
                level_lo: lo,
                level_hi: hi,
                freq: freq.max(0.0),
                element,
                delta_mi,
                kind,
                ambiguous,
            });
        }
    }
    lines.sort_by(|a, b| {
        a.freq
            .total_cmp(&b.freq)
            .then(a.level_lo.cmp(&b.level_lo))
            .then(a.level_hi.cmp(&b.level_hi))
    });
    Ok(lines)
}

/// Energy levels [Hz] at each field magnitude along `direction`, evaluated in
/// parallel.
pub fn level_sweep(
    species: &SpinSpecies,
    direction: &Vector3<f64>,
    fields: &[f64],
) -> Result<Vec<Vec<f64>>> {
    check_unit(direction, "field direction")?;
    fields
        .par_iter()
        .map(|&b| {
            let model = HamiltonianModel::new(species.clone(), direction * b)?;
            Ok(eigensystem(&build_hamiltonian(&model)?)?.values)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSelector {
    /// The bare electron Zeeman line, hyperfine terms ignored.
    Electronic,
    /// Transition between two levels of the full Hamiltonian, indexed in
    /// ascending energy order.
    Levels { lo: usize, hi: usize },
}

fn selected_frequency(
    species: &SpinSpecies,
    direction: &Vector3<f64>,
    b: f64,
    selector: LineSelector,
) -> Result<f64> {
    match selector {
        LineSelector::Electronic => {
            let ge = (g_matrix(&species.g) * direction).norm();
            Ok(MU_B_OVER_H * ge * b)
        }
        LineSelector::Levels { lo, hi } => {
            let model = HamiltonianModel::new(species.clone(), direction * b)?;
            let es = eigensystem(&build_hamiltonian(&model)?)?;
            if lo >= es.dim() || hi >= es.dim() {
                return Err(Error::invalid(format!(
                    "level indices ({lo}, {hi}) out of range for dimension {}",
                    es.dim()
                )));
            }
            Ok(es.values[hi] - es.values[lo])
        }
    }
}

/// DC field magnitude at which the selected line reaches `f_target`, by
/// bisection on [`FIELD_BRACKET`] to within [`FREQ_TOL_HZ`].
pub fn resonance_field(
    species: &SpinSpecies,
    orientation: &CrystalOrientation,
    f_target: f64,
    selector: LineSelector,
) -> Result<f64> {
    if !(f_target.is_finite() && f_target > 0.0) {
        return Err(Error::invalid("target frequency must be > 0"));
    }
    let n = orientation.direction();
    let f = |b: f64| selected_frequency(species, &n, b, selector).map(|x| x - f_target);
    let (mut lo, mut hi) = FIELD_BRACKET;
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.abs() < FREQ_TOL_HZ {
        return Ok(lo);
    }
    if f_hi.abs() < FREQ_TOL_HZ {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSolution(format!(
            "species {}: line does not reach {} Hz between {} T and {} T",
            species.label, f_target, FIELD_BRACKET.0, FIELD_BRACKET.1
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid.abs() < FREQ_TOL_HZ {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone)]
pub struct SpeciesOrientation {
    pub species: SpinSpecies,
    pub orientation: CrystalOrientation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePosition {
    pub label: String,
    pub field: Result<f64>,
}

/// Electronic resonance field of every species at `f_res`. Failures are
/// reported per line.
pub fn esr_line_positions(set: &[SpeciesOrientation], f_res: f64) -> Vec<LinePosition> {
    set.par_iter()
        .map(|so| LinePosition {
            label: so.species.label.clone(),
            field: resonance_field(&so.species, &so.orientation, f_res, LineSelector::Electronic),
        })
        .collect()
}

/// Axial tensor `diag(perp, perp, par)` rotated into the crystal frame by `frame`.
pub fn axial_tensor(perp: f64, par: f64, frame: &Matrix3<f64>) -> Matrix3<f64> {
    let d = Matrix3::from_diagonal(&Vector3::new(perp, perp, par));
    let m = frame * d * frame.transpose();
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests;
