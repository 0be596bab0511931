//! Experiment configuration: a JSON document with SI units spelled out in the
//! field names.

use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::Deserialize;

use spinres::coupling::{collective_coupling, single_spin_coupling};
use spinres::dynamics::polarization;
use spinres::hamiltonian::{g_ac_effective, g_effective, SpeciesOrientation};
use spinres::spincore::constants::MU_B_OVER_H;
use spinres::spincore::{CrystalOrientation, GTensor, NuclearSpin, Resonator, SpinSpecies};
use spinres::synth::SpinSweep;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub temperature_k: Option<f64>,
    #[serde(default)]
    pub species: Vec<SpeciesConfig>,
    #[serde(default)]
    pub crystals: Vec<CrystalConfig>,
    #[serde(default)]
    pub resonators: Vec<ResonatorConfig>,
    #[serde(default)]
    pub ensembles: Vec<EnsembleConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    pub label: String,
    pub g_principal: [f64; 3],
    /// ZYZ Euler angles of the principal frame [rad].
    #[serde(default)]
    pub g_euler_rad: [f64; 3],
    #[serde(default)]
    pub nuclear_spin: f64,
    #[serde(default)]
    pub hyperfine_hz: Option<[[f64; 3]; 3]>,
    #[serde(default)]
    pub quadrupole_hz: Option<[[f64; 3]; 3]>,
    #[serde(default = "one")]
    pub abundance: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    pub label: String,
    /// Field direction in the crystal frame.
    pub theta_deg: f64,
    pub phi_deg: f64,
    /// Species labels present in this crystal.
    pub species: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorConfig {
    pub label: String,
    pub freq_hz: f64,
    pub kappa_c_hz: f64,
    pub kappa_i_hz: f64,
}

/// One spin ensemble coupled to one resonator. The coupling is either given
/// directly (`coupling_hz`) or computed from density, mode volume and AC
/// field.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub species: String,
    pub crystal: String,
    pub resonator: String,
    pub gamma2_hz: f64,
    #[serde(default)]
    pub coupling_hz: Option<f64>,
    #[serde(default)]
    pub density_per_m3: Option<f64>,
    #[serde(default)]
    pub mode_volume_m3: Option<f64>,
    #[serde(default)]
    pub b1_t: Option<f64>,
    /// AC field direction in the crystal frame.
    #[serde(default)]
    pub b1_direction: Option<[f64; 3]>,
}

#[derive(Debug, Clone)]
pub struct Crystal {
    pub label: String,
    pub orientation: CrystalOrientation,
    /// Indices into [`Experiment::species`].
    pub species: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub species: usize,
    pub crystal: usize,
    pub resonator: usize,
    pub gamma2: f64,
    pub coupling: f64,
}

/// A validated configuration with every label resolved.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub temperature: Option<f64>,
    pub species: Vec<SpinSpecies>,
    pub crystals: Vec<Crystal>,
    pub resonators: Vec<Resonator>,
    pub ensembles: Vec<Ensemble>,
}

fn config_error(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::usage(format!("{}: {msg}", path.display()))
}

pub fn load(path: &Path) -> CliResult<Experiment> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|msg| config_error(path, msg))
}

/// Parses and validates a configuration document. Errors name the offending
/// field and, for syntax and type errors, the line and column.
pub fn parse(text: &str) -> Result<Experiment, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        if at == "." {
            e.inner().to_string()
        } else {
            format!("{at}: {}", e.inner())
        }
    })?;
    resolve(&cfg)
}

fn find(labels: &[&str], want: &str, what: &str, at: &str) -> Result<usize, String> {
    labels
        .iter()
        .position(|l| *l == want)
        .ok_or_else(|| format!("{at}: unknown {what} label '{want}'"))
}

fn unique(labels: &[&str], what: &str) -> Result<(), String> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(format!("{what}[{i}].label: duplicate label '{l}'"));
        }
    }
    Ok(())
}

fn matrix(m: &Option<[[f64; 3]; 3]>) -> Matrix3<f64> {
    m.map(|r| Matrix3::from_fn(|i, j| r[i][j])).unwrap_or_else(Matrix3::zeros)
}

pub fn resolve(cfg: &ExperimentConfig) -> Result<Experiment, String> {
    if let Some(t) = cfg.temperature_k {
        if !(t > 0.0 && t.is_finite()) {
            return Err(format!("temperature_k: must be > 0, got {t}"));
        }
    }
    let species_labels: Vec<&str> = cfg.species.iter().map(|s| s.label.as_str()).collect();
    let crystal_labels: Vec<&str> = cfg.crystals.iter().map(|c| c.label.as_str()).collect();
    let resonator_labels: Vec<&str> = cfg.resonators.iter().map(|r| r.label.as_str()).collect();
    unique(&species_labels, "species")?;
    unique(&crystal_labels, "crystals")?;
    unique(&resonator_labels, "resonators")?;

    let mut species = Vec::with_capacity(cfg.species.len());
    for (i, s) in cfg.species.iter().enumerate() {
        let at = format!("species[{i}]");
        let g = GTensor::new(s.g_principal, s.g_euler_rad).map_err(|e| format!("{at}.g_principal: {e}"))?;
        let spin = NuclearSpin::from_f64(s.nuclear_spin).map_err(|e| format!("{at}.nuclear_spin: {e}"))?;
        let sp = SpinSpecies::new(
            s.label.clone(),
            g,
            spin,
            matrix(&s.hyperfine_hz),
            matrix(&s.quadrupole_hz),
            s.abundance,
        )
        .map_err(|e| format!("{at}: {e}"))?;
        species.push(sp);
    }

    let mut crystals = Vec::with_capacity(cfg.crystals.len());
    for (i, c) in cfg.crystals.iter().enumerate() {
        let orientation = CrystalOrientation::from_degrees(c.theta_deg, c.phi_deg)
            .map_err(|e| format!("crystals[{i}]: {e}"))?;
        let members = c
            .species
            .iter()
            .enumerate()
            .map(|(k, l)| find(&species_labels, l, "species", &format!("crystals[{i}].species[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        crystals.push(Crystal { label: c.label.clone(), orientation, species: members });
    }

    let mut resonators = Vec::with_capacity(cfg.resonators.len());
    for (i, r) in cfg.resonators.iter().enumerate() {
        let res = Resonator::new(r.label.clone(), r.freq_hz, r.kappa_c_hz, r.kappa_i_hz)
            .map_err(|e| format!("resonators[{i}]: {e}"))?;
        resonators.push(res);
    }

    let mut ensembles = Vec::with_capacity(cfg.ensembles.len());
    for (i, e) in cfg.ensembles.iter().enumerate() {
        let at = format!("ensembles[{i}]");
        let si = find(&species_labels, &e.species, "species", &format!("{at}.species"))?;
        let ci = find(&crystal_labels, &e.crystal, "crystal", &format!("{at}.crystal"))?;
        let ri = find(&resonator_labels, &e.resonator, "resonator", &format!("{at}.resonator"))?;
        if !crystals[ci].species.contains(&si) {
            return Err(format!(
                "{at}: species '{}' is not listed in crystal '{}'",
                e.species, e.crystal
            ));
        }
        if !(e.gamma2_hz > 0.0 && e.gamma2_hz.is_finite()) {
            return Err(format!("{at}.gamma2_hz: must be > 0, got {}", e.gamma2_hz));
        }
        let coupling = ensemble_coupling(e, &species[si], &crystals[ci], &resonators[ri], cfg.temperature_k)
            .map_err(|m| format!("{at}{m}"))?;
        ensembles.push(Ensemble { species: si, crystal: ci, resonator: ri, gamma2: e.gamma2_hz, coupling });
    }

    Ok(Experiment { temperature: cfg.temperature_k, species, crystals, resonators, ensembles })
}

fn ensemble_coupling(
    e: &EnsembleConfig,
    sp: &SpinSpecies,
    crystal: &Crystal,
    res: &Resonator,
    temperature: Option<f64>,
) -> Result<f64, String> {
    let physical = [
        e.density_per_m3.is_some(),
        e.mode_volume_m3.is_some(),
        e.b1_t.is_some(),
        e.b1_direction.is_some(),
    ];
    match (e.coupling_hz, physical.iter().any(|&x| x)) {
        (Some(_), true) => Err(": give either coupling_hz or the density/mode volume/AC field set, not both".into()),
        (Some(v), false) => {
            if v >= 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(format!(".coupling_hz: must be >= 0, got {v}"))
            }
        }
        (None, _) => {
            let missing = ["density_per_m3", "mode_volume_m3", "b1_t", "b1_direction"]
                .iter()
                .zip(physical)
                .find(|(_, present)| !present);
            if let Some((name, _)) = missing {
                return Err(format!(".{name}: required when coupling_hz is absent"));
            }
            let t = temperature.ok_or_else(|| ": temperature_k is required to compute the polarization".to_string())?;
            let d = e.b1_direction.unwrap_or_default();
            let d = Vector3::new(d[0], d[1], d[2]);
            let norm = d.norm();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(".b1_direction: must be a nonzero vector".into());
            }
            let g1 = g_ac_effective(&sp.g, &crystal.orientation.direction(), &(d / norm))
                .map_err(|err| format!(": {err}"))?;
            let v1 = single_spin_coupling(g1, e.b1_t.unwrap_or_default()).map_err(|err| format!(".b1_t: {err}"))?;
            let n = e.density_per_m3.unwrap_or_default() * e.mode_volume_m3.unwrap_or_default();
            let p = polarization(res.f_c, t).map_err(|err| format!(": {err}"))?;
            collective_coupling(v1, n, p).map_err(|err| format!(": {err}"))
        }
    }
}

impl Experiment {
    /// Every species of every crystal, labelled `crystal/species`.
    pub fn line_set(&self) -> Vec<SpeciesOrientation> {
        self.crystals
            .iter()
            .flat_map(|c| {
                c.species.iter().map(move |&si| {
                    let mut species = self.species[si].clone();
                    species.label = format!("{}/{}", c.label, species.label);
                    SpeciesOrientation { species, orientation: c.orientation }
                })
            })
            .collect()
    }

    /// Linear tuning lines of all ensembles, each coupled to its own
    /// resonator only.
    pub fn spin_sweeps(&self) -> CliResult<Vec<SpinSweep>> {
        self.ensembles
            .iter()
            .map(|e| {
                let sp = &self.species[e.species];
                let ge = g_effective(&sp.g, &self.crystals[e.crystal].orientation.direction())?;
                let slope = MU_B_OVER_H * ge;
                if !(slope > 0.0) {
                    return Err(CliError::usage(format!(
                        "species '{}' does not tune with field in crystal '{}'",
                        sp.label, self.crystals[e.crystal].label
                    )));
                }
                let f_c = self.resonators[e.resonator].f_c;
                let mut couplings = vec![0.0; self.resonators.len()];
                couplings[e.resonator] = e.coupling;
                Ok(SpinSweep { b_cross: f_c / slope, f_cross: f_c, slope, gamma2: e.gamma2, couplings })
            })
            .collect()
    }
}
