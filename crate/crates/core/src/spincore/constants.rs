//! Physical constants in SI units.
//!
//! Values are the CODATA 2018 recommended values (exact where the 2019 SI
//! redefinition made them exact: `h`, `k_B`).

use std::f64::consts::PI;

/// Bohr magneton [J/T].
pub const MU_B: f64 = 9.274_010_078_3e-24;
/// Nuclear magneton [J/T].
pub const MU_N: f64 = 5.050_783_746_1e-27;
/// Planck constant [J s].
pub const H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant [J s].
pub const HBAR: f64 = H / (2.0 * PI);
/// Boltzmann constant [J/K].
pub const K_B: f64 = 1.380_649e-23;

/// Bohr magneton over Planck constant, the free-electron Zeeman rate per unit
/// g-factor [Hz/T].
pub const MU_B_OVER_H: f64 = MU_B / H;

/// The constant set as a value record, for code that wants to pass constants
/// around or serialize them next to results.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConstantSet {
    pub mu_b: f64,
    pub h: f64,
    pub hbar: f64,
    pub k_b: f64,
}

impl ConstantSet {
    pub const CODATA: ConstantSet = ConstantSet {
        mu_b: MU_B,
        h: H,
        hbar: HBAR,
        k_b: K_B,
    };
}

impl Default for ConstantSet {
    fn default() -> Self {
        Self::CODATA
    }
}

/// FWHM in Hz to the equivalent angular rate [rad/s].
pub fn hz_to_angular(f: f64) -> f64 {
    2.0 * PI * f
}

/// Angular rate [rad/s] back to Hz.
pub fn angular_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}
