//! Simulation and fitting toolkit for anisotropic rare-earth spin ensembles
//! coupled to superconducting microwave resonators.
//!
//! The crate is split along the physics:
//!
//! - [`spincore`]: constants, rotations and the shared data records.
//! - [`hamiltonian`]: effective spin Hamiltonian, eigensolver, transitions and
//!   resonance fields.
//! - [`coupling`]: closed-form anisotropic g-factors and coupling strengths.
//! - [`cavity`]: transmission forward models (Fano sum, notch resonator with
//!   spin ensembles, normal modes, dispersive regime).
//! - [`dynamics`]: thermal polarization and T1 recovery.
//! - [`fitlab`]: damped least-squares engine and the analysis pipelines.
//! - [`synth`]: seeded synthetic data.
//!
//! All rates and linewidths are ordinary frequencies in Hz, linewidths are
//! FWHM, and all spectra are linear power `|S21|^2`.

pub mod cavity;
pub mod coupling;
pub mod dynamics;
mod error;
pub mod fitlab;
pub mod hamiltonian;
pub mod spincore;
pub mod synth;

pub use error::{Error, Result};
