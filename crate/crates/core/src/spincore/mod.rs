//! Constants, unit conventions, rotations and the data records shared by the
//! other modules.

pub mod constants;
pub mod rotation;
mod types;

pub use constants::ConstantSet;
pub use rotation::{direction_from_angles, rotation_from_euler};
pub use types::{
    g_matrix, AxisKind, CrystalOrientation, FieldMap2D, GTensor, NuclearSpin, Resonator,
    Spectrum1D, SpinSpecies,
};
