//! Impedance models for linear and planar dipole arrays.

mod array;
mod dipole;
mod network;
mod zfile;

pub use array::{
    assemble_impedance, impedance_from_positions, min_real_part_eigenvalue, ArrayGeometry,
    PartitionedImpedance,
};
pub(crate) use array::{parasitic_offsets, real_part};
pub use dipole::{
    dipole_mutual_impedance, dipole_self_impedance, DipoleSpec, FREE_SPACE_IMPEDANCE, SPEED_OF_LIGHT,
};
pub use network::{impedance_to_scattering, scattering_to_impedance};
pub use zfile::{
    export_impedance, format_zmatrix, import_impedance, parse_zmatrix, ZMatrixFile, SYMMETRY_TOLERANCE,
};
