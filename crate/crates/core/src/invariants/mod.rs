//! Conley–Zehnder indices, transverse rotation numbers and self-linking.

mod cz;
mod linking;
mod rotation;

pub use cz::{cz_ellipsoid, cz_from_rotation, resonance_check, resonance_check_with, CZReport, ResonanceReport, DEGENERACY_TOL};
pub use linking::{
    gauss_linking, hopf_fixture, linking_on_s3, polygon_linking, project_pair, self_linking, split_fixture,
    stereographic, LinkingReport, Vec3, Vec4,
};
pub use rotation::{
    binding_twist_along_b, binding_twist_along_c, quadratic_rotation, rotation_number, surface_twist_along_c, winding,
    FrameSpec, Orbit, RotationSettings,
};
