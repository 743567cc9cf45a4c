//! Compactly supported Poincaré lemma on I², the Moser isotopy between area
//! forms, and recovery of the generating Hamiltonian of a disc isotopy.

mod canonical;
mod grid;
mod moser;
mod poincare;

pub use canonical::{
    canonical_hamiltonian, sup_difference, CanonicalHamiltonian, CanonicalSettings, DiscIsotopy, HamiltonianIsotopy,
    IdentityIsotopy,
};
pub use grid::{GridFunction2D, OneForm2D, QuadratureRule, SupportBox, UnitBump};
pub use moser::{bump_density_fixture, moser_flow, moser_refine, Density, MoserAuditNode, MoserFlow, MoserResult, MoserSettings};
pub use poincare::{
    exterior_derivative, poincare_primitive, primitive_residual, residual_order, EtaFixture, PolyBump, ZERO_INTEGRAL_TOL,
};
