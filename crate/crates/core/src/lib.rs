//! Numerics for realizing Hamiltonian diffeomorphisms of the disc as Poincaré
//! return maps of Reeb flows on the 3-sphere.
//!
//! The crate is organized bottom-up:
//!
//! * [`disc_calculus`]: Hamiltonians on the unit disc, their vector fields and
//!   contact-condition audits.
//! * [`isotopy_flow`]: time-dependent flows, return maps, linearizations and
//!   periodic-point scans.
//! * [`moser_generator`]: the compactly supported Poincaré lemma on the square,
//!   the Moser flow and the canonical Hamiltonian of a disc isotopy.
//! * [`cut_binding`]: the binding chart, the extension function and its
//!   smoothness verdicts, quotient maps to S³.
//! * [`invariants`]: Conley–Zehnder indices, rotation numbers, self-linking.
//! * [`pseudorotation_lab`]: rational approximation stages and diagnostics.
//!
//! With the default `parallel` feature, batch operations run on rayon when an
//! [`Exec::Parallel`] mode is requested. Results are always assembled in a
//! fixed order, so both modes produce bit-identical output.

pub mod cut_binding;
pub mod disc_calculus;
mod error;
mod exec;
pub mod invariants;
pub mod isotopy_flow;
pub mod linalg;
pub mod moser_generator;
pub mod pseudorotation_lab;

pub use error::{ReebError, Result};
pub use exec::{par_map, Exec};

pub use disc_calculus::{DiscMap, DiscPoint, Hamiltonian, HamiltonianFn, SolidTorusPoint};
pub use linalg::Mat2;
