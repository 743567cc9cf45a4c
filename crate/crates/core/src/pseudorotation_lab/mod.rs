//! Rational approximation stages φ∘R_{p/q}∘φ⁻¹ and their diagnostics.

mod compose;
mod conjugator;
mod diagnostics;
mod stages;

pub use compose::{composed_hamiltonian, composition_defect};
pub use conjugator::{fixture_conjugators, Conjugator, ConjugatorSettings, ConjugatorSpec};
pub use diagnostics::{boundary_jet_check, orbit_statistics, BirkhoffSample, BoundaryJetReport, JetSettings, OrbitStatistics};
pub use stages::{
    audit_flow, composed_return, conjugated_stage, conjugated_stage_with, conjugation_defect, convergents, difference_norms,
    rigid_rotation_hamiltonian, stage_sequence, ApproximationStage, ConjugatorSchedule, ScanSummary, SequenceSettings,
    StageReport, StageSequenceReport,
};
