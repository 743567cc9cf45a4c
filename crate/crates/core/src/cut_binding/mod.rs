//! The binding chart near ∂D² × S¹, the extension function f and its
//! smoothness verdicts, and quotient maps to S³.

mod chart;
mod contact;
mod extension;
pub(crate) mod fourier;
mod primitive;
mod quotient;

pub use chart::{adapted_collar_g, binding_function_f, phi_embed, phi_embed_polar, phi_inverse, BindingChart};
pub use contact::{extended_contact_audit, extended_f, ContactExtensionReport};
pub use extension::{
    extension_test, extension_test_fn, ExtensionReport, ExtensionSettings, NoiseModel, OrderVerdict, RungDiagnostics,
};
pub use primitive::{primitive_change_audit, PrimitiveChangeReport};
pub use quotient::{pullback_residual, quotient_map, QuotientMapSpec};
