use crate::disc_calculus::{DiscPoint, Hamiltonian, HamiltonianFn, HamiltonianMeta};
use crate::isotopy_flow::{flow_endpoint, flow_with_jacobian, FlowSettings};
use crate::{ReebError, Result};
use std::f64::consts::TAU;
use std::sync::Arc;

/// K_s + H₂∘(Ψ^K_s)⁻¹, whose flow is Ψ^K_s∘ψ^{H₂}_s. Defined for s ∈ [0, 2π]
/// and extended periodically from there.
struct Composite {
    k: Hamiltonian,
    h2: Hamiltonian,
    flow: FlowSettings,
}

impl Composite {
    fn reduce(s: f64) -> f64 {
        if (0.0..=TAU).contains(&s) {
            s
        } else {
            s.rem_euclid(TAU)
        }
    }

    fn pull_back(&self, s: f64, x: f64, y: f64) -> Option<(DiscPoint, crate::linalg::Mat2)> {
        flow_with_jacobian(&self.k, DiscPoint::new(x, y), s, 0.0, &self.flow).ok()
    }
}

impl HamiltonianFn for Composite {
    fn value(&self, s: f64, x: f64, y: f64) -> f64 {
        let s = Self::reduce(s);
        let p = DiscPoint::new(x, y);
        let q = flow_endpoint(&self.k, p, s, 0.0, &self.flow).unwrap_or(DiscPoint::new(f64::NAN, f64::NAN));
        self.k.value(s, p) + self.h2.value(s, q)
    }

    fn gradient(&self, s: f64, x: f64, y: f64) -> Option<[f64; 2]> {
        let s = Self::reduce(s);
        let (q, j) = self.pull_back(s, x, y)?;
        let gk = self.k.gradient(s, DiscPoint::new(x, y));
        let g2 = j.transpose().apply(self.h2.gradient(s, q));
        Some([gk[0] + g2[0], gk[1] + g2[1]])
    }
}

/// The composite Hamiltonian of a compactly supported K and an arbitrary H₂.
/// Each evaluation integrates Ψ^K backwards from s to 0 with `flow`.
pub fn composed_hamiltonian(k: &Hamiltonian, h2: &Hamiltonian, flow: FlowSettings) -> Result<Hamiltonian> {
    if k.h() != 0 {
        return Err(ReebError::pre("K must be compactly supported (boundary value 0)"));
    }
    flow.validate()?;
    let meta = HamiltonianMeta {
        autonomous: false,
        collar_width: k.meta().collar_width.min(h2.meta().collar_width),
        ..h2.meta()
    };
    let label = format!("compose({}, {})", k.label(), h2.label());
    Hamiltonian::new_numerical(Arc::new(Composite { k: k.clone(), h2: h2.clone(), flow }), h2.h(), meta, label, 1e-8)
}

/// |flow of the composite − Ψ^K_{2π}∘ψ^{H₂}_{2π}| at p.
pub fn composition_defect(k: &Hamiltonian, h2: &Hamiltonian, p: DiscPoint, flow: &FlowSettings) -> Result<f64> {
    let comp = composed_hamiltonian(k, h2, *flow)?;
    let a = flow_endpoint(&comp, p, 0.0, TAU, flow)?;
    let b = flow_endpoint(k, flow_endpoint(h2, p, 0.0, TAU, flow)?, 0.0, TAU, flow)?;
    Ok(a.dist(b))
}
