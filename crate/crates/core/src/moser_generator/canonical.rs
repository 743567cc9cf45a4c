use crate::disc_calculus::{DiscPoint, Hamiltonian, HamiltonianFn, HamiltonianMeta};
use crate::isotopy_flow::{flow_endpoint, flow_with_jacobian, FlowSettings};
use crate::linalg::{gauss_legendre_unit, Mat2};
use crate::{Exec, ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

/// A family s ↦ ψ_s of compactly supported disc diffeomorphisms, ψ_0 = id.
pub trait DiscIsotopy: Send + Sync {
    fn map(&self, s: f64, p: DiscPoint) -> Result<(DiscPoint, Mat2)>;
    fn inverse(&self, s: f64, p: DiscPoint) -> Result<DiscPoint>;
    /// Radius beyond which every ψ_s is the identity.
    fn support_radius(&self) -> f64;
    /// (ψ_{t0}(p), ψ_{t1}(p)) with Jacobians, t0 ≤ t1.
    fn map_pair(&self, t0: f64, t1: f64, p: DiscPoint) -> Result<[(DiscPoint, Mat2); 2]> {
        Ok([self.map(t0, p)?, self.map(t1, p)?])
    }
}

/// ψ_s = time-s flow of a compactly supported Hamiltonian.
pub struct HamiltonianIsotopy {
    pub generator: Hamiltonian,
    pub settings: FlowSettings,
    pub support_radius: f64,
}

impl DiscIsotopy for HamiltonianIsotopy {
    fn map(&self, s: f64, p: DiscPoint) -> Result<(DiscPoint, Mat2)> {
        flow_with_jacobian(&self.generator, p, 0.0, s, &self.settings)
    }

    fn inverse(&self, s: f64, p: DiscPoint) -> Result<DiscPoint> {
        flow_endpoint(&self.generator, p, s, 0.0, &self.settings)
    }

    fn support_radius(&self) -> f64 {
        self.support_radius
    }

    fn map_pair(&self, t0: f64, t1: f64, p: DiscPoint) -> Result<[(DiscPoint, Mat2); 2]> {
        let (a, ja) = flow_with_jacobian(&self.generator, p, 0.0, t0, &self.settings)?;
        let (b, jb) = flow_with_jacobian(&self.generator, a, t0, t1, &self.settings)?;
        Ok([(a, ja), (b, jb * ja)])
    }
}

/// The constant family ψ_s = id.
pub struct IdentityIsotopy;

impl DiscIsotopy for IdentityIsotopy {
    fn map(&self, _s: f64, p: DiscPoint) -> Result<(DiscPoint, Mat2)> {
        Ok((p, Mat2::IDENTITY))
    }

    fn inverse(&self, _s: f64, p: DiscPoint) -> Result<DiscPoint> {
        Ok(p)
    }

    fn support_radius(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CanonicalSettings {
    /// Step of the centered s-differences.
    pub ds: f64,
    /// Initial Gauss–Legendre panels and nodes per panel for the line
    /// integrals; panels are bisected until two halves agree with the whole
    /// to `quad_tol` per unit length.
    pub panels: usize,
    pub nodes_per_panel: usize,
    pub quad_tol: f64,
    /// Largest tolerated gap between radial and axis-parallel values of G_s.
    pub closedness_tol: f64,
}

impl Default for CanonicalSettings {
    fn default() -> Self {
        CanonicalSettings { ds: 1e-3, panels: 4, nodes_per_panel: 8, quad_tol: 1e-9, closedness_tol: 1e-5 }
    }
}

fn lambda(z: DiscPoint, v: [f64; 2]) -> f64 {
    z.x * v[1] - z.y * v[0]
}

/// H_s = −λ(X_s) + (∂_s G_s)∘ψ_s⁻¹ with ψ_s*λ − λ = dG_s and G_s = 0 on ∂D².
pub struct CanonicalHamiltonian {
    path: Arc<dyn DiscIsotopy>,
    settings: CanonicalSettings,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CanonicalHamiltonian {
    pub fn new(path: Arc<dyn DiscIsotopy>, settings: CanonicalSettings) -> Result<Self> {
        if !(settings.ds > 0.0) || settings.panels == 0 || settings.nodes_per_panel == 0 || !(settings.quad_tol > 0.0) {
            return Err(ReebError::config("canonical settings need ds > 0 and at least one quadrature node"));
        }
        let (x, w) = gauss_legendre_unit(settings.nodes_per_panel);
        Ok(CanonicalHamiltonian { path, settings, nodes: x, weights: w })
    }

    /// ∫_γ form along γ(τ) = a + τ(b − a), adaptive Gauss–Legendre;
    /// `form(z, v)` evaluates the integrand at z on the velocity v.
    fn segment(&self, a: DiscPoint, b: DiscPoint, form: &dyn Fn(DiscPoint, [f64; 2]) -> Result<f64>) -> Result<f64> {
        let v = [b.x - a.x, b.y - a.y];
        let panel = |t0: f64, t1: f64| -> Result<f64> {
            let mut total = 0.0;
            for (t, w) in self.nodes.iter().zip(&self.weights) {
                let tau = t0 + t * (t1 - t0);
                total += w * form(DiscPoint::new(a.x + tau * v[0], a.y + tau * v[1]), v)?;
            }
            Ok(total * (t1 - t0))
        };
        let m = self.settings.panels;
        let mut total = 0.0;
        for k in 0..m {
            let (t0, t1) = (k as f64 / m as f64, (k + 1) as f64 / m as f64);
            let whole = panel(t0, t1)?;
            total += self.refine(&panel, t0, t1, whole, 0)?;
        }
        Ok(total)
    }

    fn pullback_defect(&self, s: f64) -> impl Fn(DiscPoint, [f64; 2]) -> Result<f64> + '_ {
        move |z, v| {
            let (q, j) = self.path.map(s, z)?;
            Ok(lambda(q, j.apply(v)) - lambda(z, v))
        }
    }

    /// Start of the radial path to q on the support circle; ψ_s*λ − λ
    /// vanishes beyond it, so this is the same as starting on ∂D².
    fn radial_start(&self, q: DiscPoint) -> DiscPoint {
        let r = q.r();
        let rs = self.path.support_radius();
        if r > 0.0 {
            DiscPoint::new(rs * q.x / r, rs * q.y / r)
        } else {
            DiscPoint::new(rs, 0.0)
        }
    }

    fn refine(&self, panel: &dyn Fn(f64, f64) -> Result<f64>, t0: f64, t1: f64, whole: f64, depth: usize) -> Result<f64> {
        let mid = 0.5 * (t0 + t1);
        let (l, r) = (panel(t0, mid)?, panel(mid, t1)?);
        if (l + r - whole).abs() <= self.settings.quad_tol * (t1 - t0) || depth >= 16 {
            return Ok(l + r);
        }
        Ok(self.refine(panel, t0, mid, l, depth + 1)? + self.refine(panel, mid, t1, r, depth + 1)?)
    }

    /// G_s(q) integrated radially inward from the boundary.
    pub fn primitive(&self, s: f64, q: DiscPoint) -> Result<f64> {
        if q.r() >= self.path.support_radius() {
            return Ok(0.0);
        }
        self.segment(self.radial_start(q), q, &self.pullback_defect(s))
    }

    /// G_s(q) integrated along the horizontal chord from the left edge of
    /// the support disc.
    pub fn primitive_axis_path(&self, s: f64, q: DiscPoint) -> Result<f64> {
        let rs = self.path.support_radius();
        let start = DiscPoint::new(-(rs * rs - q.y * q.y).max(0.0).sqrt(), q.y);
        self.segment(start, q, &self.pullback_defect(s))
    }

    /// G_{s+d}(q) − G_{s−d}(q) along the radial path, from one flow per node.
    fn primitive_increment(&self, s: f64, d: f64, q: DiscPoint) -> Result<f64> {
        if q.r() >= self.path.support_radius() {
            return Ok(0.0);
        }
        let form = |z: DiscPoint, v: [f64; 2]| -> Result<f64> {
            let [(a, ja), (b, jb)] = self.path.map_pair(s - d, s + d, z)?;
            Ok(lambda(b, jb.apply(v)) - lambda(a, ja.apply(v)))
        };
        self.segment(self.radial_start(q), q, &form)
    }

    /// |radial − axis-parallel| for G_s at q.
    pub fn closedness_defect(&self, s: f64, q: DiscPoint) -> Result<f64> {
        Ok((self.primitive(s, q)? - self.primitive_axis_path(s, q)?).abs())
    }

    /// X_s(p) by centered differences of the path.
    pub fn generator_field(&self, s: f64, p: DiscPoint) -> Result<[f64; 2]> {
        self.field_at_preimage(s, self.path.inverse(s, p)?)
    }

    fn field_at_preimage(&self, s: f64, q: DiscPoint) -> Result<[f64; 2]> {
        let d = self.settings.ds;
        let [(b, _), (a, _)] = self.path.map_pair(s - d, s + d, q)?;
        Ok([(a.x - b.x) / (2.0 * d), (a.y - b.y) / (2.0 * d)])
    }

    pub fn try_eval(&self, s: f64, p: DiscPoint) -> Result<f64> {
        if p.r() >= self.path.support_radius() {
            return Ok(0.0);
        }
        let d = self.settings.ds;
        let q = self.path.inverse(s, p)?;
        let x = self.field_at_preimage(s, q)?;
        let dg = self.primitive_increment(s, d, q)? / (2.0 * d);
        Ok(-lambda(p, x) + dg)
    }
}

impl HamiltonianFn for CanonicalHamiltonian {
    fn value(&self, s: f64, x: f64, y: f64) -> f64 {
        self.try_eval(s, DiscPoint::new(x, y)).unwrap_or(f64::NAN)
    }
}

/// Recovers the generating Hamiltonian of a compactly supported isotopy.
///
/// The returned H has boundary value 0 and vanishes wherever |p| is at least
/// the path's support radius. Construction probes the exactness of
/// ψ_s*λ − λ at a few points and fails if it is violated.
pub fn canonical_hamiltonian(path: Arc<dyn DiscIsotopy>, settings: CanonicalSettings) -> Result<Hamiltonian> {
    let rs = path.support_radius();
    if !(0.0..1.0).contains(&rs) {
        return Err(ReebError::pre(format!("support radius {rs} must lie in [0, 1)")));
    }
    let ch = CanonicalHamiltonian::new(path, settings)?;
    for &s in &[0.9, 2.3, 4.1] {
        for &(r, t) in &[(0.25, 0.7), (0.55, 2.9), (0.4, 4.6)] {
            let q = DiscPoint::from_polar(r * rs, t);
            let defect = ch.closedness_defect(s, q)?;
            if defect > settings.closedness_tol {
                return Err(ReebError::Construction(format!(
                    "ψ_s*λ − λ is not exact (defect {defect:e} at s={s}, p=({:.4}, {:.4})); ψ_s is not area-preserving",
                    q.x, q.y
                )));
            }
        }
    }
    let meta = HamiltonianMeta {
        autonomous: false,
        autonomous_near_boundary: true,
        radial_near_boundary: true,
        collar_width: 1.0 - rs,
    };
    Hamiltonian::new_numerical(Arc::new(ch), 0, meta, "canonical", 1e-6)
}

/// Sup over a polar sample grid and s-samples of |H − K|.
pub fn sup_difference(h: &Hamiltonian, k: &Hamiltonian, n_s: usize, n_r: usize, n_theta: usize, exec: Exec) -> Result<f64> {
    let total = n_s * n_r * n_theta;
    let diffs = crate::exec::try_par_map(exec, total, |i| {
        let s = TAU * (i / (n_r * n_theta)) as f64 / n_s as f64;
        let r = ((i / n_theta) % n_r) as f64 / n_r as f64;
        let t = TAU * (i % n_theta) as f64 / n_theta as f64;
        let p = DiscPoint::from_polar(r, t);
        Ok::<_, ReebError>((h.try_value(s, p)? - k.try_value(s, p)?).abs())
    })?;
    Ok(diffs.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc_calculus::{BumpGenerator, BumpProfile};

    fn flow() -> FlowSettings {
        FlowSettings { exec: Exec::Sequential, ..FlowSettings::with_steps(500) }
    }

    #[test]
    fn identity_path_gives_zero() {
        let h = canonical_hamiltonian(Arc::new(IdentityIsotopy), CanonicalSettings::default()).unwrap();
        assert_eq!(h.value(1.0, DiscPoint::new(0.3, 0.1)), 0.0);
    }

    #[test]
    fn autonomous_round_trip() {
        let g = BumpGenerator::autonomous(0.3, BumpProfile::Annular { r_in: 0.2, r_out: 0.8 }, 1, 0.4);
        let k = Hamiltonian::bump_generator(g).unwrap();
        let path = HamiltonianIsotopy { generator: k.clone(), settings: flow(), support_radius: 0.8 };
        let h = canonical_hamiltonian(Arc::new(path), CanonicalSettings::default()).unwrap();
        let err = sup_difference(&h, &k, 2, 5, 6, Exec::Sequential).unwrap();
        assert!(err < 1e-5, "{err:e}");
        assert_eq!(h.value(0.7, DiscPoint::from_polar(0.85, 1.0)), 0.0);
    }

    #[test]
    fn generator_field_matches_symplectic_gradient() {
        let g = BumpGenerator::autonomous(0.3, BumpProfile::Centered { r_out: 0.7 }, 0, 0.0);
        let k = Hamiltonian::bump_generator(g).unwrap();
        let path = HamiltonianIsotopy { generator: k.clone(), settings: flow(), support_radius: 0.7 };
        let ch = CanonicalHamiltonian::new(Arc::new(path), CanonicalSettings::default()).unwrap();
        let p = DiscPoint::new(0.2, -0.3);
        let x = ch.generator_field(1.3, p).unwrap();
        let want = crate::disc_calculus::hamiltonian_vector_field(&k, 1.3, p).unwrap();
        assert!((x[0] - want[0]).abs() < 1e-6 && (x[1] - want[1]).abs() < 1e-6);
    }
}
