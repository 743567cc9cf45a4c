use super::grid::{GridFunction2D, OneForm2D, UnitBump};
use super::poincare::{poincare_primitive, EtaFixture};
use crate::exec::{par_map, Exec};
use crate::linalg::Mat2;
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Positive density ρ of an area form ρ dx∧dy on I².
pub type Density = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MoserSettings {
    /// Grid size for the primitive β.
    pub n: usize,
    /// RK4 steps in t ∈ [0, 1].
    pub time_steps: usize,
    /// Audit every k-th grid node.
    pub audit_stride: usize,
    /// Width of the boundary band on which the densities must agree.
    pub margin: f64,
    pub exec: Exec,
}

impl Default for MoserSettings {
    fn default() -> Self {
        MoserSettings { n: 256, time_steps: 64, audit_stride: 5, margin: 0.05, exec: Exec::Parallel }
    }
}

impl MoserSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n < 16 || self.time_steps == 0 || self.audit_stride == 0 {
            return Err(ReebError::config("moser settings need n ≥ 16, time_steps ≥ 1, audit_stride ≥ 1"));
        }
        if !(self.margin > 0.0 && self.margin < 0.25) {
            return Err(ReebError::config("moser margin must lie in (0, 0.25)"));
        }
        Ok(())
    }
}

/// The time-1 map of X_t = (−Q, P)/ρ_t with β = P dx + Q dy, dβ = ρ₁ − ρ₀.
#[derive(Clone)]
pub struct MoserFlow {
    beta: OneForm2D,
    rho0: Density,
    rho1: Density,
    time_steps: usize,
}

impl std::fmt::Debug for MoserFlow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MoserFlow").field("n", &self.beta.dx.n).field("time_steps", &self.time_steps).finish()
    }
}

const OFFSETS: [f64; 6] = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0];

/// Quintic Lagrange weights and their t-derivatives on the nodes OFFSETS.
fn lagrange6(t: f64) -> ([f64; 6], [f64; 6]) {
    let mut w = [0.0; 6];
    let mut d = [0.0; 6];
    for k in 0..6 {
        let mut denom = 1.0;
        let mut prod = 1.0;
        for m in 0..6 {
            if m != k {
                denom *= OFFSETS[k] - OFFSETS[m];
                prod *= t - OFFSETS[m];
            }
        }
        w[k] = prod / denom;
        let mut sum = 0.0;
        for j in 0..6 {
            if j == k {
                continue;
            }
            let mut p = 1.0;
            for m in 0..6 {
                if m != k && m != j {
                    p *= t - OFFSETS[m];
                }
            }
            sum += p;
        }
        d[k] = sum / denom;
    }
    (w, d)
}

fn stencil(x: f64, n: usize) -> (usize, [f64; 6], [f64; 6]) {
    let h = 1.0 / (n - 1) as f64;
    let i = ((x / h).floor() as isize).clamp(2, n as isize - 4) as usize;
    let (w, d) = lagrange6(x / h - i as f64);
    (i - 2, w, d.map(|v| v / h))
}

/// Value and gradient of the tensor quintic interpolant.
fn interp(g: &GridFunction2D, x: f64, y: f64) -> (f64, [f64; 2]) {
    let n = g.n;
    let (ix, wx, dx) = stencil(x, n);
    let (iy, wy, dy) = stencil(y, n);
    let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
    for b in 0..6 {
        let row = &g.values[(iy + b) * n + ix..(iy + b) * n + ix + 6];
        let (mut rv, mut rd) = (0.0, 0.0);
        for a in 0..6 {
            rv += wx[a] * row[a];
            rd += dx[a] * row[a];
        }
        v += wy[b] * rv;
        gx += wy[b] * rd;
        gy += dy[b] * rv;
    }
    (v, [gx, gy])
}

impl MoserFlow {
    pub fn beta(&self) -> &OneForm2D {
        &self.beta
    }

    fn field(&self, t: f64, y: &[f64; 6]) -> [f64; 6] {
        let (px, py) = (y[0], y[1]);
        let (p, dp) = interp(&self.beta.dx, px, py);
        let (q, dq) = interp(&self.beta.dy, px, py);
        if p == 0.0 && q == 0.0 && dp == [0.0, 0.0] && dq == [0.0, 0.0] {
            return [0.0; 6];
        }
        let rho = |x: f64, y: f64| (1.0 - t) * (self.rho0)(x, y) + t * (self.rho1)(x, y);
        let r = rho(px, py);
        let e = 1e-6;
        let rx = (rho(px + e, py) - rho(px - e, py)) / (2.0 * e);
        let ry = (rho(px, py + e) - rho(px, py - e)) / (2.0 * e);
        let (vx, vy) = (-q / r, p / r);
        // ∂(f/ρ) = (∂f − (f/ρ)∂ρ)/ρ
        let a = Mat2::new((-dq[0] - vx * rx) / r, (-dq[1] - vx * ry) / r, (dp[0] - vy * rx) / r, (dp[1] - vy * ry) / r);
        let j = Mat2::new(y[2], y[3], y[4], y[5]);
        let dj = a * j;
        [vx, vy, dj.0[0][0], dj.0[0][1], dj.0[1][0], dj.0[1][1]]
    }

    /// ψ(p) and Dψ(p).
    pub fn map_with_jacobian(&self, x: f64, y: f64) -> (f64, f64, Mat2) {
        let mut s = [x, y, 1.0, 0.0, 0.0, 1.0];
        let h = 1.0 / self.time_steps as f64;
        for k in 0..self.time_steps {
            let t = k as f64 * h;
            let k1 = self.field(t, &s);
            let k2 = self.field(t + 0.5 * h, &add(&s, &k1, 0.5 * h));
            let k3 = self.field(t + 0.5 * h, &add(&s, &k2, 0.5 * h));
            let k4 = self.field(t + h, &add(&s, &k3, h));
            for i in 0..6 {
                s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        (s[0], s[1], Mat2::new(s[2], s[3], s[4], s[5]))
    }

    /// ρ₁(ψ(p)) det Dψ(p): the density of ψ*ω₁.
    pub fn pullback_density(&self, x: f64, y: f64) -> f64 {
        let (qx, qy, j) = self.map_with_jacobian(x, y);
        (self.rho1)(qx, qy) * j.det()
    }
}

fn add(a: &[f64; 6], b: &[f64; 6], k: f64) -> [f64; 6] {
    let mut o = *a;
    for i in 0..6 {
        o[i] += k * b[i];
    }
    o
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoserAuditNode {
    pub x: f64,
    pub y: f64,
    pub image: [f64; 2],
    pub det: f64,
    /// |ρ₁(ψ(p)) det Dψ(p) − ρ₀(p)|
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoserResult {
    pub nodes: Vec<MoserAuditNode>,
    pub max_residual: f64,
    pub max_displacement: f64,
    /// Every audit node in the boundary band is mapped to itself with
    /// Jacobian exactly I.
    pub boundary_identity_exact: bool,
    #[serde(skip)]
    pub flow: Option<MoserFlow>,
}

/// Moser isotopy from ρ₀ dx∧dy to ρ₁ dx∧dy with ψ*ω₁ = ω₀.
pub fn moser_flow(rho0: Density, rho1: Density, chi: &UnitBump, settings: &MoserSettings) -> Result<MoserResult> {
    settings.validate()?;
    let n = settings.n;
    let exec = settings.exec;
    let h = 1.0 / (n - 1) as f64;
    let rows = par_map(exec, n, |iy| {
        let y = iy as f64 * h;
        (0..n).map(|ix| ((rho0)(ix as f64 * h, y), (rho1)(ix as f64 * h, y))).collect::<Vec<_>>()
    });
    let mut sigma = vec![0.0; n * n];
    for (iy, row) in rows.iter().enumerate() {
        for (ix, &(a, b)) in row.iter().enumerate() {
            let (x, y) = (ix as f64 * h, iy as f64 * h);
            if !(a > 0.0 && b > 0.0) {
                return Err(ReebError::pre(format!(
                    "densities must be positive: ρ₀ = {a}, ρ₁ = {b} at ({x:.4}, {y:.4})"
                )));
            }
            let d = b - a;
            if in_band(x, y, settings.margin) && d.abs() > 1e-14 {
                return Err(ReebError::pre(format!("densities differ by {d:e} near the boundary at ({x:.4}, {y:.4})")));
            }
            sigma[iy * n + ix] = d;
        }
    }
    let sigma = GridFunction2D::from_values(n, sigma)?;
    let beta = poincare_primitive(&sigma, chi, exec)?;
    let flow = MoserFlow { beta, rho0: rho0.clone(), rho1, time_steps: settings.time_steps };
    let idx: Vec<usize> = (0..n).step_by(settings.audit_stride).collect();
    let m = idx.len();
    let nodes = par_map(exec, m * m, |k| {
        let (x, y) = (idx[k % m] as f64 * h, idx[k / m] as f64 * h);
        let (qx, qy, j) = flow.map_with_jacobian(x, y);
        let det = j.det();
        let residual = ((flow.rho1)(qx, qy) * det - (rho0)(x, y)).abs();
        (MoserAuditNode { x, y, image: [qx, qy], det, residual }, j)
    });
    let mut boundary_identity_exact = true;
    let (mut max_residual, mut max_displacement) = (0.0_f64, 0.0_f64);
    for (node, j) in &nodes {
        max_residual = max_residual.max(node.residual);
        max_displacement = max_displacement.max((node.image[0] - node.x).hypot(node.image[1] - node.y));
        if in_band(node.x, node.y, settings.margin)
            && (node.image != [node.x, node.y] || *j != Mat2::IDENTITY)
        {
            boundary_identity_exact = false;
        }
    }
    Ok(MoserResult {
        nodes: nodes.into_iter().map(|(n, _)| n).collect(),
        max_residual,
        max_displacement,
        boundary_identity_exact,
        flow: Some(flow),
    })
}

fn in_band(x: f64, y: f64, margin: f64) -> bool {
    x < margin || y < margin || x > 1.0 - margin || y > 1.0 - margin
}

/// Second Moser pass from ρ₀ to the achieved pullback ψ₁*ω₁; returns the
/// residual of the composite ψ₁∘ψ₂ on the audit nodes.
///
/// The achieved density integrates to ∫ρ₀ only up to the first pass error,
/// so its grid total is restored with a multiple of χ(x)χ(y) first.
pub fn moser_refine(first: &MoserResult, rho0: Density, chi: &UnitBump, settings: &MoserSettings) -> Result<f64> {
    let flow = Arc::new(first.flow.clone().ok_or_else(|| ReebError::pre("first pass carries no flow"))?);
    let n = settings.n;
    let g = flow.clone();
    let r0 = rho0.clone();
    let diff = GridFunction2D::from_fn(n, move |x, y| g.pullback_density(x, y) - r0(x, y), settings.exec)?;
    let c = diff.integral();
    let chi2 = *chi;
    let g = flow.clone();
    let achieved: Density = Arc::new(move |x, y| g.pullback_density(x, y) - c * chi2.eval(x) * chi2.eval(y));
    let second = moser_flow(rho0.clone(), achieved, chi, settings)?;
    let second_flow = second.flow.ok_or_else(|| ReebError::Construction("second pass carries no flow".into()))?;
    let h = 1.0 / (n - 1) as f64;
    let idx: Vec<usize> = (0..n).step_by(settings.audit_stride).collect();
    let m = idx.len();
    let res = par_map(settings.exec, m * m, |k| {
        let (x, y) = (idx[k % m] as f64 * h, idx[k / m] as f64 * h);
        let (qx, qy, j2) = second_flow.map_with_jacobian(x, y);
        (flow.pullback_density(qx, qy) * j2.det() - rho0(x, y)).abs()
    });
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// ρ₀ = 1 and ρ₁ = 1 + amplitude·g with g the translated-pair fixture.
pub fn bump_density_fixture(amplitude: f64) -> (Density, Density) {
    (Arc::new(|_, _| 1.0), Arc::new(move |x, y| 1.0 + amplitude * EtaFixture::TranslatedPair.eval(x, y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MoserSettings {
        MoserSettings { n: 128, time_steps: 32, audit_stride: 8, exec: Exec::Sequential, ..Default::default() }
    }

    #[test]
    fn interpolation_reproduces_quintics() {
        let f = |x: f64, y: f64| x.powi(5) - 2.0 * x * y * y + y;
        let g = GridFunction2D::from_fn(17, f, Exec::Sequential).unwrap();
        for &(x, y) in &[(0.01, 0.02), (0.33, 0.71), (0.99, 0.5)] {
            let (v, d) = interp(&g, x, y);
            assert!((v - f(x, y)).abs() < 1e-12);
            assert!((d[0] - (5.0 * x.powi(4) - 2.0 * y * y)).abs() < 1e-10);
            assert!((d[1] - (1.0 - 4.0 * x * y)).abs() < 1e-10);
        }
    }

    #[test]
    fn equal_densities_give_identity() {
        let rho: Density = Arc::new(|x, y| 1.0 + 0.1 * x * y);
        let r = moser_flow(rho.clone(), rho, &UnitBump::default(), &small()).unwrap();
        assert_eq!(r.max_displacement, 0.0);
        assert!(r.nodes.iter().all(|n| n.det == 1.0));
    }

    #[test]
    fn bump_fixture_round_trip() {
        let (r0, r1) = bump_density_fixture(0.2);
        let r = moser_flow(r0, r1, &UnitBump::default(), &small()).unwrap();
        assert!(r.max_residual <= 1e-5, "{:e}", r.max_residual);
        assert!(r.boundary_identity_exact);
        assert!(r.max_displacement > 1e-3);
    }

    #[test]
    fn rejects_bad_densities() {
        let r0: Density = Arc::new(|_, _| 1.0);
        let neg: Density = Arc::new(|x, _| if x > 0.5 { -1.0 } else { 1.0 });
        assert!(matches!(moser_flow(r0.clone(), neg, &UnitBump::default(), &small()), Err(ReebError::Precondition(_))));
        let edge: Density = Arc::new(|x, _| 1.0 + 0.1 * x);
        assert!(matches!(moser_flow(r0, edge, &UnitBump::default(), &small()), Err(ReebError::Precondition(_))));
    }

    #[test]
    fn refinement_reduces_residual() {
        let s = MoserSettings { n: 64, time_steps: 8, audit_stride: 9, exec: Exec::Sequential, ..Default::default() };
        let (r0, r1) = bump_density_fixture(0.2);
        let first = moser_flow(r0.clone(), r1, &UnitBump::default(), &s).unwrap();
        let second = moser_refine(&first, r0, &UnitBump::default(), &s).unwrap();
        assert!(second < first.max_residual, "{second:e} vs {:e}", first.max_residual);
    }
}
