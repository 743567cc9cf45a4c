use crate::cut_binding::{extended_f, extension_test, BindingChart, ExtensionSettings};
use crate::disc_calculus::{hamiltonian_vector_field, DiscPoint, Hamiltonian};
use crate::isotopy_flow::{flow_with_jacobian, variational_path, FlowSettings};
use crate::linalg::{wrap_angle, Mat2};
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "orbit", rename_all = "lowercase", deny_unknown_fields)]
pub enum Orbit {
    /// The binding B = ∂D²/S¹.
    Binding,
    /// The central orbit C = S¹ × {0}.
    Central,
    /// A periodic point of ψ with the given period.
    Point { x: f64, y: f64, period: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameSpec {
    /// (e₁, e₂) = (H ∂_x + y ∂_s, H ∂_y − x ∂_s) on the interior.
    Interior,
    /// (e₁', e₂') from the binding chart.
    Binding,
    /// The framing of C by the disc Δ.
    Surface,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotationSettings {
    pub covers: usize,
    pub flow: FlowSettings,
    /// Steps per circuit of B for the transverse linearization.
    pub binding_steps: usize,
    pub extension: ExtensionSettings,
    /// Tolerance on |X(0)| for the central orbit.
    pub center_tol: f64,
}

impl Default for RotationSettings {
    fn default() -> Self {
        RotationSettings {
            covers: 8,
            flow: FlowSettings::default(),
            binding_steps: 2048,
            extension: ExtensionSettings { k_max: 2, ..Default::default() },
            center_tol: 1e-8,
        }
    }
}

/// Winding number of a nonvanishing planar vector field along t ∈ [0, 2π].
pub fn winding(samples: usize, v: impl Fn(f64) -> [f64; 2]) -> f64 {
    let mut total = 0.0;
    let mut prev = {
        let a = v(0.0);
        a[1].atan2(a[0])
    };
    for k in 1..=samples {
        let a = v(TAU * k as f64 / samples as f64);
        let ang = a[1].atan2(a[0]);
        total += wrap_angle(ang - prev);
        prev = ang;
    }
    total / TAU
}

const FRAME_SAMPLES: usize = 4096;

/// Twists of Δ relative to (e₁, e₂) along C: Δ points along e^{−ihs}.
pub fn surface_twist_along_c(h: u32) -> f64 {
    let hf = h as f64;
    winding(FRAME_SAMPLES, |s| [(-hf * s).cos(), (-hf * s).sin()])
}

/// Twists of (e₁', e₂') relative to Δ along C: the D²-projection of e₁' is
/// −cos s ∂_r + sin s ∂_θ up to positive factors.
pub fn binding_twist_along_c() -> f64 {
    winding(FRAME_SAMPLES, |s| [-s.cos(), s.sin()])
}

/// Twists of (e₁', e₂') relative to (e₁, e₂) along the meridian representing B:
/// there e₁' is a positive multiple of −∂_r.
pub fn binding_twist_along_b() -> f64 {
    winding(FRAME_SAMPLES, |t| [-t.cos(), -t.sin()])
}

/// Rotation of the linearized flow along a closed orbit through p of period
/// k·2π, relative to (∂_x, ∂_y), averaged over `covers` circuits.
fn interior_rotation(ham: &Hamiltonian, p: DiscPoint, period: usize, settings: &RotationSettings) -> Result<f64> {
    let (q, m) = {
        let mut q = p;
        let mut j = Mat2::IDENTITY;
        for _ in 0..period {
            let (q1, j1) = flow_with_jacobian(ham, q, 0.0, TAU, &settings.flow)?;
            q = q1;
            j = j1 * j;
        }
        (q, j)
    };
    let gap = q.dist(p);
    if gap > 1e-6 {
        return Err(ReebError::pre(format!("point does not return after {period} period(s) (gap {gap:e})")));
    }
    let tr = m.trace();
    let det = m.det();
    let disc = tr * tr - 4.0 * det;
    if disc > 0.0 && tr.abs() > 2.0 * det.sqrt() {
        let sq = disc.sqrt();
        return Err(ReebError::NonElliptic { trace: tr, eig1: 0.5 * (tr + sq), eig2: 0.5 * (tr - sq) });
    }
    let v0 = [1.0, 0.0];
    let mut jacc = Mat2::IDENTITY;
    let mut total = 0.0;
    let mut prev = 0.0;
    let mut q = p;
    for _ in 0..settings.covers * period {
        let path = variational_path(ham, q, 0.0, TAU, &settings.flow)?;
        for jl in &path.jacobians {
            let v = (*jl * jacc).apply(v0);
            let ang = v[1].atan2(v[0]);
            total += wrap_angle(ang - prev);
            prev = ang;
        }
        jacc = *path.jacobians.last().expect("non-empty path") * jacc;
        // Renormalize to keep the transported vector well scaled.
        let n = jacc.apply(v0);
        let s = n[0].hypot(n[1]);
        if s > 1e6 || s < 1e-6 {
            jacc = jacc.scale(1.0 / s);
        }
        q = path.points.last().copied().unwrap_or(q);
    }
    Ok(total / (TAU * (settings.covers * period) as f64))
}

/// Rotation of the transverse linearized Reeb flow along B relative to
/// (e₁', e₂'). With F(b) = f(b, 0), the linearization in (u, v) is
/// (1/2F)·[[−F_b, −4], [4, −F_b]].
fn binding_rotation(ham: &Hamiltonian, settings: &RotationSettings) -> Result<f64> {
    let chart = BindingChart::with_default_collar(ham.h())?;
    let rep = extension_test(ham, &chart, &settings.extension)?;
    if rep.smooth_order.map_or(true, |k| k < 1) {
        return Err(ReebError::pre(format!(
            "binding rotation needs f to extend C¹ across the binding (smooth order {:?})",
            rep.smooth_order
        )));
    }
    let f = extended_f(ham, &chart);
    let f0 = |b: f64| f(b, 0.0, 0.0);
    let d = 1e-4;
    let rhs = |b: f64, y: [f64; 2]| -> Result<[f64; 2]> {
        let fv = f0(b)?;
        if !(fv > 0.0) {
            return Err(ReebError::pre(format!("f(b, 0) = {fv} is not positive at b = {b}")));
        }
        let fb = (f0(b + d)? - f0(b - d)?) / (2.0 * d);
        let k = 0.5 / fv;
        Ok([k * (-fb * y[0] - 4.0 * y[1]), k * (4.0 * y[0] - fb * y[1])])
    };
    let n = settings.binding_steps * settings.covers;
    let hstep = TAU / settings.binding_steps as f64;
    let mut y = [1.0, 0.0];
    let mut total = 0.0;
    let mut prev = 0.0;
    for k in 0..n {
        let b = k as f64 * hstep;
        let k1 = rhs(b, y)?;
        let k2 = rhs(b + 0.5 * hstep, [y[0] + 0.5 * hstep * k1[0], y[1] + 0.5 * hstep * k1[1]])?;
        let k3 = rhs(b + 0.5 * hstep, [y[0] + 0.5 * hstep * k2[0], y[1] + 0.5 * hstep * k2[1]])?;
        let k4 = rhs(b + hstep, [y[0] + hstep * k3[0], y[1] + hstep * k3[1]])?;
        for c in 0..2 {
            y[c] += hstep / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        let s = y[0].hypot(y[1]);
        y = [y[0] / s, y[1] / s];
        let ang = y[1].atan2(y[0]);
        total += wrap_angle(ang - prev);
        prev = ang;
    }
    Ok(total / (TAU * settings.covers as f64))
}

/// Transverse rotation number of an orbit (turns per circuit) in a frame.
///
/// Frames are converted by counted twists: rotation relative to frame A equals
/// rotation relative to B minus the twists of A relative to B.
pub fn rotation_number(ham: &Hamiltonian, orbit: Orbit, frame: FrameSpec, settings: &RotationSettings) -> Result<f64> {
    if settings.covers == 0 || settings.binding_steps < 16 {
        return Err(ReebError::config("covers ≥ 1 and binding_steps ≥ 16 required"));
    }
    match orbit {
        Orbit::Central => {
            let x = hamiltonian_vector_field(ham, 0.0, DiscPoint::ORIGIN)?;
            let mut worst = x[0].hypot(x[1]);
            for k in 1..8 {
                let x = hamiltonian_vector_field(ham, TAU * k as f64 / 8.0, DiscPoint::ORIGIN)?;
                worst = worst.max(x[0].hypot(x[1]));
            }
            if worst > settings.center_tol {
                return Err(ReebError::pre(format!("X_s(0) = {worst:e} ≠ 0: C is not a Reeb orbit")));
            }
            let interior = interior_rotation(ham, DiscPoint::ORIGIN, 1, settings)?;
            let surface = interior - surface_twist_along_c(ham.h());
            Ok(match frame {
                FrameSpec::Interior => interior,
                FrameSpec::Surface => surface,
                FrameSpec::Binding => surface - binding_twist_along_c(),
            })
        }
        Orbit::Binding => {
            let binding = binding_rotation(ham, settings)?;
            match frame {
                FrameSpec::Binding => Ok(binding),
                FrameSpec::Interior => Ok(binding + binding_twist_along_b()),
                FrameSpec::Surface => Err(ReebError::config("the surface frame Δ is defined along C only")),
            }
        }
        Orbit::Point { x, y, period } => {
            if frame != FrameSpec::Interior {
                return Err(ReebError::config("periodic points support the interior frame only"));
            }
            if period == 0 {
                return Err(ReebError::config("period must be at least 1"));
            }
            interior_rotation(ham, DiscPoint::new(x, y), period, settings)
        }
    }
}

/// Analytic rotation numbers for Quadratic(a₀, a₂).
pub fn quadratic_rotation(a0: f64, h: u32, orbit: Orbit, frame: FrameSpec) -> Option<f64> {
    let a2 = h as f64 - a0;
    match (orbit, frame) {
        (Orbit::Central, FrameSpec::Interior) => Some(-a2),
        (Orbit::Central, FrameSpec::Surface) => Some(a0),
        (Orbit::Central, FrameSpec::Binding) => Some(a0 + 1.0),
        (Orbit::Binding, FrameSpec::Binding) => Some(1.0 / a0),
        (Orbit::Binding, FrameSpec::Interior) => Some(1.0 + 1.0 / a0),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> RotationSettings {
        RotationSettings {
            covers: 2,
            flow: FlowSettings { exec: crate::Exec::Sequential, ..FlowSettings::with_steps(400) },
            extension: ExtensionSettings { k_max: 2, exec: crate::Exec::Sequential, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn frame_twists() {
        assert!((surface_twist_along_c(3) + 3.0).abs() < 1e-12);
        assert!((binding_twist_along_c() + 1.0).abs() < 1e-12);
        assert!((binding_twist_along_b() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_central_orbit() {
        let a0 = 2f64.sqrt();
        let ham = Hamiltonian::quadratic(a0, 2.0 - a0).unwrap();
        for frame in [FrameSpec::Interior, FrameSpec::Surface, FrameSpec::Binding] {
            let got = rotation_number(&ham, Orbit::Central, frame, &fast()).unwrap();
            let want = quadratic_rotation(a0, 2, Orbit::Central, frame).unwrap();
            assert!((got - want).abs() < 1e-6, "{frame:?} {got} {want}");
        }
    }

    #[test]
    fn quadratic_binding_orbit() {
        let a0 = 2f64.sqrt();
        let ham = Hamiltonian::quadratic(a0, 2.0 - a0).unwrap();
        for frame in [FrameSpec::Binding, FrameSpec::Interior] {
            let got = rotation_number(&ham, Orbit::Binding, frame, &fast()).unwrap();
            let want = quadratic_rotation(a0, 2, Orbit::Binding, frame).unwrap();
            assert!((got - want).abs() < 1e-6, "{frame:?} {got} {want}");
        }
        assert!(rotation_number(&ham, Orbit::Binding, FrameSpec::Surface, &fast()).is_err());
    }

    #[test]
    fn rigid_rotation_interior() {
        let ham = Hamiltonian::rigid_rotation(2, 1, 3).unwrap();
        let got = rotation_number(&ham, Orbit::Central, FrameSpec::Interior, &fast()).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-6, "{got}");
    }

    #[test]
    fn angular_binding_is_rejected() {
        let ham = Hamiltonian::angular_collar(2, 1.0, 0.2).unwrap();
        assert!(matches!(
            rotation_number(&ham, Orbit::Binding, FrameSpec::Binding, &fast()),
            Err(ReebError::Precondition(_))
        ));
    }
}
