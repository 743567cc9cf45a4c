use super::chart::BindingChart;
use super::extension::{extension_test_fn, ExtensionReport, ExtensionSettings, NoiseModel};
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const H_THETA: f64 = 1e-3;
const H_R: f64 = 1e-3;
const BOUNDARY_TOL: f64 = 1e-6;
const N_THETA: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveChangeReport {
    /// max_θ |∂²F/∂θ²| at r = 1
    pub boundary_theta_theta: f64,
    /// max_θ |∂²F/∂r∂θ| at r = 1
    pub boundary_r_theta: f64,
    pub boundary_pass: bool,
    /// C² test of ρ²·G(1 − ρ², b − hϑ); absent when the boundary check fails.
    pub extension: Option<ExtensionReport>,
    pub pass: bool,
}

fn d_theta<F: Fn(f64, f64) -> f64>(f: &F, r: f64, t: f64) -> f64 {
    let h = H_THETA;
    (8.0 * (f(r, t + h) - f(r, t - h)) - (f(r, t + 2.0 * h) - f(r, t - 2.0 * h))) / (12.0 * h)
}

/// G = ∂_θF/(r − 1)² for r < 1.
pub fn primitive_g<F: Fn(f64, f64) -> f64>(f: &F, r: f64, theta: f64) -> f64 {
    d_theta(f, r, theta) / ((r - 1.0) * (r - 1.0))
}

/// Checks that a change of primitive by dF keeps the binding extension: F must
/// have ∂²F/∂θ² = ∂²F/∂r∂θ = 0 on r = 1, and then ρ²G(1 − ρ², b − hϑ) must pass
/// the extension test through order 2. `f` is F in polar coordinates (r, θ).
pub fn primitive_change_audit<F>(f: F, h: u32, settings: &ExtensionSettings) -> Result<PrimitiveChangeReport>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let chart = BindingChart::with_default_collar(h)?;
    let mut tt = 0.0_f64;
    let mut rt = 0.0_f64;
    for k in 0..N_THETA {
        let t = 2.0 * PI * k as f64 / N_THETA as f64;
        let h2 = H_THETA * H_THETA;
        let ftt = (-f(1.0, t + 2.0 * H_THETA) + 16.0 * f(1.0, t + H_THETA) - 30.0 * f(1.0, t) + 16.0 * f(1.0, t - H_THETA)
            - f(1.0, t - 2.0 * H_THETA))
            / (12.0 * h2);
        let g: Vec<f64> = (0..5).map(|m| d_theta(&f, 1.0 - m as f64 * H_R, t)).collect();
        let frt = (25.0 * g[0] - 48.0 * g[1] + 36.0 * g[2] - 16.0 * g[3] + 3.0 * g[4]) / (12.0 * H_R);
        tt = tt.max(ftt.abs());
        rt = rt.max(frt.abs());
    }
    if !tt.is_finite() || !rt.is_finite() {
        return Err(ReebError::Evaluation { s: 0.0, x: 1.0, y: 0.0, what: "F is not finite on the boundary".into() });
    }
    let boundary_pass = tt <= BOUNDARY_TOL && rt <= BOUNDARY_TOL;
    if !boundary_pass {
        return Ok(PrimitiveChangeReport { boundary_theta_theta: tt, boundary_r_theta: rt, boundary_pass, extension: None, pass: false });
    }
    let mut fmax = 0.0_f64;
    for j in 0..=32 {
        let r = 1.0 - chart.epsilon * j as f64 / 32.0;
        for k in 0..N_THETA {
            fmax = fmax.max(f(r, 2.0 * PI * k as f64 / N_THETA as f64).abs());
        }
    }
    let hf = h as f64;
    let lift = |b: f64, rho: f64, vt: f64| Ok(rho * rho * primitive_g(&f, 1.0 - rho * rho, b - hf * vt));
    let noise = NoiseModel { scale: 2.0 * fmax / H_THETA, power: 2 };
    let st = ExtensionSettings { k_max: 2, expected_a: None, ..*settings };
    let ext = extension_test_fn(h, lift, noise, &chart, &st)?;
    let pass = ext.smooth_order.is_some_and(|k| k >= 2);
    Ok(PrimitiveChangeReport { boundary_theta_theta: tt, boundary_r_theta: rt, boundary_pass, extension: Some(ext), pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exec;

    fn st() -> ExtensionSettings {
        ExtensionSettings { exec: Exec::Sequential, ..Default::default() }
    }

    #[test]
    fn zero_primitive_change_passes() {
        let rep = primitive_change_audit(|_, _| 0.0, 2, &st()).unwrap();
        assert!(rep.pass && rep.boundary_theta_theta == 0.0 && rep.boundary_r_theta == 0.0);
    }

    #[test]
    fn cubic_vanishing_passes_and_g_matches() {
        let f = |r: f64, t: f64| (r - 1.0).powi(3) * t.sin();
        for h in 1..=3 {
            let rep = primitive_change_audit(f, h, &st()).unwrap();
            assert!(rep.pass, "h={h} {:?}", rep.extension.map(|e| e.orders));
        }
        for j in 1..40 {
            let r = 1.0 - 0.25 * j as f64 / 40.0;
            for k in 0..16 {
                let t = 0.4 * k as f64;
                assert!((primitive_g(&f, r, t) - (r - 1.0) * t.cos()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn linear_vanishing_fails_with_defect() {
        let rep = primitive_change_audit(|r, t| (r - 1.0) * t.sin(), 2, &st()).unwrap();
        assert!(!rep.pass && rep.extension.is_none());
        assert!((rep.boundary_r_theta - 1.0).abs() < 1e-6, "{}", rep.boundary_r_theta);
        assert!(rep.boundary_theta_theta < 1e-6);
    }
}
