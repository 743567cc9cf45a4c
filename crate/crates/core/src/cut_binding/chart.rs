use crate::disc_calculus::{normalize_angle, DiscPoint, Hamiltonian, SolidTorusPoint};
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};

/// Coordinates (b, ρ, ϑ) on a neighbourhood of the binding, with
/// Φ(b, ρ, ϑ) = (s = ϑ, r = 1 − ρ², θ = b − hϑ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingChart {
    pub h: u32,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    0.25
}

impl BindingChart {
    pub fn new(h: u32, epsilon: f64) -> Result<Self> {
        let c = BindingChart { h, epsilon };
        c.validate()?;
        Ok(c)
    }

    pub fn with_default_collar(h: u32) -> Result<Self> {
        Self::new(h, default_epsilon())
    }

    pub fn validate(&self) -> Result<()> {
        if self.h == 0 {
            return Err(ReebError::config("binding chart needs h ≥ 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(ReebError::config(format!("collar width ε = {} must lie in (0, 1)", self.epsilon)));
        }
        Ok(())
    }

    /// Upper bound √ε of the ρ range.
    pub fn rho_max(&self) -> f64 {
        self.epsilon.sqrt()
    }

    fn check_rho(&self, rho: f64) -> Result<()> {
        if !(rho >= 0.0 && rho < self.rho_max()) {
            return Err(ReebError::pre(format!("ρ = {rho} outside [0, {})", self.rho_max())));
        }
        Ok(())
    }
}

/// Image of Φ as raw polar data (s, r, θ) without angle normalization.
pub fn phi_embed_polar(chart: &BindingChart, b: f64, rho: f64, vartheta: f64) -> Result<(f64, f64, f64)> {
    chart.check_rho(rho)?;
    Ok((vartheta, 1.0 - rho * rho, b - chart.h as f64 * vartheta))
}

pub fn phi_embed(chart: &BindingChart, b: f64, rho: f64, vartheta: f64) -> Result<SolidTorusPoint> {
    let (s, r, t) = phi_embed_polar(chart, b, rho, vartheta)?;
    Ok(SolidTorusPoint::from_polar(s, r, t))
}

/// Inverse of Φ on the collar 1 − ε < r ≤ 1; returns (b, ρ, ϑ) with angles in [0, 2π).
pub fn phi_inverse(chart: &BindingChart, p: SolidTorusPoint) -> Result<(f64, f64, f64)> {
    let r = p.p.r();
    if !(r > 1.0 - chart.epsilon && r <= 1.0 + 1e-12) {
        return Err(ReebError::pre(format!("r = {r} is outside the chart collar")));
    }
    let rho = (1.0 - r).max(0.0).sqrt();
    let vartheta = normalize_angle(p.s);
    let b = normalize_angle(p.p.theta() + chart.h as f64 * vartheta);
    Ok((b, rho, vartheta))
}

/// f(b, ρ, ϑ) = (H_s∘Φ − h(1 − ρ²)²)/ρ² for ρ > 0.
pub fn binding_function_f(ham: &Hamiltonian, chart: &BindingChart, b: f64, rho: f64, vartheta: f64) -> Result<f64> {
    if rho == 0.0 {
        return Err(ReebError::pre(
            "f is not evaluated at ρ = 0; its value there is an extension verdict (use extension_test)",
        ));
    }
    let (s, r, t) = phi_embed_polar(chart, b, rho, vartheta)?;
    let hv = ham.try_value(s, DiscPoint::from_polar(r, t))?;
    let q = 1.0 - rho * rho;
    Ok((hv - chart.h as f64 * q * q) / (rho * rho))
}

/// Solves τ = h r² − H_s(r, θ) for r in the collar [1 − collar, 1].
pub fn adapted_collar_g(ham: &Hamiltonian, h: u32, s: f64, theta: f64, tau: f64, collar: f64) -> Result<f64> {
    if !(collar > 0.0 && collar < 1.0) {
        return Err(ReebError::config("collar width must lie in (0, 1)"));
    }
    let hf = h as f64;
    let tau_of = |r: f64| -> Result<f64> { Ok(hf * r * r - ham.try_value(s, DiscPoint::from_polar(r, theta))?) };
    if tau == 0.0 && ham.try_value(s, DiscPoint::from_polar(1.0, theta))? == hf {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1.0 - collar, 1.0);
    let (flo, fhi) = (tau_of(lo)? - tau, tau_of(hi)? - tau);
    if flo > 0.0 || fhi < 0.0 {
        return Err(ReebError::pre(format!(
            "no bracket for τ = {tau} in r ∈ [{lo}, 1]: τ(r) ranges over [{}, {}] (τ out of range or slope condition fails)",
            flo + tau,
            fhi + tau
        )));
    }
    let dtau = |r: f64| {
        let g = ham.gradient(s, DiscPoint::from_polar(r, theta));
        2.0 * hf * r - (g[0] * theta.cos() + g[1] * theta.sin())
    };
    let mut r = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = tau_of(r)? - tau;
        if f.abs() <= 1e-14 {
            return Ok(r);
        }
        if f < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let d = dtau(r);
        let cand = r - f / d;
        r = if d > 0.0 && cand > lo && cand < hi { cand } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-16 {
            break;
        }
    }
    let res = (tau_of(r)? - tau).abs();
    if res > 1e-12 {
        return Err(ReebError::Construction(format!("collar inversion stalled with residual {res:e}")));
    }
    Ok(r)
}
