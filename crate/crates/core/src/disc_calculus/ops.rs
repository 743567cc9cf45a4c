use super::hamiltonian::{grad_in_disc, Hamiltonian};
use super::point::DiscPoint;
use crate::exec::{par_map, Exec};
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

fn check_point(s: f64, p: DiscPoint) -> Result<()> {
    if !p.is_finite() || !p.in_disc() {
        return Err(ReebError::Evaluation { s, x: p.x, y: p.y, what: "point outside the closed disc".into() });
    }
    Ok(())
}

/// X_s with ω(X,·) = dH for ω = 2 dx∧dy, i.e. X = (∂_yH/2, −∂_xH/2).
pub fn hamiltonian_vector_field(ham: &Hamiltonian, s: f64, p: DiscPoint) -> Result<[f64; 2]> {
    check_point(s, p)?;
    let g = ham.try_gradient(s, p)?;
    Ok([0.5 * g[1], -0.5 * g[0]])
}

/// λ(X_s) for λ = r² dθ, computed as −(x ∂_xH + y ∂_yH)/2.
pub fn liouville_pairing(ham: &Hamiltonian, s: f64, p: DiscPoint) -> Result<f64> {
    check_point(s, p)?;
    let g = ham.try_gradient(s, p)?;
    Ok(-0.5 * (p.x * g[0] + p.y * g[1]))
}

/// H + λ(X); positive exactly where α = H ds + λ is a positive contact form.
pub fn contact_margin(ham: &Hamiltonian, s: f64, p: DiscPoint) -> Result<f64> {
    let v = ham.try_value(s, p)?;
    Ok(v + liouville_pairing(ham, s, p)?)
}

/// Largest componentwise gap between ω(X,·) and dH, with dH taken from
/// Richardson-extrapolated differences of the value oracle alone.
pub fn definition_defect(ham: &Hamiltonian, s: f64, p: DiscPoint) -> Result<f64> {
    let x = hamiltonian_vector_field(ham, s, p)?;
    let f = |q: DiscPoint| ham.value(s, q);
    let (g1, g2) = (grad_in_disc(&f, p, 1e-4), grad_in_disc(&f, p, 5e-5));
    let dh = [(4.0 * g2[0] - g1[0]) / 3.0, (4.0 * g2[1] - g1[1]) / 3.0];
    // ω(X,·) = 2(X_x dy − X_y dx)
    Ok((-2.0 * x[1] - dh[0]).abs().max((2.0 * x[0] - dh[1]).abs()))
}

/// Sampling of [0,2π) × D², uniform in (s, r², θ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditGrid {
    pub n_s: usize,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for AuditGrid {
    fn default() -> Self {
        AuditGrid { n_s: 32, n_r: 64, n_theta: 64 }
    }
}

impl AuditGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n_s < 8 || self.n_r < 8 || self.n_theta < 8 {
            return Err(ReebError::config(format!(
                "audit grid {}×{}×{} is too coarse (need ≥ 8 samples per axis)",
                self.n_s, self.n_r, self.n_theta
            )));
        }
        Ok(())
    }

    pub fn s(&self, i: usize) -> f64 {
        TAU * i as f64 / self.n_s as f64
    }

    /// Radius of the j-th sample; r² is uniform on [0,1] with both ends included.
    pub fn r(&self, j: usize) -> f64 {
        (j as f64 / (self.n_r - 1) as f64).sqrt()
    }

    pub fn theta(&self, k: usize) -> f64 {
        TAU * k as f64 / self.n_theta as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactAuditReport {
    pub min_margin: f64,
    /// Where the minimum margin was attained, as (s, x, y).
    pub argmin: (f64, f64, f64),
    pub boundary_slope_max: f64,
    pub h: u32,
    pub grid: AuditGrid,
    /// Number of s-slices actually evaluated (1 for autonomous Hamiltonians).
    pub s_slices_evaluated: usize,
    pub pass: bool,
}

/// Minimum contact margin over the grid and maximum boundary slope ∂_rH|_{r=1}.
pub fn contact_audit(ham: &Hamiltonian, grid: AuditGrid, exec: Exec) -> Result<ContactAuditReport> {
    grid.validate()?;
    let n_s = if ham.meta().autonomous { 1 } else { grid.n_s };
    let rows = n_s * grid.n_r;
    let per_row = par_map(exec, rows, |idx| -> Result<(f64, (f64, f64, f64), f64)> {
        let i = idx / grid.n_r;
        let j = idx % grid.n_r;
        let s = grid.s(i);
        let r = grid.r(j);
        let mut best = (f64::INFINITY, (0.0, 0.0, 0.0));
        let mut slope = f64::NEG_INFINITY;
        for k in 0..grid.n_theta {
            let p = DiscPoint::from_polar(r, grid.theta(k));
            let m = contact_margin(ham, s, p)?;
            if m < best.0 {
                best = (m, (s, p.x, p.y));
            }
            if j == grid.n_r - 1 {
                let g = ham.try_gradient(s, p)?;
                slope = slope.max((p.x * g[0] + p.y * g[1]) / r);
            }
        }
        Ok((best.0, best.1, slope))
    });
    let mut min_margin = f64::INFINITY;
    let mut argmin = (0.0, 0.0, 0.0);
    let mut slope_max = f64::NEG_INFINITY;
    for row in per_row {
        let (m, at, sl) = row?;
        if m < min_margin {
            min_margin = m;
            argmin = at;
        }
        slope_max = slope_max.max(sl);
    }
    let pass = min_margin > 0.0 && slope_max < 2.0 * ham.h() as f64;
    Ok(ContactAuditReport {
        min_margin,
        argmin,
        boundary_slope_max: slope_max,
        h: ham.h(),
        grid,
        s_slices_evaluated: n_s,
        pass,
    })
}
