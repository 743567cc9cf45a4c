//! Hamiltonian isotopies of the disc and their time-2π return maps.
//!
//! The section {0} × D² is met by the flow of ∂_s + X_s once per unit of
//! parameter time 2π, so the return map is the time-2π map of X_s. True Reeb
//! periods are reported separately by [`reeb_period`].

mod integrate;
mod periodic;

pub use integrate::{
    flow_endpoint, flow_with_jacobian, integrate_isotopy, variational_path, FlowPath, FlowSettings, Integrator,
    VariationalPath,
};
pub use periodic::{periodic_point_scan, PeriodicPointRecord, ScanSettings};

use crate::disc_calculus::{contact_margin, DiscPoint, Hamiltonian};
use crate::exec::try_par_map;
use crate::linalg::{wrap_angle, Mat2};
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// ψ(p): the time-2π map.
pub fn return_map(ham: &Hamiltonian, p: DiscPoint, settings: &FlowSettings) -> Result<DiscPoint> {
    flow_endpoint(ham, p, 0.0, TAU, settings)
}

/// Dψ(p) from the variational equation.
pub fn linearized_return(ham: &Hamiltonian, p: DiscPoint, settings: &FlowSettings) -> Result<Mat2> {
    Ok(flow_with_jacobian(ham, p, 0.0, TAU, settings)?.1)
}

/// k-fold iterate of the return map with its Jacobian.
pub fn iterate_with_jacobian(
    ham: &Hamiltonian,
    p: DiscPoint,
    k: usize,
    settings: &FlowSettings,
) -> Result<(DiscPoint, Mat2)> {
    let mut q = p;
    let mut j = Mat2::IDENTITY;
    for _ in 0..k {
        let (q1, j1) = flow_with_jacobian(ham, q, 0.0, TAU, settings)?;
        q = q1;
        j = j1 * j;
    }
    Ok((q, j))
}

/// Elapsed Reeb time ∫ (H + λ(X)) ds along a closed orbit, by the trapezoid
/// rule on the integrator's own nodes (spectrally accurate for periodic data).
pub fn reeb_period(ham: &Hamiltonian, path: &FlowPath) -> Result<f64> {
    if path.s.len() < 2 {
        return Err(ReebError::pre("orbit path needs at least two samples"));
    }
    let gap = path.start().dist(path.end());
    if gap > 1e-6 {
        return Err(ReebError::pre(format!("orbit does not close up (gap {gap:e})")));
    }
    let mut total = 0.0;
    let mut prev = contact_margin(ham, path.s[0], path.points[0])?;
    for i in 1..path.s.len() {
        let cur = contact_margin(ham, path.s[i], path.points[i])?;
        total += 0.5 * (prev + cur) * (path.s[i] - path.s[i - 1]);
        prev = cur;
    }
    Ok(total)
}

/// max |det Dψ − 1| over the given points.
pub fn area_preservation_audit(ham: &Hamiltonian, points: &[DiscPoint], settings: &FlowSettings) -> Result<f64> {
    let defects = try_par_map(settings.exec, points.len(), |i| {
        linearized_return(ham, points[i], settings).map(|j| (j.det() - 1.0).abs())
    })?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapEntry {
    pub input: DiscPoint,
    pub image: DiscPoint,
    pub jacobian: Mat2,
    pub det_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialRotation {
    pub radius: f64,
    /// Mean of the wrapped angle increment arg ψ(p) − arg p over the circle.
    pub angle: f64,
    /// Largest |r(ψ(p)) − r(p)| over the circle.
    pub radius_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapReport {
    pub entries: Vec<ReturnMapEntry>,
    pub rotation: Vec<RadialRotation>,
    pub max_area_defect: f64,
}

/// Images and Jacobians at `points`, plus rotation estimates on circles of
/// the given radii sampled at `n_theta` angles.
pub fn return_map_report(
    ham: &Hamiltonian,
    points: &[DiscPoint],
    radii: &[f64],
    n_theta: usize,
    settings: &FlowSettings,
) -> Result<ReturnMapReport> {
    let entries = try_par_map(settings.exec, points.len(), |i| {
        let (image, jacobian) = flow_with_jacobian(ham, points[i], 0.0, TAU, settings)?;
        Ok::<_, ReebError>(ReturnMapEntry { input: points[i], image, jacobian, det_defect: (jacobian.det() - 1.0).abs() })
    })?;
    let n_theta = n_theta.max(1);
    let rotation = try_par_map(settings.exec, radii.len(), |i| {
        let r = radii[i];
        let mut sum = 0.0;
        let mut drift = 0.0_f64;
        for k in 0..n_theta {
            let p = DiscPoint::from_polar(r, TAU * k as f64 / n_theta as f64);
            let q = return_map(ham, p, settings)?;
            sum += wrap_angle(q.theta() - p.theta());
            drift = drift.max((q.r() - r).abs());
        }
        Ok::<_, ReebError>(RadialRotation { radius: r, angle: sum / n_theta as f64, radius_drift: drift })
    })?;
    let max_area_defect = entries.iter().map(|e| e.det_defect).fold(0.0, f64::max);
    Ok(ReturnMapReport { entries, rotation, max_area_defect })
}

/// Polar sample set: `n_r` radii evenly spaced in (0, r_max] times `n_theta` angles.
pub fn polar_points(n_r: usize, n_theta: usize, r_max: f64) -> Vec<DiscPoint> {
    let mut out = Vec::with_capacity(n_r * n_theta);
    for i in 1..=n_r {
        let r = r_max * i as f64 / n_r as f64;
        for k in 0..n_theta {
            out.push(DiscPoint::from_polar(r, TAU * (k as f64 + 0.5 * (i % 2) as f64) / n_theta as f64));
        }
    }
    out
}

#[cfg(test)]
mod tests;
