use super::{iterate_with_jacobian, return_map, FlowSettings};
use crate::disc_calculus::{DiscPoint, Hamiltonian};
use crate::exec::try_par_map;
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSettings {
    pub max_period: usize,
    pub tol: f64,
    pub newton_max_iter: usize,
    pub newton_tol: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings { max_period: 8, tol: 1e-6, newton_max_iter: 10, newton_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPointRecord {
    pub period: usize,
    pub seed: DiscPoint,
    pub point: DiscPoint,
    /// |ψ^k(p) − p| at the reported point.
    pub residual: f64,
    pub newton_iterations: usize,
    /// False when Newton was skipped or stalled (e.g. ψ^k − id is singular).
    pub refined: bool,
}

/// Grid points returning within `tol` after k ≤ max_period iterations,
/// refined by Newton on ψ^k − id where that system is nonsingular.
pub fn periodic_point_scan(
    ham: &Hamiltonian,
    seeds: &[DiscPoint],
    scan: &ScanSettings,
    settings: &FlowSettings,
) -> Result<Vec<PeriodicPointRecord>> {
    if scan.max_period == 0 || scan.max_period > 64 {
        return Err(ReebError::config("max_period must lie in 1..=64"));
    }
    let found = try_par_map(settings.exec, seeds.len(), |i| -> Result<Option<PeriodicPointRecord>> {
        let p = seeds[i];
        let mut q = p;
        for k in 1..=scan.max_period {
            q = return_map(ham, q, settings)?;
            let res = q.dist(p);
            if res < scan.tol {
                return refine(ham, p, k, res, scan, settings).map(Some);
            }
        }
        Ok(None)
    })?;
    Ok(found.into_iter().flatten().collect())
}

fn refine(
    ham: &Hamiltonian,
    seed: DiscPoint,
    k: usize,
    res0: f64,
    scan: &ScanSettings,
    settings: &FlowSettings,
) -> Result<PeriodicPointRecord> {
    let mut p = seed;
    let mut res = res0;
    let mut iters = 0;
    let mut refined = res <= scan.newton_tol;
    while !refined && iters < scan.newton_max_iter {
        let (q, j) = iterate_with_jacobian(ham, p, k, settings)?;
        let a = j - crate::linalg::Mat2::IDENTITY;
        // A nearly resonant linearization gives no usable Newton direction.
        if a.det().abs() < 1e-8 * a.max_abs().max(1.0).powi(2) {
            break;
        }
        let Some(inv) = a.inverse() else { break };
        let step = inv.apply([q.x - p.x, q.y - p.y]);
        let cand = DiscPoint::new(p.x - step[0], p.y - step[1]);
        if !cand.in_disc() {
            break;
        }
        iters += 1;
        let (qc, _) = iterate_with_jacobian(ham, cand, k, settings)?;
        let rc = qc.dist(cand);
        if rc >= res {
            break;
        }
        p = cand;
        res = rc;
        refined = res <= scan.newton_tol;
    }
    Ok(PeriodicPointRecord { period: k, seed, point: p, residual: res, newton_iterations: iters, refined })
}
