use super::chart::{binding_function_f, BindingChart};
use crate::disc_calculus::Hamiltonian;
use crate::exec::{try_par_map, Exec};
use crate::linalg::derivative_weights;
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactExtensionReport {
    pub n_b: usize,
    /// min over b of the db∧du∧dv coefficient of α̂∧dα̂ at ρ = 0; equals 2f there
    pub min_volume: f64,
    pub min_f: f64,
    /// max |α̂(∂_b) − 1| on the binding
    pub reeb_value_defect: f64,
    /// max |i_{∂_b} dα̂| on the binding
    pub reeb_contraction_defect: f64,
    pub pass: bool,
    pub certificate: Option<String>,
}

const REEB_TOL: f64 = 1e-8;

/// Audits α̂ = (1 − ρ²)² db + f·(u dv − v du) along the binding ρ = 0.
///
/// `f(b, ρ, ϑ)` must be defined at ρ = 0 (the extended function); it is only
/// meaningful when the extension test has passed at least C¹.
pub fn extended_contact_audit<F>(f: F, chart: &BindingChart, n_b: usize, exec: Exec) -> Result<ContactExtensionReport>
where
    F: Fn(f64, f64, f64) -> Result<f64> + Sync,
{
    chart.validate()?;
    if n_b == 0 {
        return Err(ReebError::config("n_b must be positive"));
    }
    let d = 1e-4;
    let fuv = |b: f64, u: f64, v: f64| -> Result<f64> {
        let r = u.hypot(v);
        f(b, r, if r == 0.0 { 0.0 } else { v.atan2(u) })
    };
    let ab = |u: f64, v: f64| (1.0 - u * u - v * v).powi(2);
    let au = |b: f64, u: f64, v: f64| -> Result<f64> { Ok(-v * fuv(b, u, v)?) };
    let av = |b: f64, u: f64, v: f64| -> Result<f64> { Ok(u * fuv(b, u, v)?) };
    let rows = try_par_map(exec, n_b, |i| -> Result<(f64, f64, f64, f64, f64)> {
        let b = 2.0 * PI * i as f64 / n_b as f64;
        let f0 = fuv(b, 0.0, 0.0)?;
        let c = |g: &dyn Fn(f64) -> Result<f64>| -> Result<f64> { Ok((g(d)? - g(-d)?) / (2.0 * d)) };
        let (a_b, a_u, a_v) = (ab(0.0, 0.0), au(b, 0.0, 0.0)?, av(b, 0.0, 0.0)?);
        let du_av = c(&|t| av(b, t, 0.0))?;
        let dv_au = c(&|t| au(b, 0.0, t))?;
        let db_au = c(&|t| au(b + t, 0.0, 0.0))?;
        let db_av = c(&|t| av(b + t, 0.0, 0.0))?;
        let du_ab = c(&|t| Ok(ab(t, 0.0)))?;
        let dv_ab = c(&|t| Ok(ab(0.0, t)))?;
        let vol = a_b * (du_av - dv_au) + a_u * (dv_ab - db_av) + a_v * (db_au - du_ab);
        let value_defect = (a_b - 1.0).abs();
        let contraction = (db_au - du_ab).abs().max((db_av - dv_ab).abs());
        let mut fmin = f0;
        for j in 0..16 {
            let t = 2.0 * PI * j as f64 / 16.0;
            fmin = fmin.min(f(b, d, t)?);
        }
        Ok((vol, fmin, value_defect, contraction, b))
    })?;
    let mut rep = ContactExtensionReport {
        n_b,
        min_volume: f64::INFINITY,
        min_f: f64::INFINITY,
        reeb_value_defect: 0.0,
        reeb_contraction_defect: 0.0,
        pass: true,
        certificate: None,
    };
    let mut worst_b = 0.0;
    for (vol, fmin, vd, cd, b) in rows {
        if vol < rep.min_volume {
            rep.min_volume = vol;
            worst_b = b;
        }
        rep.min_f = rep.min_f.min(fmin);
        rep.reeb_value_defect = rep.reeb_value_defect.max(vd);
        rep.reeb_contraction_defect = rep.reeb_contraction_defect.max(cd);
    }
    let mut notes = Vec::new();
    if !(rep.min_volume > 0.0) || !(rep.min_f > 0.0) {
        notes.push(format!(
            "α̂∧dα̂ = {:.6e}·db∧du∧dv at (b, ρ) = ({worst_b:.6}, 0); min f near the binding = {:.6e}",
            rep.min_volume, rep.min_f
        ));
    }
    if rep.reeb_value_defect > REEB_TOL || rep.reeb_contraction_defect > REEB_TOL {
        notes.push(format!(
            "∂_b is not Reeb on the binding: |α̂(∂_b) − 1| = {:.3e}, |i_∂b dα̂| = {:.3e}",
            rep.reeb_value_defect, rep.reeb_contraction_defect
        ));
    }
    if !notes.is_empty() {
        rep.pass = false;
        rep.certificate = Some(notes.join("; "));
    }
    Ok(rep)
}

/// f from H, extended to ρ = 0 by cubic extrapolation along each ray.
pub fn extended_f<'a>(ham: &'a Hamiltonian, chart: &'a BindingChart) -> impl Fn(f64, f64, f64) -> Result<f64> + Sync + 'a {
    let nodes: Vec<f64> = (0..4).map(|m| 0.02 * 0.5f64.powi(m)).collect();
    let w = derivative_weights(&nodes, 0.0, 0).map(|mut w| w.remove(0)).unwrap_or_default();
    move |b, rho, t| {
        if rho > 0.0 {
            return binding_function_f(ham, chart, b, rho, t);
        }
        let mut acc = 0.0;
        for (wi, r) in w.iter().zip(&nodes) {
            acc += wi * binding_function_f(ham, chart, b, *r, t)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipsoid_profile_passes() {
        let a0 = 2f64.sqrt();
        let chart = BindingChart::with_default_collar(2).unwrap();
        let rep = extended_contact_audit(|_, r, _| Ok(a0 * (2.0 - r * r)), &chart, 8, Exec::Sequential).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!((rep.min_volume - 2.0 * 2.0 * a0).abs() < 1e-6, "{}", rep.min_volume);
        assert!(rep.reeb_value_defect <= 1e-9 && rep.reeb_contraction_defect <= 1e-9);
    }

    #[test]
    fn zero_profile_fails_with_certificate() {
        let chart = BindingChart::with_default_collar(1).unwrap();
        let rep = extended_contact_audit(|_, _, _| Ok(0.0), &chart, 4, Exec::Sequential).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.min_volume, 0.0);
        assert!(rep.certificate.unwrap().contains("α̂∧dα̂ = 0"));
    }

    #[test]
    fn extended_from_hamiltonian() {
        let ham = Hamiltonian::rigid_rotation(2, 1, 3).unwrap();
        let chart = BindingChart::with_default_collar(2).unwrap();
        let f = extended_f(&ham, &chart);
        assert!((f(0.4, 0.0, 1.0).unwrap() - 2.0 * (2.0 + 1.0 / 3.0)).abs() < 1e-9);
        let rep = extended_contact_audit(f, &chart, 6, Exec::Sequential).unwrap();
        assert!(rep.pass);
        assert!((rep.min_volume - 4.0 * (2.0 + 1.0 / 3.0)).abs() < 1e-5, "{}", rep.min_volume);
    }
}
