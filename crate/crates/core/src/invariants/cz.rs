use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};

/// Distance to the nearest integer below which a rotation number is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CZReport {
    pub h: u32,
    /// h + a, the a₀ of the matching ellipsoid
    pub a0: f64,
    pub n: i64,
    pub m: i64,
    pub mu_b: i64,
    pub mu_c: i64,
    pub rho_b: f64,
    pub rho_c: f64,
    pub dynamically_convex: bool,
    pub theta0: f64,
    pub theta1: f64,
    pub resonance_defect: f64,
}

fn check_nondegenerate(rho: f64) -> Result<()> {
    if !rho.is_finite() {
        return Err(ReebError::pre(format!("rotation number {rho} is not finite")));
    }
    if (rho - rho.round()).abs() <= DEGENERACY_TOL {
        return Err(ReebError::Degenerate { value: rho, tol: DEGENERACY_TOL });
    }
    Ok(())
}

/// 2⌊ρ⌋ + 1 for a non-degenerate rotation number.
pub fn cz_from_rotation(rho: f64) -> Result<i64> {
    check_nondegenerate(rho)?;
    Ok(2 * rho.floor() as i64 + 1)
}

/// Indices of B and C on the ellipsoid with parameter a₀ (= h + a).
pub fn cz_ellipsoid(a0: f64, h: u32) -> Result<CZReport> {
    if !(a0 > 0.0) || !a0.is_finite() {
        return Err(ReebError::pre(format!("a₀ = {a0} must be positive")));
    }
    let rho_b = 1.0 + 1.0 / a0;
    let rho_c = 1.0 + a0;
    let mu_b = cz_from_rotation(rho_b)?;
    let mu_c = cz_from_rotation(rho_c)?;
    let res = resonance_check_with(1.0 / a0, a0);
    Ok(CZReport {
        h,
        a0,
        n: rho_b.floor() as i64,
        m: rho_c.floor() as i64,
        mu_b,
        mu_c,
        rho_b,
        rho_c,
        dynamically_convex: mu_b >= 3 && mu_c >= 3,
        theta0: res.theta0,
        theta1: res.theta1,
        resonance_defect: res.proportionality_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub theta0: f64,
    pub theta1: f64,
    /// |θ₀θ₁ − 1|: zero exactly when (θ₀, 1) and (1, θ₁) are proportional.
    pub proportionality_defect: f64,
}

pub fn resonance_check(h: u32, a: f64) -> Result<ResonanceReport> {
    let k = h as f64 + a;
    if !(k > 0.0) {
        return Err(ReebError::pre(format!("h + a = {k} must be positive")));
    }
    Ok(resonance_check_with(1.0 / k, k))
}

/// Defect for explicitly supplied θ₀, θ₁ (diagnostic use).
pub fn resonance_check_with(theta0: f64, theta1: f64) -> ResonanceReport {
    ResonanceReport { theta0, theta1, proportionality_defect: (theta0 * theta1 - 1.0).abs() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipsoid_examples() {
        let r = cz_ellipsoid(2f64.sqrt(), 2).unwrap();
        assert_eq!((r.n, r.mu_b, r.m, r.mu_c), (1, 3, 2, 5));
        assert!(r.dynamically_convex && r.resonance_defect <= 1e-12);
        let r = cz_ellipsoid(0.5f64.sqrt(), 1).unwrap();
        assert_eq!((r.mu_b, r.mu_c), (5, 3));
        assert!(matches!(cz_ellipsoid(1.0, 1), Err(ReebError::Degenerate { .. })));
        assert!(cz_ellipsoid(-1.0, 1).is_err());
    }

    #[test]
    fn window_rule() {
        assert_eq!(cz_from_rotation(1.707).unwrap(), 3);
        assert_eq!(cz_from_rotation(2.414).unwrap(), 5);
        assert_eq!(cz_from_rotation(0.5).unwrap(), 1);
        assert!(matches!(cz_from_rotation(3.0 + 1e-12), Err(ReebError::Degenerate { .. })));
    }

    #[test]
    fn resonance() {
        assert!(resonance_check(2, -0.3).unwrap().proportionality_defect <= 1e-15);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        assert!(resonance_check(1, g).unwrap().proportionality_defect <= 1e-15);
        assert!(resonance_check(1, -1.5).is_err());
        assert!((resonance_check_with(0.5, 3.0).proportionality_defect - 0.5).abs() < 1e-15);
    }
}
