use crate::disc_calculus::{DiscPoint, Hamiltonian};
use crate::exec::{try_par_map, Exec};
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Maps from the solid torus to C² = R⁴, written (Re z₁, Im z₁, Re z₂, Im z₂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum QuotientMapSpec {
    /// (√(1−r²) e^{is}, r e^{i(θ+hs)})
    Hemisphere { h: u32 },
    /// ((1−r²)/(1+r²) e^{is}, 2r/(1+r²) e^{i(θ+hs)})
    Stereographic { h: u32 },
    /// (√(a₀(1−r²)) e^{is}, r e^{i(θ+hs)}), landing on |z₁|²/a₀ + |z₂|² = 1
    Ellipsoid { h: u32, a0: f64 },
}

impl QuotientMapSpec {
    pub fn h(&self) -> u32 {
        match *self {
            QuotientMapSpec::Hemisphere { h } | QuotientMapSpec::Stereographic { h } | QuotientMapSpec::Ellipsoid { h, .. } => h,
        }
    }
}

pub fn quotient_map(spec: QuotientMapSpec, s: f64, r: f64, theta: f64) -> Result<[f64; 4]> {
    if !(0.0..=1.0).contains(&r) {
        return Err(ReebError::pre(format!("r = {r} outside [0, 1]")));
    }
    let (m1, m2) = match spec {
        QuotientMapSpec::Hemisphere { .. } => ((1.0 - r * r).sqrt(), r),
        QuotientMapSpec::Stereographic { .. } => ((1.0 - r * r) / (1.0 + r * r), 2.0 * r / (1.0 + r * r)),
        QuotientMapSpec::Ellipsoid { a0, .. } => {
            if !(a0 > 0.0) {
                return Err(ReebError::pre("ellipsoid needs a₀ > 0"));
            }
            ((a0 * (1.0 - r * r)).sqrt(), r)
        }
    };
    let phi = theta + spec.h() as f64 * s;
    Ok([m1 * s.cos(), m1 * s.sin(), m2 * phi.cos(), m2 * phi.sin()])
}

/// max |Ψ*(r₁²dθ₁ + r₂²dθ₂) − (H ds + x dy − y dx)| over an n³ grid, Ψ the
/// ellipsoid map and H = a₀ + (h − a₀) r². Differentials of Ψ are fourth-order
/// central differences with step 0.1/n. The grid stays in r ≤ 0.95, where
/// √(1 − r²) is smooth enough for the stencil.
pub fn pullback_residual(a0: f64, h: u32, n: usize, exec: Exec) -> Result<f64> {
    if !(a0 > 0.0) {
        return Err(ReebError::pre("a₀ > 0 required"));
    }
    if n < 2 {
        return Err(ReebError::config("grid needs n ≥ 2"));
    }
    let ham = Hamiltonian::quadratic(a0, h as f64 - a0)?;
    let spec = QuotientMapSpec::Ellipsoid { h, a0 };
    let psi = |s: f64, x: f64, y: f64| -> Result<[f64; 4]> { quotient_map(spec, s, x.hypot(y), y.atan2(x)) };
    let d = 0.1 / n as f64;
    let per_s = try_par_map(exec, n, |i| -> Result<f64> {
        let s = 2.0 * PI * i as f64 / n as f64;
        let mut worst = 0.0_f64;
        for j in 0..n {
            let r = 0.95 * (j as f64 + 0.5) / n as f64;
            for k in 0..n {
                let t = 2.0 * PI * k as f64 / n as f64;
                let (x, y) = (r * t.cos(), r * t.sin());
                let p = psi(s, x, y)?;
                let diff = |dir: usize| -> Result<[f64; 4]> {
                    let at = |e: f64| {
                        let mut q = [s, x, y];
                        q[dir] += e;
                        psi(q[0], q[1], q[2])
                    };
                    let (p1, m1, p2, m2) = (at(d)?, at(-d)?, at(2.0 * d)?, at(-2.0 * d)?);
                    Ok(std::array::from_fn(|c| (8.0 * (p1[c] - m1[c]) - (p2[c] - m2[c])) / (12.0 * d)))
                };
                let want = [ham.value(s, DiscPoint::new(x, y)), -y, x];
                for (dir, w) in want.iter().enumerate() {
                    let dp = diff(dir)?;
                    let got = p[0] * dp[1] - p[1] * dp[0] + p[2] * dp[3] - p[3] * dp[2];
                    worst = worst.max((got - w).abs());
                }
            }
        }
        Ok(worst)
    })?;
    Ok(per_s.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let p = quotient_map(QuotientMapSpec::Hemisphere { h: 2 }, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(p, [0.0, 0.0, 1.0, 0.0]);
        let p = quotient_map(QuotientMapSpec::Stereographic { h: 2 }, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(p, [0.0, 0.0, 1.0, 0.0]);
        let p = quotient_map(QuotientMapSpec::Ellipsoid { h: 1, a0: 2.0 }, 0.0, 0.0, 0.7).unwrap();
        assert!((p[0] - 2f64.sqrt()).abs() < 1e-15 && p[1] == 0.0 && p[2] == 0.0 && p[3] == 0.0);
        assert!(quotient_map(QuotientMapSpec::Hemisphere { h: 1 }, 0.0, 1.1, 0.0).is_err());
    }

    #[test]
    fn images_lie_on_targets() {
        for i in 0..40 {
            let (s, r, t) = (0.37 * i as f64, i as f64 / 39.0, 1.3 * i as f64);
            for spec in [QuotientMapSpec::Hemisphere { h: 3 }, QuotientMapSpec::Stereographic { h: 3 }] {
                let p = quotient_map(spec, s, r, t).unwrap();
                assert!((p.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
            }
            let a0 = 1.7;
            let p = quotient_map(QuotientMapSpec::Ellipsoid { h: 2, a0 }, s, r, t).unwrap();
            assert!(((p[0] * p[0] + p[1] * p[1]) / a0 + p[2] * p[2] + p[3] * p[3] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hemisphere_reparametrizes_stereographic() {
        for i in 0..30 {
            let (s, r, t) = (0.2 * i as f64, i as f64 / 29.0, 0.9 * i as f64);
            let a = quotient_map(QuotientMapSpec::Stereographic { h: 2 }, s, r, t).unwrap();
            let b = quotient_map(QuotientMapSpec::Hemisphere { h: 2 }, s, 2.0 * r / (1.0 + r * r), t).unwrap();
            for c in 0..4 {
                assert!((a[c] - b[c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ellipsoid_pullback_is_the_contact_form() {
        let fine = pullback_residual(2f64.sqrt(), 2, 32, Exec::Sequential).unwrap();
        assert!(fine <= 1e-6, "{fine:e}");
        let round = pullback_residual(1.0, 1, 32, Exec::Sequential).unwrap();
        assert!(round <= 1e-6, "{round:e}");
        let coarse = pullback_residual(2f64.sqrt(), 2, 4, Exec::Sequential).unwrap();
        assert!(coarse <= 1e-3 && coarse >= fine, "{coarse:e}");
    }
}
