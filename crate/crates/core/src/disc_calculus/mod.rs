//! Symplectic calculus on the closed unit disc.
//!
//! The area form is ω = 2r dr∧dθ = 2 dx∧dy with primitive λ = r² dθ. All
//! interior calculus is cartesian so nothing is singular at the origin.

mod builtins;
mod hamiltonian;
mod maps;
mod ops;
mod point;

pub use builtins::{polar_hessian, BumpGenerator, BumpProfile, PullbackBy};
pub use hamiltonian::{FnHamiltonian, Hamiltonian, HamiltonianFn, HamiltonianMeta};
pub use maps::{DiscMap, IdentityMap, RotationMap};
pub use ops::{
    contact_audit, contact_margin, definition_defect, hamiltonian_vector_field, liouville_pairing, AuditGrid,
    ContactAuditReport,
};
pub use point::{normalize_angle, DiscPoint, SolidTorusPoint, DISC_SLACK};


#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exec;
    use std::sync::Arc;

    #[test]
    fn quadratic_field_is_minus_a2_rotation() {
        let h = Hamiltonian::quadratic(2f64.sqrt(), 2.0 - 2f64.sqrt()).unwrap();
        let a2 = 2.0 - 2f64.sqrt();
        let p = DiscPoint::new(0.3, -0.4);
        let x = hamiltonian_vector_field(&h, 0.7, p).unwrap();
        assert!((x[0] - a2 * p.y).abs() < 1e-15);
        assert!((x[1] + a2 * p.x).abs() < 1e-15);
    }

    #[test]
    fn constant_has_zero_field() {
        let h = Hamiltonian::constant(3).unwrap();
        let x = hamiltonian_vector_field(&h, 1.0, DiscPoint::new(0.2, 0.9)).unwrap();
        assert_eq!(x, [0.0, 0.0]);
        assert_eq!(contact_margin(&h, 0.0, DiscPoint::new(0.5, 0.5)).unwrap(), 3.0);
    }

    #[test]
    fn angular_collar_field_matches_symbolic_gradient() {
        // ∂x[(1−r²)(c + d x/r)] at (x,0), x>0: −2x(c+d) ; ∂y: (1−x²) d · ∂y(x/r) = 0 on the axis,
        // plus −2y(...) = 0. Off-axis values come from the closed form below.
        let (h, c, d) = (3u32, 1.0, 0.1);
        let ham = Hamiltonian::angular_collar(h, c, d).unwrap();
        let sym = |x: f64, y: f64| {
            let r2 = x * x + y * y;
            let r = r2.sqrt();
            let a = c + d * x / r;
            let gx = -2.0 * x * a + (1.0 - r2) * d * (y * y) / (r2 * r);
            let gy = -2.0 * y * a + (1.0 - r2) * d * (-x * y) / (r2 * r);
            [gy / 2.0, -gx / 2.0]
        };
        for &(x, y) in &[(0.5, 0.0), (0.3, 0.4), (-0.2, 0.7)] {
            let got = hamiltonian_vector_field(&ham, 0.0, DiscPoint::new(x, y)).unwrap();
            let want = sym(x, y);
            assert!((got[0] - want[0]).abs() < 1e-9 && (got[1] - want[1]).abs() < 1e-9);
        }
        let got = hamiltonian_vector_field(&ham, 0.0, DiscPoint::new(0.5, 0.0)).unwrap();
        assert!((got[1] - 0.5 * (1.0 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn pairing_examples() {
        let a2 = 0.3;
        let q = Hamiltonian::quadratic(1.7, a2).unwrap();
        let p = DiscPoint::from_polar(0.7, 1.2);
        assert!((liouville_pairing(&q, 0.0, p).unwrap() + a2 * 0.49).abs() < 1e-12);
        assert_eq!(liouville_pairing(&q, 0.0, DiscPoint::ORIGIN).unwrap(), 0.0);
        let rr = Hamiltonian::rigid_rotation(2, 1, 3).unwrap();
        let b = DiscPoint::from_polar(1.0, 0.4);
        assert!((liouville_pairing(&rr, 0.0, b).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rigid_rotation_margin_is_h_plus_rotation() {
        // H − r∂_rH/2 = h + c − c r² + c r² = h + c everywhere.
        let rr = Hamiltonian::rigid_rotation(2, 1, 3).unwrap();
        for &r in &[0.0, 0.4, 1.0] {
            let m = contact_margin(&rr, 0.0, DiscPoint::from_polar(r, 0.3)).unwrap();
            assert!((m - (2.0 + 1.0 / 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn margin_agrees_with_euler_form() {
        let ham = Hamiltonian::angular_collar(3, 1.0, 0.1).unwrap();
        let p = DiscPoint::new(0.31, -0.52);
        let m = contact_margin(&ham, 0.0, p).unwrap();
        let alt = ham.value(0.0, p) - 0.5 * ham.euler_derivative(0.0, p);
        assert!((m - alt).abs() < 1e-9);
    }

    #[test]
    fn audit_examples() {
        let grid = AuditGrid::default();
        let ok = contact_audit(&Hamiltonian::quadratic(2f64.sqrt(), 2.0 - 2f64.sqrt()).unwrap(), grid, Exec::Sequential)
            .unwrap();
        assert!(ok.pass);
        assert!((ok.min_margin - 2f64.sqrt()).abs() < 1e-12);
        let bad = contact_audit(&Hamiltonian::quadratic(-0.1, 2.1).unwrap(), grid, Exec::Sequential).unwrap();
        assert!(!bad.pass);
        assert!((bad.min_margin + 0.1).abs() < 1e-12);
        let ang = contact_audit(&Hamiltonian::angular_collar(3, 1.0, 0.1).unwrap(), grid, Exec::Sequential).unwrap();
        assert!(ang.pass);
        let coarse = AuditGrid { n_s: 4, n_r: 16, n_theta: 16 };
        assert!(matches!(
            contact_audit(&Hamiltonian::constant(1).unwrap(), coarse, Exec::Sequential),
            Err(crate::ReebError::Configuration(_))
        ));
    }

    #[test]
    fn audit_is_mode_independent() {
        let ham = Hamiltonian::angular_collar(2, 0.5, 0.3).unwrap();
        let g = AuditGrid { n_s: 8, n_r: 16, n_theta: 16 };
        let a = contact_audit(&ham, g, Exec::Sequential).unwrap();
        let b = contact_audit(&ham, g, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn boundary_value_is_validated() {
        let err = Hamiltonian::from_fn(|_, x, y| 2.0 + 0.1 * x * y, 2, HamiltonianMeta::GENERIC, "bad");
        assert!(err.is_err());
        let err = Hamiltonian::from_fn(|s, x, y| 1.0 + (1.0 - x * x - y * y) * (s / 7.0), 1, HamiltonianMeta::GENERIC, "aperiodic");
        assert!(err.is_err());
    }

    #[test]
    fn pullback_gradient_is_chain_rule() {
        let base = Hamiltonian::angular_collar(2, 0.4, 0.2).unwrap();
        let rot = Arc::new(RotationMap { angle: 0.0 });
        let pb = Hamiltonian::pullback_by(&base, rot, 0.0).unwrap();
        let p = DiscPoint::new(0.2, 0.3);
        let a = pb.gradient(0.0, p);
        let b = base.gradient(0.0, p);
        assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    }

    #[test]
    fn fd_gradient_works_on_boundary() {
        let ham = Hamiltonian::from_fn(|_, x, y| 2.0 + 0.5 * (1.0 - x * x - y * y), 2, HamiltonianMeta::GENERIC, "q").unwrap();
        let p = DiscPoint::from_polar(1.0, 0.9);
        let g = ham.gradient(0.0, p);
        assert!((g[0] + p.x).abs() < 1e-8 && (g[1] + p.y).abs() < 1e-8);
    }
}
