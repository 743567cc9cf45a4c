use super::*;
use crate::disc_calculus::Hamiltonian;
use crate::Exec;

fn seq() -> FlowSettings {
    FlowSettings { exec: Exec::Sequential, ..Default::default() }
}

#[test]
fn rigid_rotation_time_2pi_map() {
    let h = Hamiltonian::rigid_rotation(2, 1, 3).unwrap();
    let p = DiscPoint::new(0.5, 0.0);
    let q = return_map(&h, p, &seq()).unwrap();
    let want = p.rotated(TAU / 3.0);
    assert!(q.dist(want) < 1e-12, "{q:?}");
    let path = integrate_isotopy(&h, p, 0.0, TAU, &seq()).unwrap();
    assert_eq!(path.points.len(), 2001);
    assert!(path.points.iter().all(|z| (z.r() - 0.5).abs() < 1e-12));
}

#[test]
fn constant_hamiltonian_is_stationary() {
    let h = Hamiltonian::constant(2).unwrap();
    let p = DiscPoint::new(0.3, -0.6);
    let path = integrate_isotopy(&h, p, 0.0, TAU, &seq()).unwrap();
    assert!(path.points.iter().all(|&z| z == p));
    assert_eq!(linearized_return(&h, p, &seq()).unwrap(), Mat2::IDENTITY);
    assert_eq!(area_preservation_audit(&h, &[p], &seq()).unwrap(), 0.0);
}

#[test]
fn quadratic_rotates_by_minus_2pi_a2() {
    let (a0, a2) = (1.3, 0.7);
    let h = Hamiltonian::quadratic(a0, a2).unwrap();
    let p = DiscPoint::new(0.8, 0.0);
    let q = return_map(&h, p, &seq()).unwrap();
    assert!(q.dist(p.rotated(-TAU * a2)) < 1e-11);
    let j = linearized_return(&h, DiscPoint::ORIGIN, &seq()).unwrap();
    assert!((j - Mat2::rotation(-TAU * a2)).max_abs() < 1e-11);
}

#[test]
fn linearized_rigid_rotation_is_rotation() {
    let h = Hamiltonian::rigid_rotation(3, 2, 5).unwrap();
    for p in [DiscPoint::new(0.1, 0.2), DiscPoint::new(-0.7, 0.3)] {
        let j = linearized_return(&h, p, &seq()).unwrap();
        assert!((j - Mat2::rotation(TAU * 0.4)).max_abs() < 1e-11);
        assert!((j.det() - 1.0).abs() < 1e-6);
    }
}

fn richardson_reference(h: &Hamiltonian, p: DiscPoint, n: usize) -> (DiscPoint, DiscPoint, DiscPoint) {
    let coarse = return_map(h, p, &FlowSettings { exec: Exec::Sequential, ..FlowSettings::with_steps(n) }).unwrap();
    let fine = return_map(h, p, &FlowSettings { exec: Exec::Sequential, ..FlowSettings::with_steps(2 * n) }).unwrap();
    let extrap = DiscPoint::new(fine.x + (fine.x - coarse.x) / 15.0, fine.y + (fine.y - coarse.y) / 15.0);
    (coarse, fine, extrap)
}

#[test]
fn angular_collar_matches_richardson_reference() {
    let h = Hamiltonian::angular_collar(3, 1.0, 0.1).unwrap();
    let p = DiscPoint::new(0.3, 0.2);
    let run = return_map(&h, p, &seq()).unwrap();
    let (_, _, reference) = richardson_reference(&h, p, 2000);
    assert!(run.dist(reference) < 1e-8, "{}", run.dist(reference));
}

#[test]
fn rk4_self_convergence_is_fourth_order() {
    let h = Hamiltonian::angular_collar(3, 1.0, 0.4).unwrap();
    let p = DiscPoint::new(0.45, -0.25);
    let n = 400;
    let (a, b, _) = richardson_reference(&h, p, n);
    let c = return_map(&h, p, &FlowSettings { exec: Exec::Sequential, ..FlowSettings::with_steps(4 * n) }).unwrap();
    let ratio = a.dist(b) / b.dist(c);
    assert!((ratio - 16.0).abs() < 0.3 * 16.0, "ratio {ratio}");
    let std = return_map(&h, p, &seq()).unwrap();
    let half = return_map(&h, p, &FlowSettings { exec: Exec::Sequential, ..FlowSettings::with_steps(4000) }).unwrap();
    assert!(std.dist(half) < 1e-8);
}

#[test]
fn adaptive_agrees_with_fixed_step() {
    let h = Hamiltonian::angular_collar(2, 0.5, 0.3).unwrap();
    let p = DiscPoint::new(-0.2, 0.5);
    let a = return_map(&h, p, &seq()).unwrap();
    let b = return_map(&h, p, &FlowSettings { integrator: Integrator::Rk45, ..seq() }).unwrap();
    assert!(a.dist(b) < 1e-8, "{}", a.dist(b));
    let (_, j) = flow_with_jacobian(&h, p, 0.0, TAU, &FlowSettings { integrator: Integrator::Rk45, ..seq() }).unwrap();
    assert!((j.det() - 1.0).abs() < 1e-6);
}

#[test]
fn max_steps_is_enforced() {
    let h = Hamiltonian::constant(1).unwrap();
    let s = FlowSettings { max_steps: 10, ..seq() };
    let err = return_map(&h, DiscPoint::ORIGIN, &s).unwrap_err();
    assert!(matches!(err, ReebError::Integration { .. }));
}

#[test]
fn reeb_period_examples() {
    let (a0, a2) = (1.25, 0.75);
    let q = Hamiltonian::quadratic(a0, a2).unwrap();
    let path = integrate_isotopy(&q, DiscPoint::ORIGIN, 0.0, TAU, &seq()).unwrap();
    assert!((reeb_period(&q, &path).unwrap() - TAU * a0).abs() < 1e-10);

    let c = Hamiltonian::constant(3).unwrap();
    let path = integrate_isotopy(&c, DiscPoint::new(0.4, 0.1), 0.0, TAU, &seq()).unwrap();
    assert!((reeb_period(&c, &path).unwrap() - TAU * 3.0).abs() < 1e-10);

    // Rotation by π: every orbit closes after two returns. The integrand
    // H + λ(X) = h + c − c r² + c r² is constant along it.
    let h = 2;
    let rr = Hamiltonian::rigid_rotation(h, 1, 2).unwrap();
    let path = integrate_isotopy(&rr, DiscPoint::new(0.5, 0.0), 0.0, 2.0 * TAU, &seq()).unwrap();
    let closed_form = 2.0 * TAU * (h as f64 + 0.5);
    assert!((reeb_period(&rr, &path).unwrap() - closed_form).abs() < 1e-8);

    let open = integrate_isotopy(&rr, DiscPoint::new(0.5, 0.0), 0.0, TAU, &seq()).unwrap();
    assert!(matches!(reeb_period(&rr, &open), Err(ReebError::Precondition(_))));
}

#[test]
fn rigid_rotation_area_defect_is_tiny() {
    let h = Hamiltonian::rigid_rotation(2, 1, 3).unwrap();
    let pts = polar_points(3, 4, 0.9);
    assert!(area_preservation_audit(&h, &pts, &seq()).unwrap() <= 1e-10);
}

#[test]
fn radial_hamiltonians_preserve_circles() {
    let h = Hamiltonian::quadratic(0.6, 1.4).unwrap();
    let rep = return_map_report(&h, &polar_points(2, 3, 0.95), &[0.3, 0.9], 8, &seq()).unwrap();
    assert!(rep.rotation.iter().all(|r| r.radius_drift < 1e-8));
    let want = wrap_angle(-TAU * 1.4);
    assert!(rep.rotation.iter().all(|r| (r.angle - want).abs() < 1e-9));
    assert!(rep.max_area_defect < 1e-9);
}

#[test]
fn rigid_rotation_scan_finds_period_three() {
    let h = Hamiltonian::rigid_rotation(2, 1, 3).unwrap();
    let mut seeds = polar_points(2, 3, 0.8);
    seeds.push(DiscPoint::ORIGIN);
    let scan = ScanSettings { max_period: 3, ..Default::default() };
    let recs = periodic_point_scan(&h, &seeds, &scan, &seq()).unwrap();
    assert_eq!(recs.len(), seeds.len());
    for r in &recs {
        let want = if r.seed == DiscPoint::ORIGIN { 1 } else { 3 };
        assert_eq!(r.period, want);
        assert!(r.residual < 1e-10);
    }
}

#[test]
fn constant_scan_is_all_fixed() {
    let h = Hamiltonian::constant(1).unwrap();
    let seeds = polar_points(2, 2, 0.5);
    let recs = periodic_point_scan(&h, &seeds, &ScanSettings::default(), &seq()).unwrap();
    assert!(recs.iter().all(|r| r.period == 1 && r.residual == 0.0));
}

#[test]
fn newton_refines_a_perturbed_seed() {
    // Twist map: the center is the only fixed point of an irrational
    // rotation; a nearby seed is pulled onto it by Newton.
    let h = Hamiltonian::quadratic(2.0 - 0.3819660112501051, 0.3819660112501051).unwrap();
    let seed = DiscPoint::new(1e-7, 0.0);
    let scan = ScanSettings { max_period: 1, tol: 1e-6, ..Default::default() };
    let recs = periodic_point_scan(&h, &[seed], &scan, &seq()).unwrap();
    assert_eq!(recs.len(), 1);
    assert!(recs[0].refined);
    assert!(recs[0].point.r() < 1e-12);
}
