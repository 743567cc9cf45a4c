use reebcut::cut_binding::{extension_test, BindingChart, ExtensionSettings};
use reebcut::disc_calculus::{BumpGenerator, BumpProfile, RotationMap};
use reebcut::invariants::{rotation_number, FrameSpec, Orbit, RotationSettings};
use reebcut::isotopy_flow::{area_preservation_audit, periodic_point_scan, polar_points, FlowSettings, ScanSettings};
use reebcut::moser_generator::{canonical_hamiltonian, sup_difference, CanonicalSettings, HamiltonianIsotopy};
use reebcut::pseudorotation_lab::{
    audit_flow, composed_return, conjugated_stage, fixture_conjugators, Conjugator, ConjugatorSettings,
};
use reebcut::{DiscMap, DiscPoint, Exec, Hamiltonian};
use std::f64::consts::TAU;
use std::sync::Arc;

const SEQ: Exec = Exec::Sequential;

fn fixture(i: usize) -> Conjugator {
    Conjugator::new(fixture_conjugators()[i], ConjugatorSettings::default()).unwrap()
}

#[test]
fn conjugated_stage_has_period_three_points_at_conjugated_images() {
    let phi = fixture(0);
    let stage = conjugated_stage(2, 1, 3, &phi).unwrap();
    let rot = RotationMap { angle: TAU / 3.0 };
    let rigid_orbit_starts = polar_points(2, 3, 0.85);
    let seeds: Vec<DiscPoint> = rigid_orbit_starts.iter().map(|&x| phi.apply(x)).collect();
    let flow = FlowSettings { exec: SEQ, ..audit_flow() };
    let scan = ScanSettings { max_period: 3, ..Default::default() };
    let recs = periodic_point_scan(&stage.hamiltonian, &seeds, &scan, &flow).unwrap();
    assert_eq!(recs.len(), seeds.len());
    for (r, x) in recs.iter().zip(&rigid_orbit_starts) {
        assert_eq!(r.period, 3);
        assert!(r.residual < 1e-6, "{r:?}");
        // the next orbit point is φ of the rotated preimage
        let next = reebcut::isotopy_flow::return_map(&stage.hamiltonian, r.point, &flow).unwrap();
        assert!(next.dist(phi.apply(rot.apply(*x))) < 1e-6);
        assert!(next.dist(composed_return(&phi, 1, 3, r.point)) < 1e-6);
    }
}

#[test]
fn stage_return_maps_preserve_area() {
    let phi = fixture(1);
    let stage = conjugated_stage(2, 2, 5, &phi).unwrap();
    let pts = polar_points(3, 4, 0.9);
    let defect = area_preservation_audit(&stage.hamiltonian, &pts, &FlowSettings { exec: SEQ, ..audit_flow() }).unwrap();
    assert!(defect <= 1e-6, "{defect:e}");
}

#[test]
fn stage_center_rotates_rigidly() {
    // The conjugator is supported in an annulus, so the stage is the rigid
    // rotation near the center.
    let phi = fixture(2);
    let stage = conjugated_stage(2, 3, 8, &phi).unwrap();
    let st = RotationSettings {
        covers: 2,
        flow: FlowSettings { exec: SEQ, ..FlowSettings::with_steps(400) },
        extension: ExtensionSettings { k_max: 2, exec: SEQ, ..Default::default() },
        ..Default::default()
    };
    let rho = rotation_number(&stage.hamiltonian, Orbit::Central, FrameSpec::Interior, &st).unwrap();
    assert!((rho - 3.0 / 8.0).abs() < 1e-6, "{rho}");
}

#[test]
fn extension_rotation_matches_central_rotation() {
    let a0 = 1.7;
    let ham = Hamiltonian::quadratic(a0, 2.0 - a0).unwrap();
    let chart = BindingChart::with_default_collar(2).unwrap();
    let rep = extension_test(&ham, &chart, &ExtensionSettings { exec: SEQ, ..Default::default() }).unwrap();
    let st = RotationSettings {
        covers: 2,
        flow: FlowSettings { exec: SEQ, ..FlowSettings::with_steps(400) },
        extension: ExtensionSettings { k_max: 2, exec: SEQ, ..Default::default() },
        ..Default::default()
    };
    let rho = rotation_number(&ham, Orbit::Central, FrameSpec::Interior, &st).unwrap();
    assert!((rep.effective_a - rho).abs() < 1e-6, "{} {rho}", rep.effective_a);
}

#[test]
fn canonical_hamiltonian_of_time_dependent_bump() {
    let k = Hamiltonian::bump_generator(BumpGenerator {
        amplitude: 0.25,
        profile: BumpProfile::Centered { r_out: 0.7 },
        mode: 0,
        phase: 0.0,
        time: (0.0, 1.0),
    })
    .unwrap();
    let path = HamiltonianIsotopy {
        generator: k.clone(),
        settings: FlowSettings { exec: SEQ, ..FlowSettings::with_steps(400) },
        support_radius: 0.7,
    };
    let h = canonical_hamiltonian(Arc::new(path), CanonicalSettings::default()).unwrap();
    let err = sup_difference(&h, &k, 3, 4, 3, SEQ).unwrap();
    assert!(err < 1e-5, "{err:e}");
    assert_eq!(h.value(2.0, DiscPoint::from_polar(0.75, 0.3)), 0.0);
}
