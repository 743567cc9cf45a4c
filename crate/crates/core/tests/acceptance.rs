//! End-to-end acceptance checks. Each criterion prints one line:
//! `[PASS|FAIL] <id> <name>: <score> (threshold) [time]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reebcut::cut_binding::{binding_function_f, extension_test, pullback_residual, BindingChart, ExtensionSettings, QuotientMapSpec};
use reebcut::disc_calculus::{BumpGenerator, BumpProfile};
use reebcut::invariants::{
    cz_ellipsoid, cz_from_rotation, hopf_fixture, linking_on_s3, rotation_number, self_linking, split_fixture,
    FrameSpec, Orbit, RotationSettings,
};
use reebcut::isotopy_flow::{return_map, FlowSettings, ScanSettings};
use reebcut::moser_generator::{
    bump_density_fixture, canonical_hamiltonian, moser_flow, poincare_primitive, primitive_residual, residual_order,
    sup_difference, CanonicalSettings, EtaFixture, HamiltonianIsotopy, MoserSettings, QuadratureRule, UnitBump,
};
use reebcut::pseudorotation_lab::{
    audit_flow, composition_defect, conjugated_stage, conjugation_defect, convergents, fixture_conjugators,
    rigid_rotation_hamiltonian, stage_sequence, Conjugator, ConjugatorSettings, SequenceSettings,
};
use reebcut::{DiscPoint, Exec, Hamiltonian};
use std::f64::consts::TAU;
use std::sync::Arc;
use std::time::Instant;

const EX: Exec = Exec::Parallel;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn golden() -> f64 {
    2.0 / (1.0 + 5f64.sqrt())
}

fn random_disc_points(n: usize, seed: u64) -> Vec<DiscPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| DiscPoint::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU)))
        .collect()
}

fn c01_rigid_rotation() -> Outcome {
    let ham = Hamiltonian::rigid_rotation(2, 1, 3).unwrap();
    let flow = FlowSettings::default();
    let pts = random_disc_points(100, 1);
    let (mut angle, mut drift) = (0.0_f64, 0.0_f64);
    for p in pts {
        let q = return_map(&ham, p, &flow).unwrap();
        drift = drift.max((q.r() - p.r()).abs());
        if p.r() > 1e-3 {
            let d = (q.theta() - p.theta() - TAU / 3.0).rem_euclid(TAU);
            angle = angle.max(d.min(TAU - d));
        }
    }
    outcome(angle <= 1e-8 && drift <= 1e-10, format!("angle err {angle:.2e} (≤1e-8), radius drift {drift:.2e} (≤1e-10)"))
}

fn c02_binding_function() -> Outcome {
    let a0 = 2f64.sqrt();
    let ham = Hamiltonian::quadratic(a0, 2.0 - a0).unwrap();
    let chart = BindingChart::with_default_collar(2).unwrap();
    let mut worst = 0.0_f64;
    for i in 0..8 {
        let b = TAU * i as f64 / 8.0;
        for m in 1..=20 {
            let rho = chart.rho_max() * m as f64 / 21.0;
            for j in 0..16 {
                let t = TAU * j as f64 / 16.0;
                let f = binding_function_f(&ham, &chart, b, rho, t).unwrap();
                worst = worst.max((f - a0 * (2.0 - rho * rho)).abs());
            }
        }
    }
    outcome(worst <= 1e-12, format!("max |f − a0(2−ρ²)| {worst:.2e} (≤1e-12)"))
}

fn c03_cz_windows() -> Outcome {
    let a0 = 2f64.sqrt();
    let rep = cz_ellipsoid(a0, 2).unwrap();
    let ham = Hamiltonian::quadratic(a0, 2.0 - a0).unwrap();
    let st = RotationSettings::default();
    let rb = rotation_number(&ham, Orbit::Binding, FrameSpec::Interior, &st).unwrap();
    let rc = rotation_number(&ham, Orbit::Central, FrameSpec::Binding, &st).unwrap();
    let (eb, ec) = ((rb - rep.rho_b).abs(), (rc - rep.rho_c).abs());
    let same = cz_from_rotation(rb).ok() == Some(rep.mu_b) && cz_from_rotation(rc).ok() == Some(rep.mu_c);
    let pass = rep.mu_b == 3 && rep.mu_c == 5 && eb <= 0.02 && ec <= 0.02 && same;
    outcome(pass, format!("μB={} μC={}, |Δρ_B|={eb:.1e} |Δρ_C|={ec:.1e} (≤0.02), windows agree: {same}", rep.mu_b, rep.mu_c))
}

fn c04_dynamical_convexity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = Vec::new();
    let mut n = 0;
    while n < 50 {
        let a0: f64 = 10f64.powf(rng.gen_range(-1.0..1.0));
        if (a0 - 1.0).abs() < 1e-6 {
            continue;
        }
        n += 1;
        match cz_ellipsoid(a0, 1) {
            Ok(r) if r.mu_b >= 3 && r.mu_c >= 3 && ((r.mu_b == 3) != (r.mu_c == 3)) => {}
            other => bad.push(format!("a0={a0}: {other:?}")),
        }
    }
    outcome(bad.is_empty(), format!("{} of 50 violate (0 allowed) {}", bad.len(), bad.join("; ")))
}

fn c05_poincare_lemma() -> Outcome {
    let chi = UnitBump::default();
    let mut worst = 0.0_f64;
    let mut min_order = f64::INFINITY;
    for f in EtaFixture::ALL {
        let eta = f.grid(256, EX).unwrap();
        let beta = poincare_primitive(&eta, &chi, EX).unwrap();
        worst = worst.max(primitive_residual(&beta, &eta, EX).unwrap());
        let (_, _, order) = residual_order(f, 65, QuadratureRule::Cubic4, &chi, EX).unwrap();
        min_order = min_order.min(order);
    }
    outcome(worst <= 1e-6 && min_order >= 2.0, format!("‖dβ − η‖∞ {worst:.2e} (≤1e-6), min order {min_order:.2} (≥2)"))
}

fn c06_moser() -> Outcome {
    let (r0, r1) = bump_density_fixture(0.2);
    let r = moser_flow(r0, r1, &UnitBump::default(), &MoserSettings { exec: EX, ..Default::default() }).unwrap();
    outcome(
        r.max_residual <= 1e-5 && r.boundary_identity_exact,
        format!("density residual {:.2e} (≤1e-5), identity on margin: {}", r.max_residual, r.boundary_identity_exact),
    )
}

fn c07_canonical() -> Outcome {
    let flow = FlowSettings { exec: Exec::Sequential, ..FlowSettings::with_steps(500) };
    let profile = BumpProfile::Annular { r_in: 0.2, r_out: 0.8 };
    let gens = [
        BumpGenerator::autonomous(0.3, profile, 1, 0.4),
        BumpGenerator { amplitude: 0.3, profile: BumpProfile::Centered { r_out: 0.7 }, mode: 0, phase: 0.0, time: (0.0, 1.0) },
    ];
    let mut errs = Vec::new();
    for g in gens {
        let k = Hamiltonian::bump_generator(g).unwrap();
        let path = HamiltonianIsotopy { generator: k.clone(), settings: flow, support_radius: g.profile.r_out() };
        let h = canonical_hamiltonian(Arc::new(path), CanonicalSettings::default()).unwrap();
        errs.push(sup_difference(&h, &k, 4, 6, 8, EX).unwrap());
    }
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    outcome(worst <= 1e-5, format!("sup |H − K| autonomous {:.2e}, s-dependent {:.2e} (≤1e-5)", errs[0], errs[1]))
}

fn c08_extension_discrimination() -> Outcome {
    let a0 = 2f64.sqrt();
    let fixtures = vec![
        Hamiltonian::quadratic(a0, 2.0 - a0).unwrap(),
        Hamiltonian::quadratic(0.5, 1.5).unwrap(),
        Hamiltonian::rigid_rotation(2, 1, 3).unwrap(),
        Hamiltonian::rigid_rotation(1, -1, 4).unwrap(),
        Hamiltonian::constant(3).unwrap(),
        Hamiltonian::angular_collar(2, 0.7, 0.0).unwrap(),
    ];
    let st = ExtensionSettings { exec: EX, ..Default::default() };
    let mut failures = Vec::new();
    for ham in &fixtures {
        let chart = BindingChart::with_default_collar(ham.h()).unwrap();
        let rep = extension_test(ham, &chart, &st).unwrap();
        if !(rep.pass && rep.smooth_order == Some(4)) {
            failures.push(ham.label().to_string());
        }
    }
    let seq = SequenceSettings::default();
    let (stages, _) = stage_sequence(golden(), 5, &seq).unwrap();
    for s in &stages {
        let chart = BindingChart::with_default_collar(s.h).unwrap();
        let rep = extension_test(&s.hamiltonian, &chart, &st).unwrap();
        if !(rep.pass && rep.smooth_order == Some(4)) {
            failures.push(format!("stage {} ({}/{}) order {:?}", s.nu, s.p, s.q, rep.smooth_order));
        }
    }
    let mut spreads = Vec::new();
    for d in [0.1, 0.5] {
        let ham = Hamiltonian::angular_collar(2, 1.0, d).unwrap();
        let chart = BindingChart::with_default_collar(2).unwrap();
        let rep = extension_test(&ham, &chart, &st).unwrap();
        let ok = !rep.orders[0].pass && rep.smooth_order.is_none() && (rep.direction_spread - 2.0 * d).abs() <= 1e-3 * d;
        if !ok {
            failures.push(format!("collar d={d} spread {}", rep.direction_spread));
        }
        spreads.push(rep.direction_spread);
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} fixtures + {} stages pass to order 4; collar spreads {:.6} / {:.6} (≈0.2 / 1.0); failures: {:?}",
            fixtures.len(),
            stages.len(),
            spreads[0],
            spreads[1],
            failures
        ),
    )
}

fn c09_jet_values() -> Outcome {
    let st = ExtensionSettings { exec: EX, ..Default::default() };
    let mut worst = 0.0_f64;
    for (p, q) in convergents(golden(), 5).unwrap() {
        let ham = rigid_rotation_hamiltonian(2, p, q).unwrap();
        let chart = BindingChart::with_default_collar(2).unwrap();
        let rep = extension_test(&ham, &chart, &st).unwrap();
        let want = -2.0 * (2.0 + p as f64 / q as f64);
        for v in rep.f_rhorho0.iter().flatten() {
            worst = worst.max((v - want).abs());
        }
    }
    outcome(worst <= 1e-6, format!("max |f̃_ρρ(0,·) + 2(h + p/q)| {worst:.2e} (≤1e-6)"))
}

fn c10_self_linking() -> Outcome {
    let a0 = 2f64.sqrt();
    let ham = Hamiltonian::quadratic(a0, 2.0 - a0).unwrap();
    let rep = self_linking(QuotientMapSpec::Ellipsoid { h: 2, a0 }, &ham, 0.02, 512, EX).unwrap();
    let (a, b) = hopf_fixture(256);
    let hopf = linking_on_s3(&a, &b, 1e-3, EX).unwrap();
    let (a, b) = split_fixture(256);
    let split = linking_on_s3(&a, &b, 1e-3, EX).unwrap();
    let pass = rep.value == -1 && rep.confidence <= 0.05 && hopf.value.abs() == 1 && split.value == 0;
    outcome(
        pass,
        format!(
            "sl = {} (integral {:.4}, confidence {:.2e} ≤0.05); Hopf {}, unlink {}",
            rep.value, rep.integral, rep.confidence, hopf.value, split.value
        ),
    )
}

fn c11_conjugation() -> Outcome {
    let pts = random_disc_points(200, 11);
    let flow = audit_flow();
    let mut worst = 0.0_f64;
    for (spec, (p, q)) in fixture_conjugators().into_iter().zip([(1, 3), (2, 5), (3, 8)]) {
        let phi = Conjugator::new(spec, ConjugatorSettings::default()).unwrap();
        let stage = conjugated_stage(2, p, q, &phi).unwrap();
        worst = worst.max(conjugation_defect(&stage, &phi, &pts, &flow, EX).unwrap());
    }
    outcome(worst <= 1e-6, format!("max |ψ(x) − φRφ⁻¹(x)| over 3×200 points {worst:.2e} (≤1e-6)"))
}

fn c12_composition() -> Outcome {
    let k = Hamiltonian::bump_generator(BumpGenerator {
        amplitude: 0.15,
        profile: BumpProfile::Annular { r_in: 0.2, r_out: 0.8 },
        mode: 1,
        phase: 0.3,
        time: (0.0, 1.0),
    })
    .unwrap();
    let a0 = 2f64.sqrt();
    let h2 = Hamiltonian::quadratic(a0, 2.0 - a0).unwrap();
    let flow = FlowSettings { exec: Exec::Sequential, ..audit_flow() };
    let pts = random_disc_points(100, 12);
    let d = reebcut::par_map(EX, pts.len(), |i| composition_defect(&k, &h2, pts[i], &flow).unwrap());
    let worst = d.into_iter().fold(0.0, f64::max);
    outcome(worst <= 1e-5, format!("max |Ψ^comp − Ψ^K∘ψ^H| over 100 points {worst:.2e} (≤1e-5)"))
}

fn c13_stage_sequence() -> Outcome {
    let settings = SequenceSettings { scan: Some(ScanSettings { max_period: 8, ..Default::default() }), ..Default::default() };
    let (_, rep) = stage_sequence(golden(), 5, &settings).unwrap();
    let mut problems = Vec::new();
    let mut gaps = Vec::new();
    let mut f0_err = 0.0_f64;
    for s in &rep.stages {
        if !(s.contact_pass && s.extension_pass) {
            problems.push(format!("stage {} audits contact={} extension={}", s.nu, s.contact_pass, s.extension_pass));
        }
        f0_err = f0_err.max((s.f0 - s.f0_expected).abs());
        gaps.push((s.f0 - rep.f0_limit).abs());
        match &s.scan {
            Some(sc) if sc.periods.contains(&(s.q as usize)) => {}
            other => problems.push(format!("stage {} (q={}) scan {other:?}", s.nu, s.q)),
        }
    }
    let converging = gaps.windows(2).all(|w| w[1] < w[0]);
    if !converging {
        problems.push(format!("|f0 − 2(h+a)| not decreasing: {gaps:?}"));
    }
    outcome(
        problems.is_empty() && f0_err <= 1e-8,
        format!(
            "f0 error {f0_err:.2e} (≤1e-8), last gap {:.2e}, periods found {:?}; problems: {problems:?}",
            gaps.last().unwrap(),
            rep.stages.iter().map(|s| s.scan.as_ref().map(|x| x.periods.clone())).collect::<Vec<_>>()
        ),
    )
}

fn c14_pullback() -> Outcome {
    let r = pullback_residual(2f64.sqrt(), 2, 32, EX).unwrap();
    outcome(r <= 1e-6, format!("pullback residual {r:.2e} (≤1e-6)"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("rigid-rotation exactness", c01_rigid_rotation),
        ("ellipsoid binding function", c02_binding_function),
        ("CZ windows", c03_cz_windows),
        ("dynamical convexity", c04_dynamical_convexity),
        ("Poincaré lemma", c05_poincare_lemma),
        ("Moser round trip", c06_moser),
        ("canonical Hamiltonian round trip", c07_canonical),
        ("extension discrimination", c08_extension_discrimination),
        ("jet values", c09_jet_values),
        ("self-linking", c10_self_linking),
        ("conjugation invariance", c11_conjugation),
        ("composition law", c12_composition),
        ("stage sequence coherence", c13_stage_sequence),
        ("pullback identity", c14_pullback),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        println!(
            "[{}] {:>2} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
