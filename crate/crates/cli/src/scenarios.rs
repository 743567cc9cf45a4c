//! Scenario drivers. Each turns validated parameters into results, checks,
//! CSV exports and plot series; nothing here writes to disk.

use crate::config::*;
use crate::plots::Plot;
use crate::report::{Check, DataFile, Outcome, Timing};
use crate::CliError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reebcut::cut_binding::{extension_test, pullback_residual, BindingChart, ExtensionReport, ExtensionSettings};
use reebcut::disc_calculus::contact_audit;
use reebcut::invariants::{cz_ellipsoid, cz_from_rotation, rotation_number, self_linking, FrameSpec, Orbit};
use reebcut::isotopy_flow::{polar_points, FlowSettings, return_map, return_map_report};
use reebcut::linalg::wrap_angle;
use reebcut::moser_generator::{
    bump_density_fixture, moser_flow, poincare_primitive, primitive_residual, residual_order, UnitBump,
};
use reebcut::pseudorotation_lab::{
    audit_flow, conjugation_defect, convergents, orbit_statistics, stage_sequence, Conjugator, SequenceSettings,
};
use reebcut::{DiscPoint, Exec, Hamiltonian};
use serde_json::json;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::time::Instant;

const EXEC: Exec = Exec::Parallel;

#[derive(Default)]
struct Clock(Vec<Timing>);

impl Clock {
    fn time<T>(&mut self, op: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        self.0.push(Timing { operation: op.to_string(), seconds: t.elapsed().as_secs_f64() });
        v
    }
}

pub fn execute(prepared: &Prepared, seed: u64) -> Result<Outcome, CliError> {
    let mut clock = Clock::default();
    let mut out = match prepared {
        Prepared::Ellipsoid(p) => ellipsoid(p, &mut clock)?,
        Prepared::CutCheck(p) => cut_check(p, &mut clock)?,
        Prepared::ReturnMap(p) => return_map_scenario(p, seed, &mut clock)?,
        Prepared::PoincareLemma(p) => poincare(p, &mut clock)?,
        Prepared::Moser(p) => moser(p, &mut clock)?,
        Prepared::Pseudorotation(p) => pseudorotation(p, seed, &mut clock)?,
        Prepared::SelfLinking(p) => linking(p, &mut clock)?,
    };
    out.timings = clock.0;
    Ok(out)
}

/// Everything in an extension report except the raw samples, which go to CSV.
fn extension_summary(r: &ExtensionReport) -> serde_json::Value {
    json!({
        "h": r.h,
        "rho": r.rho,
        "b": r.b,
        "n_directions": r.vartheta.len(),
        "f0_mean": r.f0_mean,
        "direction_spread": r.direction_spread,
        "effective_a": r.effective_a,
        "orders": r.orders,
        "smooth_order": r.smooth_order,
        "pass": r.pass,
    })
}

fn extension_checks(r: &ExtensionReport, checks: &mut Vec<Check>) {
    for v in &r.orders {
        checks.push(Check::verdict(format!("extension_order_{}", v.order), v.pass, v.structure_defect, v.tolerance, "<="));
    }
}

/// One CSV and one plot per b sample, a line per direction.
fn extension_exports(r: &ExtensionReport, out: &mut Outcome) {
    for (i, b) in r.b.iter().enumerate() {
        out.data.push(DataFile { name: format!("f_profile_b{i}.csv"), contents: r.profile_csv(i) });
        let series = (0..r.vartheta.len())
            .map(|j| r.rho.iter().enumerate().map(|(m, rho)| [rho.log10(), r.samples[i][m][j]]).collect())
            .collect();
        out.plots.push(Plot::Lines {
            file: format!("f_profile_b{i}.svg"),
            title: format!("f(ρ) per direction at b = {b:.4}"),
            x_label: "log10 ρ".into(),
            y_label: "f".into(),
            series,
        });
    }
}

fn ellipsoid(p: &EllipsoidParams, clock: &mut Clock) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let cz = clock.time("cz_ellipsoid", || cz_ellipsoid(p.a0, p.h))?;
    let pull = clock.time("pullback_residual", || pullback_residual(p.a0, p.h, p.pullback_n, EXEC))?;
    out.checks.push(Check::ge("min_cz_index", cz.mu_b.min(cz.mu_c) as f64, 3.0));
    out.checks.push(Check::le("pullback_residual", pull, p.pullback_tol));

    let ham = Hamiltonian::quadratic(p.a0, p.h as f64 - p.a0)?;
    let mut numeric = serde_json::Value::Null;
    if p.numeric_rotation {
        let rb = clock.time("rotation_binding", || rotation_number(&ham, Orbit::Binding, FrameSpec::Interior, &p.rotation))?;
        let rc = clock.time("rotation_central", || rotation_number(&ham, Orbit::Central, FrameSpec::Binding, &p.rotation))?;
        let window = |r: f64| cz_from_rotation(r).map(|m| m as f64).unwrap_or(f64::NAN);
        out.checks.push(Check::le("rotation_b_error", (rb - cz.rho_b).abs(), p.rotation_tol));
        out.checks.push(Check::le("rotation_c_error", (rc - cz.rho_c).abs(), p.rotation_tol));
        out.checks.push(Check::eq("cz_b_from_numeric_rotation", window(rb), cz.mu_b as f64));
        out.checks.push(Check::eq("cz_c_from_numeric_rotation", window(rc), cz.mu_c as f64));
        numeric = json!({ "rho_b": rb, "rho_c": rc });
    }

    let chart = BindingChart::with_default_collar(p.h)?;
    let st = ExtensionSettings { expected_a: Some(p.a0 - p.h as f64), ..p.extension };
    let ext = clock.time("extension_test", || extension_test(&ham, &chart, &st))?;
    extension_checks(&ext, &mut out.checks);
    extension_exports(&ext, &mut out);

    out.results = json!({
        "cz": cz,
        "pullback_residual": pull,
        "numeric_rotation": numeric,
        "extension": extension_summary(&ext),
    });
    Ok(out)
}

fn cut_check(p: &CutCheckParams, clock: &mut Clock) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let ham = p.hamiltonian.build()?;
    let chart = p.chart(ham.h())?;
    let audit = clock.time("contact_audit", || contact_audit(&ham, p.contact_grid, EXEC))?;
    out.checks.push(Check::gt("contact_min_margin", audit.min_margin, 0.0));
    let st = ExtensionSettings { expected_a: p.expected_a.or(p.extension.expected_a), ..p.extension };
    let ext = clock.time("extension_test", || extension_test(&ham, &chart, &st))?;
    out.checks.push(Check::le("direction_spread", ext.direction_spread, st.tolerance(0)));
    extension_checks(&ext, &mut out.checks);
    extension_exports(&ext, &mut out);
    out.results = json!({
        "hamiltonian": ham.label(),
        "chart": { "h": chart.h, "epsilon": chart.epsilon, "rho_max": chart.rho_max() },
        "contact": audit,
        "extension": extension_summary(&ext),
    });
    Ok(out)
}

fn random_disc_points(rng: &mut ChaCha8Rng, n: usize, r_max: f64) -> Vec<DiscPoint> {
    (0..n)
        .map(|_| {
            let r = r_max * rng.gen::<f64>().sqrt();
            DiscPoint::from_polar(r, TAU * rng.gen::<f64>())
        })
        .collect()
}

fn return_map_scenario(p: &ReturnMapParams, seed: u64, clock: &mut Clock) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let ham = p.hamiltonian.build()?;
    let mut pts = polar_points(p.grid.n_r, p.grid.n_theta, p.grid.r_max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pts.extend(random_disc_points(&mut rng, p.random_points, p.grid.r_max));
    let rep = clock.time("return_map_report", || return_map_report(&ham, &pts, &p.radii, p.n_theta, &p.flow))?;
    out.checks.push(Check::le("area_defect", rep.max_area_defect, p.area_tol));

    let exact = p.hamiltonian.exact_rotation();
    if exact.is_some() {
        let drift = rep.rotation.iter().map(|r| r.radius_drift).fold(0.0, f64::max);
        out.checks.push(Check::le("radius_drift", drift, p.drift_tol));
    }
    if let Some(turns) = p.expected_rotation.or(exact) {
        let err = rep.rotation.iter().map(|r| wrap_angle(r.angle - TAU * turns).abs()).fold(0.0, f64::max);
        out.checks.push(Check::le("rotation_angle_error", err, p.rotation_tol));
    }

    let mut orbits: Vec<Vec<[f64; 2]>> = Vec::new();
    clock.time("orbit_traces", || {
        for (k, s) in p.orbit_starts.iter().enumerate() {
            let mut x = DiscPoint::new(s[0], s[1]);
            let mut trace = vec![*s];
            for n in 0..p.orbit_iterations {
                match return_map(&ham, x, &p.flow) {
                    Ok(y) => {
                        x = y;
                        trace.push(y.to_array());
                    }
                    Err(e) => {
                        out.notices.push(format!("orbit {k} stopped at iterate {}: {e}", n + 1));
                        break;
                    }
                }
            }
            orbits.push(trace);
        }
    });

    let mut csv = String::from("x,y,image_x,image_y,det_defect\n");
    for e in &rep.entries {
        let _ = writeln!(csv, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", e.input.x, e.input.y, e.image.x, e.image.y, e.det_defect);
    }
    out.data.push(DataFile { name: "return_map.csv".into(), contents: csv });
    let mut csv = String::from("radius,angle,radius_drift\n");
    for r in &rep.rotation {
        let _ = writeln!(csv, "{:.17e},{:.17e},{:.17e}", r.radius, r.angle, r.radius_drift);
    }
    out.data.push(DataFile { name: "rotation.csv".into(), contents: csv });
    let mut csv = String::from("orbit,index,x,y\n");
    for (k, tr) in orbits.iter().enumerate() {
        for (i, q) in tr.iter().enumerate() {
            let _ = writeln!(csv, "{k},{i},{:.17e},{:.17e}", q[0], q[1]);
        }
    }
    out.data.push(DataFile { name: "orbits.csv".into(), contents: csv });
    out.plots.push(Plot::DiscPoints { file: "orbits.svg".into(), title: format!("orbits of {}", ham.label()), series: orbits.clone() });

    out.results = json!({
        "hamiltonian": ham.label(),
        "points": pts.len(),
        "max_area_defect": rep.max_area_defect,
        "rotation": rep.rotation,
        "orbit_lengths": orbits.iter().map(|o| o.len()).collect::<Vec<_>>(),
    });
    Ok(out)
}

fn poincare(p: &PoincareParams, clock: &mut Clock) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let chi = UnitBump::default();
    let mut rows = Vec::new();
    let mut csv = String::from("fixture,n,residual,order_coarse,order_fine,order\n");
    for name in &p.fixtures {
        let f = eta_fixture(name).ok_or_else(|| CliError::field("params.fixtures", format!("unknown fixture {name:?}")))?;
        let (res, supported, integral) = clock.time(&format!("primitive_{name}"), || -> reebcut::Result<_> {
            let eta = f.grid(p.n, EXEC)?.with_rule(p.rule);
            let beta = poincare_primitive(&eta, &chi, EXEC)?;
            let res = primitive_residual(&beta, &eta, EXEC)?;
            Ok((res, beta.dx.compactly_supported && beta.dy.compactly_supported, eta.integral()))
        })?;
        out.checks.push(Check::le(format!("residual_{name}"), res, p.tolerance));
        out.checks.push(Check::eq(format!("compact_support_{name}"), supported as u8 as f64, 1.0));
        let order = if p.order_n > 0 {
            let o = clock.time(&format!("order_{name}"), || residual_order(f, p.order_n, p.order_rule, &chi, EXEC))?;
            out.checks.push(Check::ge(format!("order_{name}"), o.2, p.min_order));
            Some(o)
        } else {
            None
        };
        let (oc, of, oo) = order.map(|o| (o.0.to_string(), o.1.to_string(), o.2.to_string())).unwrap_or_default();
        let _ = writeln!(csv, "{name},{},{res:.17e},{oc},{of},{oo}", p.n);
        rows.push(json!({
            "fixture": name,
            "integral": integral,
            "residual": res,
            "compactly_supported": supported,
            "order": order.map(|o| json!({ "n": p.order_n, "coarse": o.0, "fine": o.1, "observed": o.2 })),
        }));
    }
    out.data.push(DataFile { name: "residuals.csv".into(), contents: csv });
    out.results = json!({ "n": p.n, "rule": p.rule, "fixtures": rows });
    Ok(out)
}

fn moser(p: &MoserParams, clock: &mut Clock) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let (r0, r1) = bump_density_fixture(p.amplitude);
    let res = clock.time("moser_flow", || moser_flow(r0, r1, &UnitBump::default(), &p.settings))?;
    out.checks.push(Check::le("density_residual", res.max_residual, p.tolerance));
    out.checks.push(Check::eq("identity_on_margin", res.boundary_identity_exact as u8 as f64, 1.0));
    let mut csv = String::from("x,y,image_x,image_y,det,residual\n");
    for n in &res.nodes {
        let _ = writeln!(csv, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", n.x, n.y, n.image[0], n.image[1], n.det, n.residual);
    }
    out.data.push(DataFile { name: "moser_nodes.csv".into(), contents: csv });
    out.results = json!({
        "audit_nodes": res.nodes.len(),
        "max_residual": res.max_residual,
        "max_displacement": res.max_displacement,
        "boundary_identity_exact": res.boundary_identity_exact,
    });
    Ok(out)
}

fn pseudorotation(p: &PseudorotationParams, seed: u64, clock: &mut Clock) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let settings = SequenceSettings {
        h: p.h,
        schedule: p.schedule,
        conjugator: p.conjugator,
        scan: p.scan,
        area_grid: p.area_grid,
        contact_grid: p.contact_grid,
        ..Default::default()
    };
    let conv = convergents(p.target_a, p.count)?;
    let (stages, rep) = clock.time("stage_sequence", || stage_sequence(p.target_a, p.count, &settings))?;

    let worst = |f: &dyn Fn(&reebcut::pseudorotation_lab::StageReport) -> f64| rep.stages.iter().map(f).fold(0.0, f64::max);
    out.checks.push(Check::eq("tail_defect", worst(&|s| s.tail_defect), 0.0));
    out.checks.push(Check::le("area_defect", worst(&|s| s.area_defect), 1e-8));
    out.checks.push(Check::gt(
        "contact_min_margin",
        rep.stages.iter().map(|s| s.contact_min_margin).fold(f64::INFINITY, f64::min),
        0.0,
    ));
    out.checks.push(Check::eq("extension_failures", rep.stages.iter().filter(|s| !s.extension_pass).count() as f64, 0.0));
    out.checks.push(Check::le("f0_error", worst(&|s| (s.f0 - s.f0_expected).abs()), p.f0_tol));
    if p.scan.is_some() {
        let missing = rep
            .stages
            .iter()
            .filter(|s| !s.scan.as_ref().is_some_and(|sc| sc.periods.contains(&(s.q as usize))))
            .count();
        out.checks.push(Check::eq("stages_without_period_q", missing as f64, 0.0));
    }

    let mut conj = Vec::new();
    if p.conjugation_points > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_disc_points(&mut rng, p.conjugation_points, 0.95);
        let flow = audit_flow();
        clock.time("conjugation_defect", || -> Result<(), CliError> {
            for st in &stages {
                let phi = Conjugator::new(p.schedule.spec(st.nu), p.conjugator)?;
                conj.push(conjugation_defect(st, &phi, &pts, &flow, EXEC)?);
            }
            Ok(())
        })?;
        out.checks.push(Check::le("conjugation_defect", conj.iter().cloned().fold(0.0, f64::max), p.conjugation_tol));
    }

    let mut csv = String::from("nu,p,q,delta,f0,f0_expected,area_defect,contact_min_margin,smooth_order\n");
    for s in &rep.stages {
        let _ = writeln!(
            csv,
            "{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            s.nu,
            s.p,
            s.q,
            s.delta,
            s.f0,
            s.f0_expected,
            s.area_defect,
            s.contact_min_margin,
            s.smooth_order.map(|k| k.to_string()).unwrap_or_default()
        );
    }
    out.data.push(DataFile { name: "stages.csv".into(), contents: csv });
    if !rep.differences.is_empty() {
        let mut csv = String::from("nu,order,norm\n");
        for (nu, d) in rep.differences.iter().enumerate() {
            for (k, v) in d.iter().enumerate() {
                let _ = writeln!(csv, "{nu},{k},{v:.17e}");
            }
        }
        out.data.push(DataFile { name: "differences.csv".into(), contents: csv });
    }

    let mut stats = serde_json::Value::Null;
    if let (Some(hp), Some(last)) = (p.histogram, stages.last()) {
        let p0 = DiscPoint::new(hp.start[0], hp.start[1]);
        let s = clock.time("orbit_statistics", || {
            orbit_statistics(&last.hamiltonian, p0, hp.iterations, (hp.r_bins, hp.theta_bins), &FlowSettings::with_steps(hp.steps))
        })?;
        if let Some(why) = &s.aborted {
            out.notices.push(format!("orbit statistics ended early: {why}"));
        }
        out.data.push(DataFile { name: "histograms.csv".into(), contents: s.histograms_csv() });
        let nr = s.r_bins.len() as f64;
        out.plots.push(Plot::Bars {
            file: "histogram_r.svg".into(),
            title: format!("radius histogram, stage {}", last.nu),
            x_label: "r".into(),
            bars: s.r_bins.iter().enumerate().map(|(i, c)| (i as f64 / nr, (i + 1) as f64 / nr, *c as f64)).collect(),
        });
        let nt = s.theta_bins.len() as f64;
        out.plots.push(Plot::Bars {
            file: "histogram_theta.svg".into(),
            title: format!("angle histogram, stage {}", last.nu),
            x_label: "θ".into(),
            bars: s.theta_bins.iter().enumerate().map(|(i, c)| (TAU * i as f64 / nt, TAU * (i + 1) as f64 / nt, *c as f64)).collect(),
        });
        stats = serde_json::to_value(&s).unwrap_or_default();
    }

    out.results = json!({
        "convergents": conv,
        "sequence": rep,
        "conjugation_defects": conj,
        "orbit_statistics": stats,
    });
    Ok(out)
}

fn linking(p: &SelfLinkingParams, clock: &mut Clock) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let ham = Hamiltonian::quadratic(p.a0, p.h as f64 - p.a0)?;
    let rep = clock.time("self_linking", || self_linking(p.quotient_spec(), &ham, p.push_eps, p.n_samples, EXEC))?;
    out.checks.push(Check::eq("self_linking", rep.value as f64, p.expected as f64));
    out.data.push(DataFile { name: "curves.csv".into(), contents: rep.curves_csv() });
    out.plots.push(Plot::Curves {
        file: "curves.svg".into(),
        title: "binding and push-off, projected to the xy-plane".into(),
        series: rep.curves.iter().map(|c| c.iter().map(|q| [q[0], q[1]]).collect()).collect(),
    });
    out.results = serde_json::to_value(&rep).unwrap_or_default();
    Ok(out)
}
