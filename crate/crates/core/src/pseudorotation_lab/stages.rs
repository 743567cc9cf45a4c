use super::conjugator::{Conjugator, ConjugatorSettings, ConjugatorSpec};
use crate::cut_binding::{extension_test, BindingChart, ExtensionSettings};
use crate::disc_calculus::{contact_audit, AuditGrid, DiscMap, DiscPoint, Hamiltonian, RotationMap};
use crate::exec::{par_map, Exec};
use crate::isotopy_flow::{periodic_point_scan, polar_points, return_map, FlowSettings, Integrator, ScanSettings};
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

/// R = h + p/q − (p/q) r².
pub fn rigid_rotation_hamiltonian(h: u32, p: i64, q: i64) -> Result<Hamiltonian> {
    Hamiltonian::rigid_rotation(h, p, q)
}

/// Convergents p_k/q_k, k ≥ 1, of the continued fraction of `a`. The zeroth
/// convergent ⌊a⌋ is skipped.
pub fn convergents(a: f64, count: usize) -> Result<Vec<(i64, i64)>> {
    if !a.is_finite() {
        return Err(ReebError::pre("target must be finite"));
    }
    for q in 1..=64i64 {
        let p = (a * q as f64).round();
        if (a - p / q as f64).abs() <= 1e-9 {
            return Err(ReebError::pre(format!("target {a} is within 1e-9 of {p}/{q}; its continued fraction terminates")));
        }
    }
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, a.floor() as i64, 1i64);
    let mut x = a - a.floor();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if x.abs() < 1e-12 {
            return Err(ReebError::pre("continued fraction terminated (rational target)"));
        }
        x = 1.0 / x;
        let t = x.floor();
        x -= t;
        let t = t as i64;
        let (p2, q2) = (t * p1 + p0, t * q1 + q0);
        if q2 > 100_000_000 {
            return Err(ReebError::config(format!(
                "convergent {} needs q > 1e8, beyond what double precision resolves",
                out.len() + 1
            )));
        }
        out.push((p2, q2));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    Ok(out)
}

/// One stage H^ν = R^ν∘φ⁻¹ with its conjugator.
#[derive(Debug, Clone)]
pub struct ApproximationStage {
    pub nu: usize,
    pub h: u32,
    pub p: i64,
    pub q: i64,
    pub delta: f64,
    pub conjugator: Option<ConjugatorSpec>,
    pub rigid: Hamiltonian,
    pub hamiltonian: Hamiltonian,
    /// max |H^ν − R^ν| on samples of r ≥ 1 − δ; exactly 0 when the tail is exact.
    pub tail_defect: f64,
}

impl ApproximationStage {
    pub fn rotation(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

fn tail_defect(stage: &Hamiltonian, rigid: &Hamiltonian, delta: f64) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..=16 {
        let r = (1.0 - delta + delta * j as f64 / 16.0).min(1.0);
        for k in 0..64 {
            let p = DiscPoint::from_polar(r, TAU * k as f64 / 64.0);
            worst = worst.max((stage.value(0.0, p) - rigid.value(0.0, p)).abs());
        }
    }
    worst
}

/// Stage from an arbitrary area-preserving φ given with its inverse and the
/// margin δ on which both are the identity.
pub fn conjugated_stage_with(
    h: u32,
    p: i64,
    q: i64,
    phi: Arc<dyn DiscMap>,
    phi_inv: Arc<dyn DiscMap>,
    delta: f64,
) -> Result<ApproximationStage> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ReebError::config("support margin must lie in (0, 1)"));
    }
    for j in 0..=8 {
        let r = (1.0 - delta + delta * j as f64 / 8.0).min(1.0);
        for k in 0..32 {
            let x = DiscPoint::from_polar(r, TAU * (k as f64 + 0.25) / 32.0);
            let moved = phi.apply(x).dist(x).max(phi_inv.apply(x).dist(x));
            if moved != 0.0 {
                return Err(ReebError::Construction(format!(
                    "conjugator moves the point at r = {r:.4} by {moved:e} inside the margin δ = {delta}"
                )));
            }
        }
    }
    let rigid = rigid_rotation_hamiltonian(h, p, q)?;
    let hamiltonian = Hamiltonian::pullback_by(&rigid, phi_inv, delta)?;
    let tail = tail_defect(&hamiltonian, &rigid, delta);
    Ok(ApproximationStage { nu: 0, h, p, q, delta, conjugator: None, rigid, hamiltonian, tail_defect: tail })
}

/// ψ_ν = φ∘R_{p/q}∘φ⁻¹, generated by H^ν = R^ν∘φ⁻¹.
pub fn conjugated_stage(h: u32, p: i64, q: i64, phi: &Conjugator) -> Result<ApproximationStage> {
    if phi.is_inverse() {
        return Err(ReebError::config("pass the forward conjugator φ, not φ⁻¹"));
    }
    let mut st = conjugated_stage_with(
        h,
        p,
        q,
        Arc::new(phi.clone()),
        Arc::new(phi.inverted()),
        phi.spec.delta,
    )?;
    st.conjugator = Some(phi.spec);
    Ok(st)
}

/// φ∘R_{2πp/q}∘φ⁻¹ evaluated by direct composition.
pub fn composed_return(phi: &Conjugator, p: i64, q: i64, x: DiscPoint) -> DiscPoint {
    let rot = RotationMap { angle: TAU * p as f64 / q as f64 };
    phi.apply(rot.apply(phi.inverted().apply(x)))
}

/// Adaptive RK45 at tolerance 1e-10: stage Hamiltonians are smooth but have
/// large derivatives where the conjugator shears, and fixed steps waste work.
pub fn audit_flow() -> FlowSettings {
    FlowSettings { integrator: Integrator::Rk45, abs_tol: 1e-10, rel_tol: 1e-10, ..FlowSettings::with_steps(1000) }
}

/// max over `points` of |return_map(H^ν)(x) − φ(R(φ⁻¹(x)))|.
pub fn conjugation_defect(
    stage: &ApproximationStage,
    phi: &Conjugator,
    points: &[DiscPoint],
    flow: &FlowSettings,
    exec: Exec,
) -> Result<f64> {
    let d = par_map(exec, points.len(), |i| -> Result<f64> {
        let a = return_map(&stage.hamiltonian, points[i], flow)?;
        Ok(a.dist(composed_return(phi, stage.p, stage.q, points[i])))
    });
    let mut worst = 0.0_f64;
    for v in d {
        worst = worst.max(v?);
    }
    Ok(worst)
}

/// Amplitude A_ν = A₀·ratio^ν, margin δ_ν = δ₀·2^{−ν}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConjugatorSchedule {
    pub amplitude0: f64,
    pub ratio: f64,
    pub delta0: f64,
    pub mode: u32,
    pub phase: f64,
    pub r_in: f64,
}

impl Default for ConjugatorSchedule {
    fn default() -> Self {
        ConjugatorSchedule { amplitude0: 0.15, ratio: 0.5, delta0: 0.3, mode: 1, phase: 0.0, r_in: 0.2 }
    }
}

impl ConjugatorSchedule {
    pub fn spec(&self, nu: usize) -> ConjugatorSpec {
        ConjugatorSpec {
            amplitude: self.amplitude0 * self.ratio.powi(nu as i32),
            delta: self.delta0 * 0.5f64.powi(nu as i32),
            mode: self.mode,
            phase: self.phase,
            r_in: self.r_in,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequenceSettings {
    pub h: u32,
    pub schedule: ConjugatorSchedule,
    pub conjugator: ConjugatorSettings,
    /// Highest derivative order of the stage difference norms (≤ 2).
    pub k_max: usize,
    /// Polar grid (n_r, n_θ) for difference norms.
    pub norm_grid: (usize, usize),
    /// Side of the Cartesian grid for the area audit.
    pub area_grid: usize,
    pub contact_grid: AuditGrid,
    pub extension: ExtensionSettings,
    /// Periodic-point scan per stage; off by default (each stage has period-q points).
    pub scan: Option<ScanSettings>,
    pub scan_seeds: (usize, usize),
    pub flow: FlowSettings,
    pub exec: Exec,
}

impl Default for SequenceSettings {
    fn default() -> Self {
        SequenceSettings {
            h: 2,
            schedule: ConjugatorSchedule::default(),
            conjugator: ConjugatorSettings::default(),
            k_max: 2,
            norm_grid: (16, 32),
            area_grid: 64,
            contact_grid: AuditGrid { n_s: 8, n_r: 24, n_theta: 32 },
            extension: ExtensionSettings { k_max: 2, ..Default::default() },
            scan: None,
            scan_seeds: (3, 8),
            flow: FlowSettings::default(),
            exec: Exec::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub found: usize,
    pub periods: Vec<usize>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub nu: usize,
    pub p: i64,
    pub q: i64,
    pub delta: f64,
    pub conjugator: ConjugatorSpec,
    pub tail_defect: f64,
    pub area_defect: f64,
    pub contact_min_margin: f64,
    pub contact_pass: bool,
    pub extension_pass: bool,
    pub smooth_order: Option<usize>,
    pub f0: f64,
    /// 2(h + p/q)
    pub f0_expected: f64,
    pub scan: Option<ScanSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSequenceReport {
    pub target_a: f64,
    pub h: u32,
    pub stages: Vec<StageReport>,
    /// differences[ν][k] = max |D^k(H^{ν+1} − H^ν)| on the norm grid.
    pub differences: Vec<Vec<f64>>,
    /// 2(h + a), the limit of the f(0) sequence.
    pub f0_limit: f64,
    pub pass: bool,
}

/// max over the grid of |D^k(A − B)| for k = 0..=k_max (entrywise for k ≥ 1).
pub fn difference_norms(a: &Hamiltonian, b: &Hamiltonian, k_max: usize, grid: (usize, usize), exec: Exec) -> Result<Vec<f64>> {
    if k_max > 2 {
        return Err(ReebError::config("difference norms are available up to k = 2"));
    }
    let (n_r, n_t) = grid;
    if n_r < 2 || n_t < 4 {
        return Err(ReebError::config("norm grid needs n_r ≥ 2 and n_θ ≥ 4"));
    }
    let rows = par_map(exec, n_r, |j| {
        let r = j as f64 / (n_r - 1) as f64;
        let mut out = vec![0.0_f64; k_max + 1];
        for k in 0..n_t {
            let p = DiscPoint::from_polar(r, TAU * k as f64 / n_t as f64);
            out[0] = out[0].max((a.value(0.0, p) - b.value(0.0, p)).abs());
            if k_max >= 1 {
                let (ga, gb) = (a.gradient(0.0, p), b.gradient(0.0, p));
                out[1] = out[1].max((ga[0] - gb[0]).abs()).max((ga[1] - gb[1]).abs());
            }
            if k_max >= 2 {
                let (ha, hb) = (a.hessian(0.0, p), b.hessian(0.0, p));
                for c in 0..3 {
                    out[2] = out[2].max((ha[c] - hb[c]).abs());
                }
            }
        }
        out
    });
    let mut out = vec![0.0_f64; k_max + 1];
    for row in rows {
        for (o, v) in out.iter_mut().zip(row) {
            *o = o.max(v);
        }
    }
    Ok(out)
}

fn stage_report(stage: &ApproximationStage, phi: &Conjugator, settings: &SequenceSettings) -> Result<StageReport> {
    let inner = Exec::Sequential;
    let area_defect = phi.area_defect(settings.area_grid, inner);
    let contact = contact_audit(&stage.hamiltonian, settings.contact_grid, inner)?;
    let chart = BindingChart::with_default_collar(stage.h)?;
    let ext = extension_test(
        &stage.hamiltonian,
        &chart,
        &ExtensionSettings { expected_a: Some(stage.rotation()), exec: inner, ..settings.extension },
    )?;
    let scan = match settings.scan {
        None => None,
        Some(sc) => {
            let seeds = polar_points(settings.scan_seeds.0, settings.scan_seeds.1, 0.9);
            let recs = periodic_point_scan(&stage.hamiltonian, &seeds, &sc, &FlowSettings { exec: inner, ..settings.flow })?;
            let mut periods: Vec<usize> = recs.iter().map(|r| r.period).collect();
            periods.sort_unstable();
            periods.dedup();
            Some(ScanSummary {
                found: recs.len(),
                periods,
                max_residual: recs.iter().map(|r| r.residual).fold(0.0, f64::max),
            })
        }
    };
    Ok(StageReport {
        nu: stage.nu,
        p: stage.p,
        q: stage.q,
        delta: stage.delta,
        conjugator: phi.spec,
        tail_defect: stage.tail_defect,
        area_defect,
        contact_min_margin: contact.min_margin,
        contact_pass: contact.pass,
        extension_pass: ext.pass,
        smooth_order: ext.smooth_order,
        f0: ext.f0_mean,
        f0_expected: 2.0 * (stage.h as f64 + stage.rotation()),
        scan,
    })
}

/// Builds `count` stages over the continued-fraction convergents of `target_a`
/// and audits each; stages run in parallel and are reported in ν order.
pub fn stage_sequence(target_a: f64, count: usize, settings: &SequenceSettings) -> Result<(Vec<ApproximationStage>, StageSequenceReport)> {
    if count == 0 {
        return Err(ReebError::config("stage count must be positive"));
    }
    let h = settings.h;
    if h < 1 || !(h as f64 + target_a > 0.0) {
        return Err(ReebError::pre(format!("need h ≥ 1 and h + a > 0 (h = {h}, a = {target_a})")));
    }
    let conv = convergents(target_a, count)?;
    let built = par_map(settings.exec, count, |nu| -> Result<(ApproximationStage, StageReport)> {
        let (p, q) = conv[nu];
        let phi = Conjugator::new(settings.schedule.spec(nu), settings.conjugator)?;
        let mut st = conjugated_stage(h, p, q, &phi)?;
        st.nu = nu;
        let rep = stage_report(&st, &phi, settings)?;
        Ok((st, rep))
    });
    let mut stages = Vec::with_capacity(count);
    let mut reports = Vec::with_capacity(count);
    for b in built {
        let (s, r) = b?;
        stages.push(s);
        reports.push(r);
    }
    let diffs = par_map(settings.exec, count.saturating_sub(1), |nu| {
        difference_norms(&stages[nu + 1].hamiltonian, &stages[nu].hamiltonian, settings.k_max, settings.norm_grid, Exec::Sequential)
    });
    let differences = diffs.into_iter().collect::<Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.tail_defect == 0.0 && r.contact_pass && r.extension_pass && r.area_defect <= 1e-8);
    let report = StageSequenceReport {
        target_a,
        h,
        stages: reports,
        differences,
        f0_limit: 2.0 * (h as f64 + target_a),
        pass,
    };
    Ok((stages, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigid_values() {
        let r = rigid_rotation_hamiltonian(2, 1, 3).unwrap();
        assert_eq!(r.value(0.0, DiscPoint::new(1.0, 0.0)), 2.0);
        assert!((r.value(0.0, DiscPoint::ORIGIN) - 7.0 / 3.0).abs() < 1e-15);
        assert!(rigid_rotation_hamiltonian(1, -3, 2).is_err());
    }

    #[test]
    fn golden_convergents() {
        let g = 2.0 / (1.0 + 5f64.sqrt());
        let c = convergents(g, 5).unwrap();
        assert_eq!(c, vec![(1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]);
        let c = convergents(2f64.sqrt(), 4).unwrap();
        assert_eq!(c, vec![(3, 2), (7, 5), (17, 12), (41, 29)]);
        assert!(convergents(0.375, 3).is_err());
        assert!(convergents(g, 60).is_err());
    }

    #[test]
    fn identity_stage_is_the_rotation() {
        let phi = Conjugator::identity();
        let st = conjugated_stage(2, 1, 3, &phi).unwrap();
        assert_eq!(st.tail_defect, 0.0);
        let p = DiscPoint::new(0.4, 0.1);
        let q = return_map(&st.hamiltonian, p, &FlowSettings { exec: Exec::Sequential, ..Default::default() }).unwrap();
        assert!(q.dist(p.rotated(TAU / 3.0)) < 1e-9);
    }

    #[test]
    fn zero_amplitude_sequence_differences_are_closed_form() {
        let g = 2.0 / (1.0 + 5f64.sqrt());
        let settings = SequenceSettings {
            schedule: ConjugatorSchedule { amplitude0: 0.0, ..Default::default() },
            area_grid: 16,
            exec: Exec::Sequential,
            extension: ExtensionSettings { k_max: 2, exec: Exec::Sequential, ..Default::default() },
            ..Default::default()
        };
        let (_, rep) = stage_sequence(g, 4, &settings).unwrap();
        assert!(rep.pass);
        let c = convergents(g, 4).unwrap();
        for (nu, d) in rep.differences.iter().enumerate() {
            let dc = (c[nu + 1].0 as f64 / c[nu + 1].1 as f64 - c[nu].0 as f64 / c[nu].1 as f64).abs();
            assert!((d[0] - dc).abs() < 1e-12, "{d:?} {dc}");
            assert!((d[1] - 2.0 * dc).abs() < 1e-9, "{d:?} {dc}");
            assert!((d[2] - 2.0 * dc).abs() < 1e-6, "{d:?} {dc}");
        }
        for s in &rep.stages {
            assert!((s.f0 - s.f0_expected).abs() < 1e-6, "{} {}", s.f0, s.f0_expected);
        }
    }

    #[test]
    fn conjugation_matches_direct_composition() {
        let pts: Vec<DiscPoint> = (0..12).map(|i| DiscPoint::from_polar(0.08 * i as f64, 0.9 * i as f64)).collect();
        for spec in crate::pseudorotation_lab::fixture_conjugators() {
            let phi = Conjugator::new(spec, ConjugatorSettings::default()).unwrap();
            let st = conjugated_stage(2, 1, 3, &phi).unwrap();
            assert_eq!(st.tail_defect, 0.0);
            let flow = FlowSettings { exec: Exec::Sequential, ..audit_flow() };
            let d = conjugation_defect(&st, &phi, &pts, &flow, Exec::Sequential).unwrap();
            assert!(d <= 1e-6, "{spec:?} {d:e}");
        }
    }

    #[test]
    fn geometric_schedule_differences_decay() {
        let g = 2.0 / (1.0 + 5f64.sqrt());
        let settings = SequenceSettings {
            area_grid: 16,
            exec: Exec::Sequential,
            extension: ExtensionSettings { k_max: 2, exec: Exec::Sequential, ..Default::default() },
            ..Default::default()
        };
        let (_, rep) = stage_sequence(g, 5, &settings).unwrap();
        assert!(rep.pass, "{:?}", rep.stages);
        for w in rep.differences.windows(2) {
            assert!(w[1][0] <= 0.75 * w[0][0], "{:?}", rep.differences);
        }
    }

    #[test]
    fn rational_target_rejected() {
        assert!(stage_sequence(0.5, 3, &SequenceSettings::default()).is_err());
        let s = SequenceSettings { h: 1, ..Default::default() };
        assert!(stage_sequence(-1.5 - 1e-3 * 2f64.sqrt(), 3, &s).is_err());
    }
}
