//! Strict run configuration. Parsing happens in two passes: the envelope
//! (`scenario`, `params`, `seed`, `output`) and then the scenario block, whose
//! missing required fields are all reported at once with their paths.

use crate::CliError;
use reebcut::cut_binding::{BindingChart, ExtensionSettings, QuotientMapSpec};
use reebcut::disc_calculus::AuditGrid;
use reebcut::invariants::{RotationSettings, DEGENERACY_TOL};
use reebcut::isotopy_flow::{FlowSettings, ScanSettings};
use reebcut::moser_generator::{EtaFixture, MoserSettings, QuadratureRule};
use reebcut::pseudorotation_lab::{convergents, ConjugatorSchedule, ConjugatorSettings};
use reebcut::{Hamiltonian, ReebError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Ellipsoid,
    CutCheck,
    ReturnMap,
    PoincareLemma,
    Moser,
    Pseudorotation,
    SelfLinking,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Ellipsoid => "ellipsoid",
            Scenario::CutCheck => "cut-check",
            Scenario::ReturnMap => "return-map",
            Scenario::PoincareLemma => "poincare-lemma",
            Scenario::Moser => "moser",
            Scenario::Pseudorotation => "pseudorotation",
            Scenario::SelfLinking => "self-linking",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Used when `--out` is not given.
    pub dir: Option<String>,
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, csv: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::field("config", e))
    }

    /// Parses and validates the scenario block.
    pub fn prepare(&self) -> Result<Prepared, CliError> {
        let p = &self.params;
        Ok(match self.scenario {
            Scenario::Ellipsoid => Prepared::Ellipsoid(parse_block::<EllipsoidParams>(p, &["a0", "h"])?.checked()?),
            Scenario::CutCheck => Prepared::CutCheck(parse_block::<CutCheckParams>(p, &["hamiltonian"])?.checked()?),
            Scenario::ReturnMap => Prepared::ReturnMap(parse_block::<ReturnMapParams>(p, &["hamiltonian"])?.checked()?),
            Scenario::PoincareLemma => Prepared::PoincareLemma(parse_block::<PoincareParams>(p, &["n"])?.checked()?),
            Scenario::Moser => Prepared::Moser(parse_block::<MoserParams>(p, &["amplitude"])?.checked()?),
            Scenario::Pseudorotation => {
                Prepared::Pseudorotation(parse_block::<PseudorotationParams>(p, &["target_a", "count"])?.checked()?)
            }
            Scenario::SelfLinking => Prepared::SelfLinking(parse_block::<SelfLinkingParams>(p, &["a0", "h"])?.checked()?),
        })
    }
}

fn parse_block<T: DeserializeOwned>(v: &Value, required: &[&str]) -> Result<T, CliError> {
    let Some(obj) = v.as_object() else {
        return Err(CliError::field("params", "must be a JSON object"));
    };
    let missing: Vec<String> =
        required.iter().filter(|k| !obj.contains_key(**k)).map(|k| format!("params.{k}: missing required field")).collect();
    if !missing.is_empty() {
        return Err(CliError::Validation(missing));
    }
    serde_json::from_value(v.clone()).map_err(|e| CliError::field("params", e))
}

/// Collects validation messages keyed by field path.
#[derive(Default)]
struct Errs(Vec<String>);

impl Errs {
    fn check(&mut self, ok: bool, path: &str, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(format!("{path}: {}", msg()));
        }
    }

    fn lib(&mut self, path: &str, r: reebcut::Result<()>) {
        if let Err(e) = r {
            self.0.push(format!("{path}: {e}"));
        }
    }

    fn finish<T>(self, v: T) -> Result<T, CliError> {
        if self.0.is_empty() {
            Ok(v)
        } else {
            Err(CliError::Validation(self.0))
        }
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Built-in Hamiltonians selectable from a config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    /// a0 + a2 r², with a0 + a2 a positive integer
    Quadratic { a0: f64, a2: f64 },
    /// h + p/q − (p/q) r²
    RigidRotation { h: u32, p: i64, q: i64 },
    /// h + (1 − r²)(c + d cos θ)
    AngularCollar { h: u32, c: f64, d: f64 },
    Constant { h: u32 },
}

impl HamiltonianSpec {
    pub fn build(&self) -> reebcut::Result<Hamiltonian> {
        match *self {
            HamiltonianSpec::Quadratic { a0, a2 } => {
                if !(a0.is_finite() && a2.is_finite()) {
                    return Err(ReebError::Precondition("coefficients must be finite".into()));
                }
                Hamiltonian::quadratic(a0, a2)
            }
            HamiltonianSpec::RigidRotation { h, p, q } => Hamiltonian::rigid_rotation(h, p, q),
            HamiltonianSpec::AngularCollar { h, c, d } => {
                if !(c.is_finite() && d.is_finite()) {
                    return Err(ReebError::Precondition("coefficients must be finite".into()));
                }
                Hamiltonian::angular_collar(h, c, d)
            }
            HamiltonianSpec::Constant { h } => Hamiltonian::constant(h),
        }
    }

    /// Rotation of the time-2π map about the origin in turns, when the map
    /// is a rigid rotation.
    pub fn exact_rotation(&self) -> Option<f64> {
        match *self {
            HamiltonianSpec::Quadratic { a2, .. } => Some(-a2),
            HamiltonianSpec::RigidRotation { p, q, .. } => Some(p as f64 / q as f64),
            HamiltonianSpec::AngularCollar { c, d, .. } if d == 0.0 => Some(c),
            HamiltonianSpec::Constant { .. } => Some(0.0),
            _ => None,
        }
    }

    fn validated(&self, path: &str, errs: &mut Errs) -> Option<Hamiltonian> {
        match self.build() {
            Ok(h) if h.h() >= 1 => Some(h),
            Ok(_) => {
                errs.check(false, path, || "boundary value h must be at least 1".into());
                None
            }
            Err(e) => {
                errs.check(false, path, || e.to_string());
                None
            }
        }
    }
}

fn check_flow(errs: &mut Errs, path: &str, f: &FlowSettings) {
    errs.lib(path, f.validate());
}

fn check_extension(errs: &mut Errs, path: &str, st: &ExtensionSettings, chart: Option<&BindingChart>) {
    match chart {
        Some(c) => errs.lib(path, st.validate(c)),
        None => errs.check(false, path, || "no valid binding chart".into()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipsoidParams {
    pub a0: f64,
    pub h: u32,
    #[serde(default = "d_pullback_n")]
    pub pullback_n: usize,
    #[serde(default = "d_1e6")]
    pub pullback_tol: f64,
    /// Compare closed-form rotation numbers with integrated ones.
    #[serde(default = "d_true")]
    pub numeric_rotation: bool,
    #[serde(default)]
    pub rotation: RotationSettings,
    #[serde(default = "d_rotation_tol")]
    pub rotation_tol: f64,
    #[serde(default = "d_extension")]
    pub extension: ExtensionSettings,
}

fn d_pullback_n() -> usize {
    32
}
fn d_1e6() -> f64 {
    1e-6
}
fn d_true() -> bool {
    true
}
fn d_rotation_tol() -> f64 {
    0.02
}
fn d_extension() -> ExtensionSettings {
    ExtensionSettings { k_max: 2, ..Default::default() }
}

fn nondegenerate(x: f64) -> bool {
    (x - x.round()).abs() > DEGENERACY_TOL
}

impl EllipsoidParams {
    fn checked(self) -> Result<Self, CliError> {
        let mut e = Errs::default();
        e.check(positive(self.a0), "params.a0", || format!("must be a positive finite number (got {})", self.a0));
        e.check(self.h >= 1, "params.h", || "must be at least 1".into());
        if positive(self.a0) {
            e.check(nondegenerate(self.a0) && nondegenerate(1.0 / self.a0), "params.a0", || {
                format!("a0 = {} makes an orbit degenerate (a0 or 1/a0 is an integer)", self.a0)
            });
        }
        e.check((2..=512).contains(&self.pullback_n), "params.pullback_n", || "must lie in [2, 512]".into());
        e.check(positive(self.pullback_tol), "params.pullback_tol", || "must be positive".into());
        e.check(positive(self.rotation_tol), "params.rotation_tol", || "must be positive".into());
        e.check(self.rotation.covers >= 1, "params.rotation.covers", || "must be at least 1".into());
        check_flow(&mut e, "params.rotation.flow", &self.rotation.flow);
        let chart = BindingChart::with_default_collar(self.h.max(1)).ok();
        check_extension(&mut e, "params.rotation.extension", &self.rotation.extension, chart.as_ref());
        check_extension(&mut e, "params.extension", &self.extension, chart.as_ref());
        e.finish(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutCheckParams {
    pub hamiltonian: HamiltonianSpec,
    #[serde(default)]
    pub extension: ExtensionSettings,
    /// Collar width ε of the binding chart; the library default when absent.
    #[serde(default)]
    pub collar: Option<f64>,
    #[serde(default)]
    pub contact_grid: AuditGrid,
    /// Expected limit rotation a, when known.
    #[serde(default)]
    pub expected_a: Option<f64>,
}

impl CutCheckParams {
    pub fn chart(&self, h: u32) -> reebcut::Result<BindingChart> {
        match self.collar {
            Some(eps) => BindingChart::new(h, eps),
            None => BindingChart::with_default_collar(h),
        }
    }

    fn checked(self) -> Result<Self, CliError> {
        let mut e = Errs::default();
        let ham = self.hamiltonian.validated("params.hamiltonian", &mut e);
        if let Some(h) = &ham {
            match self.chart(h.h()) {
                Ok(c) => check_extension(&mut e, "params.extension", &self.extension, Some(&c)),
                Err(err) => e.check(false, "params.collar", || err.to_string()),
            }
        }
        e.lib("params.contact_grid", self.contact_grid.validate());
        if let Some(a) = self.expected_a {
            e.check(a.is_finite(), "params.expected_a", || "must be finite".into());
        }
        e.finish(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolarGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub r_max: f64,
}

impl Default for PolarGrid {
    fn default() -> Self {
        PolarGrid { n_r: 3, n_theta: 8, r_max: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReturnMapParams {
    pub hamiltonian: HamiltonianSpec,
    #[serde(default)]
    pub grid: PolarGrid,
    /// Extra audit points drawn uniformly from the disc with the run seed.
    #[serde(default = "d_random_points")]
    pub random_points: usize,
    #[serde(default = "d_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "d_n_theta")]
    pub n_theta: usize,
    /// Orbit trace start points as [x, y].
    #[serde(default = "d_orbit_starts")]
    pub orbit_starts: Vec<[f64; 2]>,
    #[serde(default = "d_orbit_iterations")]
    pub orbit_iterations: usize,
    #[serde(default)]
    pub flow: FlowSettings,
    #[serde(default = "d_1e6")]
    pub area_tol: f64,
    #[serde(default = "d_drift_tol")]
    pub drift_tol: f64,
    /// Rotation in turns; defaults to the closed form for rigid Hamiltonians.
    #[serde(default)]
    pub expected_rotation: Option<f64>,
    #[serde(default = "d_drift_tol")]
    pub rotation_tol: f64,
}

fn d_random_points() -> usize {
    16
}
fn d_radii() -> Vec<f64> {
    vec![0.3, 0.6, 0.9]
}
fn d_n_theta() -> usize {
    16
}
fn d_orbit_starts() -> Vec<[f64; 2]> {
    vec![[0.5, 0.0], [0.8, 0.0]]
}
fn d_orbit_iterations() -> usize {
    64
}
fn d_drift_tol() -> f64 {
    1e-8
}

impl ReturnMapParams {
    fn checked(self) -> Result<Self, CliError> {
        let mut e = Errs::default();
        self.hamiltonian.validated("params.hamiltonian", &mut e);
        let g = self.grid;
        e.check(g.n_r >= 1 && g.n_theta >= 1, "params.grid", || "n_r and n_theta must be at least 1".into());
        e.check(g.r_max > 0.0 && g.r_max <= 1.0, "params.grid.r_max", || format!("must lie in (0, 1] (got {})", g.r_max));
        e.check(self.random_points <= 100_000, "params.random_points", || "at most 100000".into());
        for (i, r) in self.radii.iter().enumerate() {
            e.check(*r >= 0.0 && *r <= 1.0, &format!("params.radii[{i}]"), || format!("{r} is outside [0, 1]"));
        }
        e.check(self.n_theta >= 1, "params.n_theta", || "must be at least 1".into());
        for (i, p) in self.orbit_starts.iter().enumerate() {
            let r = p[0].hypot(p[1]);
            e.check(r <= 1.0, &format!("params.orbit_starts[{i}]"), || format!("radius {r} is outside the disc"));
        }
        e.check(self.orbit_iterations <= 100_000, "params.orbit_iterations", || "at most 100000".into());
        check_flow(&mut e, "params.flow", &self.flow);
        e.check(positive(self.area_tol), "params.area_tol", || "must be positive".into());
        e.check(positive(self.drift_tol), "params.drift_tol", || "must be positive".into());
        e.check(positive(self.rotation_tol), "params.rotation_tol", || "must be positive".into());
        if let Some(x) = self.expected_rotation {
            e.check(x.is_finite(), "params.expected_rotation", || "must be finite".into());
        }
        e.finish(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareParams {
    pub n: usize,
    #[serde(default = "d_fixtures")]
    pub fixtures: Vec<String>,
    #[serde(default = "d_rule")]
    pub rule: QuadratureRule,
    /// Rule for the order estimate; the cubic rule keeps the fine residual
    /// above rounding level.
    #[serde(default = "d_order_rule")]
    pub order_rule: QuadratureRule,
    #[serde(default = "d_1e6")]
    pub tolerance: f64,
    /// Coarse size of the nested-grid order estimate; 0 disables it.
    #[serde(default = "d_order_n")]
    pub order_n: usize,
    #[serde(default = "d_min_order")]
    pub min_order: f64,
}

fn d_fixtures() -> Vec<String> {
    EtaFixture::ALL.iter().map(|f| f.name().to_string()).collect()
}
fn d_rule() -> QuadratureRule {
    QuadratureRule::Quintic6
}
fn d_order_rule() -> QuadratureRule {
    QuadratureRule::Cubic4
}
fn d_order_n() -> usize {
    65
}
fn d_min_order() -> f64 {
    2.0
}

pub fn eta_fixture(name: &str) -> Option<EtaFixture> {
    EtaFixture::ALL.into_iter().find(|f| f.name() == name)
}

impl PoincareParams {
    fn checked(self) -> Result<Self, CliError> {
        let mut e = Errs::default();
        e.check((16..=2048).contains(&self.n), "params.n", || format!("must lie in [16, 2048] (got {})", self.n));
        e.check(!self.fixtures.is_empty(), "params.fixtures", || "must name at least one fixture".into());
        for (i, f) in self.fixtures.iter().enumerate() {
            e.check(eta_fixture(f).is_some(), &format!("params.fixtures[{i}]"), || {
                format!("unknown fixture {f:?}; expected one of {}", d_fixtures().join(", "))
            });
        }
        e.check(positive(self.tolerance), "params.tolerance", || "must be positive".into());
        e.check(self.order_n == 0 || (16..=1025).contains(&self.order_n), "params.order_n", || "must be 0 or lie in [16, 1025]".into());
        e.check(self.min_order.is_finite(), "params.min_order", || "must be finite".into());
        e.finish(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoserParams {
    /// ρ₁ = 1 + amplitude·g for the zero-integral fixture g.
    pub amplitude: f64,
    #[serde(default)]
    pub settings: MoserSettings,
    #[serde(default = "d_1e5")]
    pub tolerance: f64,
}

fn d_1e5() -> f64 {
    1e-5
}

impl MoserParams {
    fn checked(self) -> Result<Self, CliError> {
        let mut e = Errs::default();
        e.check(self.amplitude.is_finite(), "params.amplitude", || "must be finite".into());
        if self.amplitude.is_finite() {
            // ρ₁ must stay positive; sample the fixture on a fine grid.
            let n = 200;
            let mut gmin = 0.0_f64;
            let mut gmax = 0.0_f64;
            for i in 0..=n {
                for j in 0..=n {
                    let g = EtaFixture::TranslatedPair.eval(i as f64 / n as f64, j as f64 / n as f64);
                    gmin = gmin.min(g);
                    gmax = gmax.max(g);
                }
            }
            let lowest = 1.0 + (self.amplitude * gmin).min(self.amplitude * gmax);
            e.check(lowest > 0.05, "params.amplitude", || {
                format!("target density reaches {lowest:.3}; it must stay above 0.05")
            });
        }
        e.lib("params.settings", self.settings.validate());
        e.check(positive(self.tolerance), "params.tolerance", || "must be positive".into());
        e.finish(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HistogramParams {
    pub start: [f64; 2],
    pub iterations: usize,
    pub r_bins: usize,
    pub theta_bins: usize,
    /// RK4 steps per return map.
    pub steps: usize,
}

impl Default for HistogramParams {
    fn default() -> Self {
        HistogramParams { start: [0.65, 0.0], iterations: 100, r_bins: 10, theta_bins: 32, steps: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudorotationParams {
    pub target_a: f64,
    pub count: usize,
    #[serde(default = "d_h")]
    pub h: u32,
    #[serde(default)]
    pub schedule: ConjugatorSchedule,
    #[serde(default)]
    pub conjugator: ConjugatorSettings,
    #[serde(default)]
    pub scan: Option<ScanSettings>,
    #[serde(default = "d_area_grid")]
    pub area_grid: usize,
    #[serde(default = "d_stage_contact_grid")]
    pub contact_grid: AuditGrid,
    /// Random points (seeded) for the conjugation check on every stage.
    #[serde(default = "d_conjugation_points")]
    pub conjugation_points: usize,
    #[serde(default = "d_1e6")]
    pub conjugation_tol: f64,
    #[serde(default = "d_f0_tol")]
    pub f0_tol: f64,
    /// Orbit histogram on the last stage; null disables it.
    #[serde(default = "d_histogram")]
    pub histogram: Option<HistogramParams>,
}

fn d_h() -> u32 {
    2
}
fn d_area_grid() -> usize {
    64
}
fn d_stage_contact_grid() -> AuditGrid {
    AuditGrid { n_s: 8, n_r: 24, n_theta: 32 }
}
fn d_conjugation_points() -> usize {
    20
}
fn d_f0_tol() -> f64 {
    1e-8
}
fn d_histogram() -> Option<HistogramParams> {
    Some(HistogramParams::default())
}

impl PseudorotationParams {
    fn checked(self) -> Result<Self, CliError> {
        let mut e = Errs::default();
        e.check(self.target_a.is_finite(), "params.target_a", || "must be finite".into());
        e.check((1..=40).contains(&self.count), "params.count", || format!("must lie in [1, 40] (got {})", self.count));
        e.check(self.h >= 1, "params.h", || "must be at least 1".into());
        e.check(self.h as f64 + self.target_a > 0.0, "params.target_a", || {
            format!("h + target_a = {} must be positive", self.h as f64 + self.target_a)
        });
        if self.target_a.is_finite() && (1..=40).contains(&self.count) {
            e.lib("params.target_a", convergents(self.target_a, self.count).map(|_| ()));
        }
        for nu in 0..self.count.min(40) {
            if let Err(err) = self.schedule.spec(nu).validate() {
                e.check(false, "params.schedule", || format!("stage {nu}: {err}"));
                break;
            }
        }
        if let Some(s) = &self.scan {
            e.check(s.max_period >= 1, "params.scan.max_period", || "must be at least 1".into());
            e.check(positive(s.tol), "params.scan.tol", || "must be positive".into());
        }
        e.check(self.area_grid >= 4, "params.area_grid", || "must be at least 4".into());
        e.lib("params.contact_grid", self.contact_grid.validate());
        e.check(self.conjugation_points <= 10_000, "params.conjugation_points", || "at most 10000".into());
        e.check(positive(self.conjugation_tol), "params.conjugation_tol", || "must be positive".into());
        e.check(positive(self.f0_tol), "params.f0_tol", || "must be positive".into());
        if let Some(hp) = &self.histogram {
            e.check(hp.start[0].hypot(hp.start[1]) <= 1.0, "params.histogram.start", || "outside the disc".into());
            e.check(hp.r_bins >= 1 && hp.theta_bins >= 1, "params.histogram", || "bins must be at least 1".into());
            e.check(hp.steps >= 16, "params.histogram.steps", || "must be at least 16".into());
            e.check(hp.iterations <= 1_000_000, "params.histogram.iterations", || "at most 1000000".into());
        }
        e.finish(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuotientKind {
    Hemisphere,
    Stereographic,
    Ellipsoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfLinkingParams {
    pub a0: f64,
    pub h: u32,
    #[serde(default = "d_push_eps")]
    pub push_eps: f64,
    #[serde(default = "d_n_samples")]
    pub n_samples: usize,
    #[serde(default = "d_quotient")]
    pub quotient: QuotientKind,
    #[serde(default = "d_expected_sl")]
    pub expected: i64,
}

fn d_push_eps() -> f64 {
    0.02
}
fn d_n_samples() -> usize {
    512
}
fn d_quotient() -> QuotientKind {
    QuotientKind::Ellipsoid
}
fn d_expected_sl() -> i64 {
    -1
}

impl SelfLinkingParams {
    pub fn quotient_spec(&self) -> QuotientMapSpec {
        match self.quotient {
            QuotientKind::Hemisphere => QuotientMapSpec::Hemisphere { h: self.h },
            QuotientKind::Stereographic => QuotientMapSpec::Stereographic { h: self.h },
            QuotientKind::Ellipsoid => QuotientMapSpec::Ellipsoid { h: self.h, a0: self.a0 },
        }
    }

    fn checked(self) -> Result<Self, CliError> {
        let mut e = Errs::default();
        e.check(positive(self.a0), "params.a0", || format!("must be a positive finite number (got {})", self.a0));
        e.check(self.h >= 1, "params.h", || "must be at least 1".into());
        e.check((1e-3..=1e-1).contains(&self.push_eps), "params.push_eps", || "must lie in [1e-3, 1e-1]".into());
        e.check((16..=1 << 16).contains(&self.n_samples), "params.n_samples", || "must lie in [16, 65536]".into());
        e.finish(self)
    }
}

/// A configuration whose scenario block has been parsed and validated.
#[derive(Debug, Clone)]
pub enum Prepared {
    Ellipsoid(EllipsoidParams),
    CutCheck(CutCheckParams),
    ReturnMap(ReturnMapParams),
    PoincareLemma(PoincareParams),
    Moser(MoserParams),
    Pseudorotation(PseudorotationParams),
    SelfLinking(SelfLinkingParams),
}

impl Prepared {
    /// The scenario block with defaults filled in, for the report.
    pub fn resolved(&self) -> Value {
        let v = match self {
            Prepared::Ellipsoid(p) => serde_json::to_value(p),
            Prepared::CutCheck(p) => serde_json::to_value(p),
            Prepared::ReturnMap(p) => serde_json::to_value(p),
            Prepared::PoincareLemma(p) => serde_json::to_value(p),
            Prepared::Moser(p) => serde_json::to_value(p),
            Prepared::Pseudorotation(p) => serde_json::to_value(p),
            Prepared::SelfLinking(p) => serde_json::to_value(p),
        };
        v.unwrap_or(Value::Null)
    }
}
