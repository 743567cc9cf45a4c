use crate::disc_calculus::{BumpGenerator, BumpProfile, DiscMap, DiscPoint, Hamiltonian};
use crate::exec::{par_map, Exec};
use crate::linalg::Mat2;
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};

/// Generator F = A·b(r)·cos(kθ + φ₀) of a conjugator, supported in r ≤ 1 − δ.
/// Angular modes k ≥ 1 use an annular profile starting at `r_in`; k = 0 uses a
/// centered bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugatorSpec {
    pub amplitude: f64,
    pub delta: f64,
    pub mode: u32,
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "default_r_in")]
    pub r_in: f64,
}

fn default_r_in() -> f64 {
    0.1
}

impl ConjugatorSpec {
    pub fn new(amplitude: f64, delta: f64, mode: u32) -> Self {
        ConjugatorSpec { amplitude, delta, mode, phase: 0.0, r_in: default_r_in() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || !self.phase.is_finite() {
            return Err(ReebError::config("conjugator amplitude and phase must be finite"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ReebError::config(format!("support margin δ = {} must lie in (0, 1)", self.delta)));
        }
        if self.mode > 0 && !(self.r_in >= 0.0 && self.r_in < 1.0 - self.delta) {
            return Err(ReebError::config(format!("inner radius {} must lie below 1 − δ = {}", self.r_in, 1.0 - self.delta)));
        }
        Ok(())
    }

    pub fn profile(&self) -> BumpProfile {
        let r_out = 1.0 - self.delta;
        if self.mode == 0 {
            BumpProfile::Centered { r_out }
        } else {
            BumpProfile::Annular { r_in: self.r_in, r_out }
        }
    }

    pub fn generator(&self) -> Result<Hamiltonian> {
        self.validate()?;
        Hamiltonian::bump_generator(BumpGenerator::autonomous(self.amplitude, self.profile(), self.mode, self.phase))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConjugatorSettings {
    /// Implicit midpoint steps for the unit-time flow.
    pub steps: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for ConjugatorSettings {
    fn default() -> Self {
        ConjugatorSettings { steps: 16, newton_tol: 1e-15, newton_max_iter: 30 }
    }
}

/// Time-1 map of X_F, integrated with the implicit midpoint rule. The rule is
/// symplectic and symmetric, so the discrete map is area-preserving and its
/// inverse is the same rule run backwards.
#[derive(Debug, Clone)]
pub struct Conjugator {
    pub spec: ConjugatorSpec,
    pub settings: ConjugatorSettings,
    generator: Hamiltonian,
    time: f64,
}

impl Conjugator {
    pub fn new(spec: ConjugatorSpec, settings: ConjugatorSettings) -> Result<Self> {
        if settings.steps == 0 || settings.newton_max_iter == 0 || !(settings.newton_tol > 0.0) {
            return Err(ReebError::config("conjugator needs steps ≥ 1 and a positive Newton tolerance"));
        }
        Ok(Conjugator { spec, settings, generator: spec.generator()?, time: 1.0 })
    }

    pub fn identity() -> Self {
        Self::new(ConjugatorSpec::new(0.0, 0.5, 0), ConjugatorSettings::default()).expect("valid identity spec")
    }

    /// φ⁻¹ as a conjugator in its own right.
    pub fn inverted(&self) -> Self {
        Conjugator { time: -self.time, ..self.clone() }
    }

    pub fn is_inverse(&self) -> bool {
        self.time < 0.0
    }

    /// Radius beyond which the map is the identity.
    pub fn support_radius(&self) -> f64 {
        1.0 - self.spec.delta
    }

    fn field(&self, p: [f64; 2]) -> ([f64; 2], Mat2) {
        let q = DiscPoint::new(p[0], p[1]);
        let g = self.generator.gradient(0.0, q);
        if g[0] == 0.0 && g[1] == 0.0 && q.r() >= self.support_radius() {
            return ([0.0, 0.0], Mat2::new(0.0, 0.0, 0.0, 0.0));
        }
        let hs = self.generator.hessian(0.0, q);
        ([0.5 * g[1], -0.5 * g[0]], Mat2::new(0.5 * hs[1], 0.5 * hs[2], -0.5 * hs[0], -0.5 * hs[1]))
    }

    /// One implicit midpoint step y₁ = y₀ + h X((y₀ + y₁)/2) and its exact
    /// Jacobian (I − hA/2)⁻¹(I + hA/2).
    fn step(&self, y0: [f64; 2], h: f64) -> ([f64; 2], Mat2) {
        let (x0, _) = self.field(y0);
        if x0 == [0.0, 0.0] && DiscPoint::new(y0[0], y0[1]).r() >= self.support_radius() {
            return (y0, Mat2::IDENTITY);
        }
        let mut y1 = [y0[0] + h * x0[0], y0[1] + h * x0[1]];
        for _ in 0..self.settings.newton_max_iter {
            let m = [0.5 * (y0[0] + y1[0]), 0.5 * (y0[1] + y1[1])];
            let (x, a) = self.field(m);
            let g = [y1[0] - y0[0] - h * x[0], y1[1] - y0[1] - h * x[1]];
            let jac = Mat2::IDENTITY - a.scale(0.5 * h);
            let Some(inv) = jac.inverse() else { break };
            let d = inv.apply(g);
            y1 = [y1[0] - d[0], y1[1] - d[1]];
            if d[0].hypot(d[1]) <= self.settings.newton_tol {
                break;
            }
        }
        let m = [0.5 * (y0[0] + y1[0]), 0.5 * (y0[1] + y1[1])];
        let a = self.field(m).1;
        let lhs = Mat2::IDENTITY - a.scale(0.5 * h);
        let rhs = Mat2::IDENTITY + a.scale(0.5 * h);
        let j = lhs.inverse().map(|l| l * rhs).unwrap_or(Mat2::IDENTITY);
        (y1, j)
    }

    pub fn apply_with_jacobian(&self, p: DiscPoint) -> (DiscPoint, Mat2) {
        let n = self.settings.steps;
        let h = self.time / n as f64;
        let mut y = [p.x, p.y];
        let mut j = Mat2::IDENTITY;
        for _ in 0..n {
            let (y1, js) = self.step(y, h);
            y = y1;
            j = js * j;
        }
        (DiscPoint::new(y[0], y[1]), j)
    }

    pub fn apply(&self, p: DiscPoint) -> DiscPoint {
        let n = self.settings.steps;
        let h = self.time / n as f64;
        let mut y = [p.x, p.y];
        for _ in 0..n {
            y = self.step(y, h).0;
        }
        DiscPoint::new(y[0], y[1])
    }

    /// max |det Dφ − 1| over the points of an n × n grid inside the disc.
    pub fn area_defect(&self, n: usize, exec: Exec) -> f64 {
        let rows = par_map(exec, n, |i| {
            let mut worst = 0.0_f64;
            for k in 0..n {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
                let y = -1.0 + 2.0 * (k as f64 + 0.5) / n as f64;
                let p = DiscPoint::new(x, y);
                if p.in_disc() {
                    worst = worst.max((self.apply_with_jacobian(p).1.det() - 1.0).abs());
                }
            }
            worst
        });
        rows.into_iter().fold(0.0, f64::max)
    }

    /// max |φ⁻¹(φ(p)) − p| over the given points.
    pub fn round_trip_defect(&self, points: &[DiscPoint], exec: Exec) -> f64 {
        let inv = self.inverted();
        par_map(exec, points.len(), |i| inv.apply(self.apply(points[i])).dist(points[i]))
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// max |φ(p) − p| over samples of the annulus 1 − δ ≤ r ≤ 1; zero exactly
    /// when the map is the identity there on the samples.
    pub fn support_violation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..=8 {
            let r = self.support_radius() + self.spec.delta * j as f64 / 8.0;
            for k in 0..64 {
                let p = DiscPoint::from_polar(r.min(1.0), std::f64::consts::TAU * k as f64 / 64.0);
                worst = worst.max(self.apply(p).dist(p));
            }
        }
        worst
    }
}

impl DiscMap for Conjugator {
    fn apply(&self, p: DiscPoint) -> DiscPoint {
        Conjugator::apply(self, p)
    }

    fn apply_with_jacobian(&self, p: DiscPoint) -> (DiscPoint, Mat2) {
        Conjugator::apply_with_jacobian(self, p)
    }

    fn inverse(&self, p: DiscPoint) -> Option<DiscPoint> {
        Some(self.inverted().apply(p))
    }
}

/// Three nontrivial built-in conjugators with angular modes 1, 2 and 3.
pub fn fixture_conjugators() -> Vec<ConjugatorSpec> {
    vec![
        ConjugatorSpec { r_in: 0.2, ..ConjugatorSpec::new(0.15, 0.2, 1) },
        ConjugatorSpec { phase: 0.7, r_in: 0.3, ..ConjugatorSpec::new(0.1, 0.25, 2) },
        ConjugatorSpec { r_in: 0.4, ..ConjugatorSpec::new(0.06, 0.15, 3) },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_points(n: usize, seed: u64) -> Vec<DiscPoint> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| DiscPoint::from_polar(rng.gen::<f64>().sqrt(), rng.gen::<f64>() * std::f64::consts::TAU))
            .collect()
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let c = Conjugator::new(ConjugatorSpec::new(0.0, 0.2, 1), ConjugatorSettings::default()).unwrap();
        for p in random_points(50, 1) {
            assert_eq!(c.apply(p), p);
        }
    }

    #[test]
    fn inverse_and_area() {
        let c = Conjugator::new(ConjugatorSpec::new(0.3, 0.2, 1), ConjugatorSettings::default()).unwrap();
        let pts = random_points(100, 2);
        assert!(c.round_trip_defect(&pts, Exec::Sequential) <= 1e-8);
        assert!(c.area_defect(64, Exec::Sequential) <= 1e-8);
        assert_eq!(c.support_violation(), 0.0);
        let moved = pts.iter().map(|p| c.apply(*p).dist(*p)).fold(0.0, f64::max);
        assert!(moved > 1e-2, "{moved}");
    }

    #[test]
    fn jacobian_matches_differences() {
        let c = Conjugator::new(fixture_conjugators()[1], ConjugatorSettings::default()).unwrap();
        let p = DiscPoint::new(0.3, -0.4);
        let (_, j) = c.apply_with_jacobian(p);
        let e = 1e-6;
        let dx = c.apply(DiscPoint::new(p.x + e, p.y)) - c.apply(DiscPoint::new(p.x - e, p.y));
        let dy = c.apply(DiscPoint::new(p.x, p.y + e)) - c.apply(DiscPoint::new(p.x, p.y - e));
        let fd = Mat2::new(dx.x / (2.0 * e), dy.x / (2.0 * e), dx.y / (2.0 * e), dy.y / (2.0 * e));
        assert!((fd - j).max_abs() < 1e-6);
    }

    #[test]
    fn spec_validation() {
        assert!(ConjugatorSpec::new(0.1, 0.0, 1).validate().is_err());
        assert!(ConjugatorSpec { r_in: 0.9, ..ConjugatorSpec::new(0.1, 0.2, 1) }.validate().is_err());
        assert!(ConjugatorSpec::new(0.1, 0.2, 0).validate().is_ok());
    }
}
