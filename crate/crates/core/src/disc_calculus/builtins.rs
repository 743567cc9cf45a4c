//! Closed-form Hamiltonians with analytic partials.

use super::hamiltonian::{Hamiltonian, HamiltonianFn, HamiltonianMeta};
use super::maps::DiscMap;
use super::point::DiscPoint;
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

struct Constant(f64);

impl HamiltonianFn for Constant {
    fn value(&self, _s: f64, _x: f64, _y: f64) -> f64 {
        self.0
    }
    fn gradient(&self, _s: f64, _x: f64, _y: f64) -> Option<[f64; 2]> {
        Some([0.0, 0.0])
    }
    fn ds(&self, _s: f64, _x: f64, _y: f64) -> Option<f64> {
        Some(0.0)
    }
    fn hessian(&self, _s: f64, _x: f64, _y: f64) -> Option<[f64; 3]> {
        Some([0.0; 3])
    }
}

/// H = a2 r² + a0.
struct Quadratic {
    a0: f64,
    a2: f64,
}

impl HamiltonianFn for Quadratic {
    fn value(&self, _s: f64, x: f64, y: f64) -> f64 {
        self.a2 * (x * x + y * y) + self.a0
    }
    fn gradient(&self, _s: f64, x: f64, y: f64) -> Option<[f64; 2]> {
        Some([2.0 * self.a2 * x, 2.0 * self.a2 * y])
    }
    fn ds(&self, _s: f64, _x: f64, _y: f64) -> Option<f64> {
        Some(0.0)
    }
    fn hessian(&self, _s: f64, _x: f64, _y: f64) -> Option<[f64; 3]> {
        Some([2.0 * self.a2, 0.0, 2.0 * self.a2])
    }
}

/// H = h + (1 − r²)(c + d χ(r) cos θ).
///
/// cos θ alone is not differentiable at the origin, so the angular term is
/// switched on by a smooth step χ with χ = 0 on r ≤ 0.1 and χ = 1 on r ≥ 0.4.
/// On the outer region, in particular the whole binding collar, this is the
/// plain formula.
struct AngularCollar {
    h: f64,
    c: f64,
    d: f64,
}

const CUTOFF: (f64, f64) = (0.1, 0.4);

/// Smooth step S(t) = e(t)/(e(t) + e(1−t)), e(t) = exp(−1/t), and S'(t).
fn smooth_step(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let e = |u: f64| (-1.0 / u).exp();
    let (a, b) = (e(t), e(1.0 - t));
    let (da, db) = (a / (t * t), b / ((1.0 - t) * (1.0 - t)));
    let den = a + b;
    (a / den, (da * b + a * db) / (den * den))
}

impl AngularCollar {
    fn cutoff(r: f64) -> (f64, f64) {
        let w = CUTOFF.1 - CUTOFF.0;
        let (s, ds) = smooth_step((r - CUTOFF.0) / w);
        (s, ds / w)
    }
}

impl HamiltonianFn for AngularCollar {
    fn value(&self, _s: f64, x: f64, y: f64) -> f64 {
        let r = x.hypot(y);
        let (chi, _) = Self::cutoff(r);
        let ang = if chi > 0.0 { self.d * chi * x / r } else { 0.0 };
        self.h + (1.0 - r * r) * (self.c + ang)
    }
    fn gradient(&self, _s: f64, x: f64, y: f64) -> Option<[f64; 2]> {
        let r2 = x * x + y * y;
        let r = r2.sqrt();
        let (chi, dchi) = Self::cutoff(r);
        if chi == 0.0 && dchi == 0.0 {
            return Some([-2.0 * self.c * x, -2.0 * self.c * y]);
        }
        let (cs, sn) = (x / r, y / r);
        let w = 1.0 - r2;
        let fr = -2.0 * r * (self.c + self.d * chi * cs) + w * self.d * dchi * cs;
        let ft = -w * self.d * chi * sn;
        Some([cs * fr - sn / r * ft, sn * fr + cs / r * ft])
    }
    fn ds(&self, _s: f64, _x: f64, _y: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// Smooth compactly supported radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BumpProfile {
    /// exp(1 − 1/(1 − (r/r_out)²)) on r < r_out; equals 1 at the origin.
    Centered { r_out: f64 },
    /// exp(1 − 1/(1 − t²)) with t the affine coordinate of [r_in, r_out].
    Annular { r_in: f64, r_out: f64 },
}

/// g(t) = exp(1 − 1/(1 − t²)) and its first two derivatives in t.
fn bump_core(t: f64) -> (f64, f64, f64) {
    if t.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = 1.0 - t * t;
    let g = (1.0 - 1.0 / u).exp();
    let g1 = g * (-2.0 * t / (u * u));
    let g2 = g * (4.0 * t * t / u.powi(4) - 2.0 / (u * u) - 8.0 * t * t / u.powi(3));
    (g, g1, g2)
}

impl BumpProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BumpProfile::Centered { r_out } => r_out > 0.0 && r_out <= 1.0,
            BumpProfile::Annular { r_in, r_out } => r_in >= 0.0 && r_in < r_out && r_out <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ReebError::config(format!("invalid bump support {self:?}")))
        }
    }

    /// Outer edge of the support.
    pub fn r_out(&self) -> f64 {
        match *self {
            BumpProfile::Centered { r_out } => r_out,
            BumpProfile::Annular { r_out, .. } => r_out,
        }
    }

    /// Inner edge of the support (0 for the centered bump).
    pub fn r_in(&self) -> f64 {
        match *self {
            BumpProfile::Centered { .. } => 0.0,
            BumpProfile::Annular { r_in, .. } => r_in,
        }
    }

    /// (b, b', b'') in r.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        match *self {
            BumpProfile::Centered { r_out } => {
                let (g, g1, g2) = bump_core(r / r_out);
                (g, g1 / r_out, g2 / (r_out * r_out))
            }
            BumpProfile::Annular { r_in, r_out } => {
                let k = 2.0 / (r_out - r_in);
                let (g, g1, g2) = bump_core(k * r - (r_in + r_out) / (r_out - r_in));
                (g, g1 * k, g2 * k * k)
            }
        }
    }

    /// b'(r)/r, finite at the origin for the centered profile.
    fn d_over_r(&self, r: f64) -> f64 {
        match *self {
            BumpProfile::Centered { r_out } => {
                let t = r / r_out;
                if t >= 1.0 {
                    return 0.0;
                }
                let u = 1.0 - t * t;
                let g = (1.0 - 1.0 / u).exp();
                -2.0 * g / (u * u * r_out * r_out)
            }
            BumpProfile::Annular { .. } => {
                if r == 0.0 {
                    0.0
                } else {
                    self.eval(r).1 / r
                }
            }
        }
    }
}

/// K_s = A · b(r) · cos(kθ + φ₀) · (c₀ + c₁ sin s), compactly supported in the
/// open disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpGenerator {
    pub amplitude: f64,
    pub profile: BumpProfile,
    pub mode: u32,
    pub phase: f64,
    /// (c₀, c₁) of the time factor c₀ + c₁ sin s.
    pub time: (f64, f64),
}

impl BumpGenerator {
    pub fn autonomous(amplitude: f64, profile: BumpProfile, mode: u32, phase: f64) -> Self {
        BumpGenerator { amplitude, profile, mode, phase, time: (1.0, 0.0) }
    }

    fn time_factor(&self, s: f64) -> f64 {
        self.time.0 + self.time.1 * s.sin()
    }

    pub fn is_autonomous(&self) -> bool {
        self.time.1 == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        if self.profile.r_out() >= 1.0 {
            return Err(ReebError::config("generator support must stay inside the open disc"));
        }
        if self.mode > 0 && matches!(self.profile, BumpProfile::Centered { .. }) {
            return Err(ReebError::config("angular modes need an annular support away from the origin"));
        }
        Ok(())
    }

    /// Value and polar derivatives (F, F_r, F_θ, F_rr, F_rθ, F_θθ) without the time factor.
    fn polar(&self, r: f64, th: f64) -> [f64; 6] {
        let (b, b1, b2) = self.profile.eval(r);
        let k = self.mode as f64;
        let (sn, cs) = (k * th + self.phase).sin_cos();
        let a = self.amplitude;
        [a * b * cs, a * b1 * cs, -a * b * k * sn, a * b2 * cs, -a * b1 * k * sn, -a * b * k * k * cs]
    }

    pub fn value(&self, s: f64, x: f64, y: f64) -> f64 {
        let r = x.hypot(y);
        if r >= self.profile.r_out() || r <= self.profile.r_in() && self.mode > 0 {
            return 0.0;
        }
        self.polar(r, y.atan2(x))[0] * self.time_factor(s)
    }
}

impl HamiltonianFn for BumpGenerator {
    fn value(&self, s: f64, x: f64, y: f64) -> f64 {
        BumpGenerator::value(self, s, x, y)
    }

    fn gradient(&self, s: f64, x: f64, y: f64) -> Option<[f64; 2]> {
        let r = x.hypot(y);
        if r >= self.profile.r_out() || r <= self.profile.r_in() {
            return Some([0.0, 0.0]);
        }
        let tf = self.time_factor(s);
        if self.mode == 0 {
            let g = self.amplitude * self.phase.cos() * self.profile.d_over_r(r) * tf;
            return Some([g * x, g * y]);
        }
        let d = self.polar(r, y.atan2(x));
        let (sn, cs) = (y / r, x / r);
        Some([tf * (cs * d[1] - sn / r * d[2]), tf * (sn * d[1] + cs / r * d[2])])
    }

    fn ds(&self, s: f64, x: f64, y: f64) -> Option<f64> {
        let r = x.hypot(y);
        if r >= self.profile.r_out() || r <= self.profile.r_in() && self.mode > 0 {
            return Some(0.0);
        }
        Some(self.polar(r, y.atan2(x))[0] * self.time.1 * s.cos())
    }

    fn hessian(&self, s: f64, x: f64, y: f64) -> Option<[f64; 3]> {
        let r = x.hypot(y);
        if r >= self.profile.r_out() || r <= self.profile.r_in() && self.mode > 0 {
            return Some([0.0; 3]);
        }
        let tf = self.time_factor(s);
        if self.mode == 0 {
            let (_, _, b2) = self.profile.eval(r);
            let q = self.profile.d_over_r(r);
            let a = self.amplitude * self.phase.cos() * tf;
            if r == 0.0 {
                return Some([a * b2, 0.0, a * b2]);
            }
            let (c, sn) = (x / r, y / r);
            let diff = b2 - q;
            return Some([a * (q + diff * c * c), a * diff * c * sn, a * (q + diff * sn * sn)]);
        }
        let d = self.polar(r, y.atan2(x));
        let h = polar_hessian(r, y / r, x / r, d[1], d[2], d[3], d[4], d[5]);
        Some([tf * h[0], tf * h[1], tf * h[2]])
    }
}

/// Cartesian Hessian (xx, xy, yy) from polar partials at radius `r > 0`
/// with sin θ = `sn`, cos θ = `cs`.
#[allow(clippy::too_many_arguments)]
pub fn polar_hessian(r: f64, sn: f64, cs: f64, fr: f64, ft: f64, frr: f64, frt: f64, ftt: f64) -> [f64; 3] {
    let r2 = r * r;
    let xx = cs * cs * frr + sn * sn / r * fr - 2.0 * cs * sn / r * frt + 2.0 * cs * sn / r2 * ft + sn * sn / r2 * ftt;
    let yy = sn * sn * frr + cs * cs / r * fr + 2.0 * cs * sn / r * frt - 2.0 * cs * sn / r2 * ft + cs * cs / r2 * ftt;
    let c2 = cs * cs - sn * sn;
    let xy = cs * sn * frr - cs * sn / r * fr + c2 / r * frt - c2 / r2 * ft - cs * sn / r2 * ftt;
    [xx, xy, yy]
}

/// H ∘ φ for a disc map φ.
pub struct PullbackBy {
    pub base: Hamiltonian,
    pub map: Arc<dyn DiscMap>,
}

impl HamiltonianFn for PullbackBy {
    fn value(&self, s: f64, x: f64, y: f64) -> f64 {
        self.base.value(s, self.map.apply(DiscPoint::new(x, y)))
    }

    fn gradient(&self, s: f64, x: f64, y: f64) -> Option<[f64; 2]> {
        let (q, j) = self.map.apply_with_jacobian(DiscPoint::new(x, y));
        let g = self.base.gradient(s, q);
        Some(j.transpose().apply(g))
    }

    fn ds(&self, s: f64, x: f64, y: f64) -> Option<f64> {
        Some(self.base.ds(s, self.map.apply(DiscPoint::new(x, y))))
    }
}

fn integer_h(v: f64, what: &str) -> Result<u32> {
    let r = v.round();
    if (v - r).abs() > 1e-10 || r < 0.0 {
        return Err(ReebError::pre(format!("{what} = {v} must be a nonnegative integer")));
    }
    Ok(r as u32)
}

impl Hamiltonian {
    /// H ≡ h.
    pub fn constant(h: u32) -> Result<Self> {
        Self::new(Arc::new(Constant(h as f64)), h, HamiltonianMeta::RADIAL_AUTONOMOUS, format!("constant({h})"))
    }

    /// H = a2 r² + a0, requiring a0 + a2 to be an integer.
    pub fn quadratic(a0: f64, a2: f64) -> Result<Self> {
        let h = integer_h(a0 + a2, "a0 + a2")?;
        Self::new(
            Arc::new(Quadratic { a0, a2 }),
            h,
            HamiltonianMeta::RADIAL_AUTONOMOUS,
            format!("quadratic(a0={a0}, a2={a2})"),
        )
    }

    /// R = h + p/q − (p/q) r², whose time-2π map is rotation by 2πp/q.
    pub fn rigid_rotation(h: u32, p: i64, q: i64) -> Result<Self> {
        if q < 1 {
            return Err(ReebError::pre("rotation denominator q must be ≥ 1"));
        }
        if h < 1 {
            return Err(ReebError::pre("boundary value h must be ≥ 1"));
        }
        let c = p as f64 / q as f64;
        if h as f64 + c <= 0.0 {
            return Err(ReebError::pre(format!("h + p/q = {} must be positive for the contact condition", h as f64 + c)));
        }
        Self::new(
            Arc::new(Quadratic { a0: h as f64 + c, a2: -c }),
            h,
            HamiltonianMeta::RADIAL_AUTONOMOUS,
            format!("rigid_rotation(h={h}, p={p}, q={q})"),
        )
    }

    /// H = h + (1 − r²)(c + d cos θ).
    pub fn angular_collar(h: u32, c: f64, d: f64) -> Result<Self> {
        let meta = HamiltonianMeta {
            autonomous: true,
            autonomous_near_boundary: true,
            radial_near_boundary: d == 0.0,
            collar_width: if d == 0.0 { 1.0 } else { 0.0 },
        };
        Self::new(
            Arc::new(AngularCollar { h: h as f64, c, d }),
            h,
            meta,
            format!("angular_collar(h={h}, c={c}, d={d})"),
        )
    }

    /// A compactly supported generator with boundary value 0.
    pub fn bump_generator(g: BumpGenerator) -> Result<Self> {
        g.validate()?;
        let autonomous = g.is_autonomous();
        let meta = HamiltonianMeta {
            autonomous,
            autonomous_near_boundary: true,
            radial_near_boundary: true,
            collar_width: 1.0 - g.profile.r_out(),
        };
        Self::new(Arc::new(g), 0, meta, format!("bump_generator({g:?})"))
    }

    /// H ∘ φ. The caller asserts φ is the identity near ∂D²; the boundary value
    /// is re-validated.
    pub fn pullback_by(base: &Hamiltonian, map: Arc<dyn DiscMap>, collar_width: f64) -> Result<Self> {
        let meta = HamiltonianMeta { collar_width: collar_width.min(base.meta().collar_width), ..base.meta() };
        let label = format!("pullback({})", base.label());
        Self::new(Arc::new(PullbackBy { base: base.clone(), map }), base.h(), meta, label)
    }
}
