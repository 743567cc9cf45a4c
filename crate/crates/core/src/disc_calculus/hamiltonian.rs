use super::point::{DiscPoint, DISC_SLACK};
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

/// Oracle interface for a 2π-periodic family of functions on the disc.
///
/// Only `value` is mandatory. Partials default to `None`, in which case
/// [`Hamiltonian`] falls back to finite differences.
pub trait HamiltonianFn: Send + Sync {
    fn value(&self, s: f64, x: f64, y: f64) -> f64;

    /// (∂x H, ∂y H)
    fn gradient(&self, _s: f64, _x: f64, _y: f64) -> Option<[f64; 2]> {
        None
    }

    fn ds(&self, _s: f64, _x: f64, _y: f64) -> Option<f64> {
        None
    }

    /// (H_xx, H_xy, H_yy)
    fn hessian(&self, _s: f64, _x: f64, _y: f64) -> Option<[f64; 3]> {
        None
    }
}

/// Adapter turning a closure into a value-only oracle.
pub struct FnHamiltonian<F>(pub F);

impl<F> HamiltonianFn for FnHamiltonian<F>
where
    F: Fn(f64, f64, f64) -> f64 + Send + Sync,
{
    fn value(&self, s: f64, x: f64, y: f64) -> f64 {
        (self.0)(s, x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianMeta {
    /// Independent of s everywhere.
    pub autonomous: bool,
    pub autonomous_near_boundary: bool,
    pub radial_near_boundary: bool,
    /// Width in r of the collar on which the near-boundary flags hold.
    pub collar_width: f64,
}

impl HamiltonianMeta {
    pub const GENERIC: HamiltonianMeta = HamiltonianMeta {
        autonomous: false,
        autonomous_near_boundary: false,
        radial_near_boundary: false,
        collar_width: 0.0,
    };

    pub const RADIAL_AUTONOMOUS: HamiltonianMeta = HamiltonianMeta {
        autonomous: true,
        autonomous_near_boundary: true,
        radial_near_boundary: true,
        collar_width: 1.0,
    };
}

/// A Hamiltonian H_s on the closed unit disc with boundary value `h`.
///
/// `h = 0` is accepted for compactly supported generators; every contact or
/// chart operation rejects it.
#[derive(Clone)]
pub struct Hamiltonian {
    inner: Arc<dyn HamiltonianFn>,
    h: u32,
    meta: HamiltonianMeta,
    fd_step: f64,
    label: String,
}

impl std::fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hamiltonian")
            .field("label", &self.label)
            .field("h", &self.h)
            .field("meta", &self.meta)
            .finish()
    }
}

const VALIDATION_TOL: f64 = 1e-10;

impl Hamiltonian {
    /// Wraps an oracle after checking the boundary value and s-periodicity on
    /// a fixed sample set.
    pub fn new(
        f: Arc<dyn HamiltonianFn>,
        h: u32,
        meta: HamiltonianMeta,
        label: impl Into<String>,
    ) -> Result<Self> {
        let ham = Hamiltonian { inner: f, h, meta, fd_step: 1e-5, label: label.into() };
        ham.validate()?;
        Ok(ham)
    }

    /// Variant for oracles that are themselves numerical solutions: the
    /// boundary check is unchanged, periodicity is probed at four points
    /// with tolerance `periodic_tol`.
    pub(crate) fn new_numerical(
        f: Arc<dyn HamiltonianFn>,
        h: u32,
        meta: HamiltonianMeta,
        label: impl Into<String>,
        periodic_tol: f64,
    ) -> Result<Self> {
        let ham = Hamiltonian { inner: f, h, meta, fd_step: 1e-5, label: label.into() };
        ham.check_boundary()?;
        for k in 0..4 {
            let s = 0.7 + 1.3 * k as f64;
            let p = DiscPoint::from_polar(0.15 + 0.15 * k as f64, 1.1 * k as f64);
            let (a, b) = (ham.inner.value(s, p.x, p.y), ham.inner.value(s + TAU, p.x, p.y));
            if !(a - b).abs().le(&periodic_tol) {
                return Err(ReebError::pre(format!(
                    "value is not 2π-periodic in s at (s={s:.4}, x={:.4}, y={:.4}): {a} vs {b}",
                    p.x, p.y
                )));
            }
        }
        Ok(ham)
    }

    pub fn from_fn<F>(f: F, h: u32, meta: HamiltonianMeta, label: impl Into<String>) -> Result<Self>
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(Arc::new(FnHamiltonian(f)), h, meta, label)
    }

    fn check_boundary(&self) -> Result<()> {
        let ns = 16;
        let nt = 32;
        for i in 0..ns {
            let s = TAU * i as f64 / ns as f64;
            for j in 0..nt {
                let t = TAU * (j as f64 + 0.5) / nt as f64;
                let (x, y) = (t.cos(), t.sin());
                let v = self.inner.value(s, x, y);
                if !v.is_finite() {
                    return Err(ReebError::Evaluation { s, x, y, what: "non-finite value".into() });
                }
                if (v - self.h as f64).abs() > VALIDATION_TOL {
                    return Err(ReebError::pre(format!(
                        "boundary value {v} at (s={s:.4}, θ={t:.4}) differs from h = {}",
                        self.h
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let ns = 16;
        let nt = 32;
        for i in 0..ns {
            let s = TAU * i as f64 / ns as f64;
            for j in 0..nt {
                let t = TAU * (j as f64 + 0.5) / nt as f64;
                let (x, y) = (t.cos(), t.sin());
                let v = self.inner.value(s, x, y);
                if !v.is_finite() {
                    return Err(ReebError::Evaluation { s, x, y, what: "non-finite value".into() });
                }
                if (v - self.h as f64).abs() > VALIDATION_TOL {
                    return Err(ReebError::pre(format!(
                        "boundary value {v} at (s={s:.4}, θ={t:.4}) differs from h = {}",
                        self.h
                    )));
                }
                let (xi, yi) = (0.6 * x, 0.6 * y);
                let a = self.inner.value(s, xi, yi);
                let b = self.inner.value(s + TAU, xi, yi);
                if (a - b).abs() > VALIDATION_TOL {
                    return Err(ReebError::pre(format!(
                        "value is not 2π-periodic in s at (s={s:.4}, x={xi:.4}, y={yi:.4})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn meta(&self) -> HamiltonianMeta {
        self.meta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn oracle(&self) -> &Arc<dyn HamiltonianFn> {
        &self.inner
    }

    pub fn value(&self, s: f64, p: DiscPoint) -> f64 {
        self.inner.value(s, p.x, p.y)
    }

    /// Value with a finiteness check.
    pub fn try_value(&self, s: f64, p: DiscPoint) -> Result<f64> {
        let v = self.value(s, p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ReebError::Evaluation { s, x: p.x, y: p.y, what: "non-finite value".into() })
        }
    }

    pub fn gradient(&self, s: f64, p: DiscPoint) -> [f64; 2] {
        if let Some(g) = self.inner.gradient(s, p.x, p.y) {
            return g;
        }
        self.fd_gradient(s, p)
    }

    pub fn try_gradient(&self, s: f64, p: DiscPoint) -> Result<[f64; 2]> {
        let g = self.gradient(s, p);
        if g[0].is_finite() && g[1].is_finite() {
            Ok(g)
        } else {
            Err(ReebError::Evaluation { s, x: p.x, y: p.y, what: "non-finite gradient".into() })
        }
    }

    /// Gradient from centered differences of the value oracle, switching to
    /// an inward one-sided radial difference near the boundary.
    pub fn fd_gradient(&self, s: f64, p: DiscPoint) -> [f64; 2] {
        let f = |q: DiscPoint| self.inner.value(s, q.x, q.y);
        grad_in_disc(&f, p, self.fd_step)
    }

    pub fn ds(&self, s: f64, p: DiscPoint) -> f64 {
        if self.meta.autonomous {
            return 0.0;
        }
        if let Some(d) = self.inner.ds(s, p.x, p.y) {
            return d;
        }
        let hs = self.fd_step * s.abs().max(1.0);
        (self.inner.value(s + hs, p.x, p.y) - self.inner.value(s - hs, p.x, p.y)) / (2.0 * hs)
    }

    /// (H_xx, H_xy, H_yy)
    pub fn hessian(&self, s: f64, p: DiscPoint) -> [f64; 3] {
        if let Some(hs) = self.inner.hessian(s, p.x, p.y) {
            return hs;
        }
        if self.inner.gradient(s, p.x, p.y).is_some() {
            let gx = grad_in_disc(&|q| self.gradient(s, q)[0], p, self.fd_step);
            let gy = grad_in_disc(&|q| self.gradient(s, q)[1], p, self.fd_step);
            return [gx[0], 0.5 * (gx[1] + gy[0]), gy[1]];
        }
        // Second differences of values need a larger step.
        let f = |q: DiscPoint| self.inner.value(s, q.x, q.y);
        let step = 1e-4;
        let gx = grad_in_disc(&|q| grad_in_disc(&f, q, step)[0], p, step);
        let gy = grad_in_disc(&|q| grad_in_disc(&f, q, step)[1], p, step);
        [gx[0], 0.5 * (gx[1] + gy[0]), gy[1]]
    }

    /// r ∂_r H, i.e. the Euler derivative x H_x + y H_y.
    pub fn euler_derivative(&self, s: f64, p: DiscPoint) -> f64 {
        let g = self.gradient(s, p);
        p.x * g[0] + p.y * g[1]
    }
}

/// Gradient of `f` at `p` by centered differences with step `rel·max(1,|c|)`.
///
/// When a centered stencil would leave the closed disc, the radial derivative
/// is taken one-sided inward (second order) and the angular derivative
/// centered along the circle through `p`.
pub(crate) fn grad_in_disc<F: Fn(DiscPoint) -> f64>(f: &F, p: DiscPoint, rel: f64) -> [f64; 2] {
    let hx = rel * p.x.abs().max(1.0);
    let hy = rel * p.y.abs().max(1.0);
    let lim = 1.0 + DISC_SLACK;
    let r = p.r();
    if r + hx.max(hy) <= lim {
        return [
            (f(p + DiscPoint::new(hx, 0.0)) - f(p - DiscPoint::new(hx, 0.0))) / (2.0 * hx),
            (f(p + DiscPoint::new(0.0, hy)) - f(p - DiscPoint::new(0.0, hy))) / (2.0 * hy),
        ];
    }
    let h = rel;
    let th = p.theta();
    let fr = (-3.0 * f(p) + 4.0 * f(DiscPoint::from_polar(r - h, th)) - f(DiscPoint::from_polar(r - 2.0 * h, th)))
        / (-2.0 * h);
    let dt = h / r;
    let ft = (f(DiscPoint::from_polar(r, th + dt)) - f(DiscPoint::from_polar(r, th - dt))) / (2.0 * dt);
    let (sn, cs) = th.sin_cos();
    [cs * fr - sn / r * ft, sn * fr + cs / r * ft]
}
