use crate::cut_binding::fourier;
use crate::cut_binding::{phi_embed_polar, quotient_map, BindingChart, QuotientMapSpec};
use crate::disc_calculus::{DiscPoint, Hamiltonian};
use crate::exec::{try_par_map, Exec};
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

pub type Vec3 = [f64; 3];
pub type Vec4 = [f64; 4];

const POLE_CANDIDATES: usize = 64;
const INCONCLUSIVE: f64 = 0.2;

fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

fn dot4(a: Vec4, b: Vec4) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn det4(m: [Vec4; 4]) -> f64 {
    let minor = |skip: usize| {
        let r: Vec<Vec3> = (1..4)
            .map(|i| {
                let mut v = [0.0; 3];
                let mut c = 0;
                for j in 0..4 {
                    if j != skip {
                        v[c] = m[i][j];
                        c += 1;
                    }
                }
                v
            })
            .collect();
        dot3(r[0], cross(r[1], r[2]))
    };
    (0..4).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * m[0][j] * minor(j)).sum()
}

/// Gauss linking integral of two closed curves sampled at equispaced parameters,
/// by the periodic trapezoid rule with spectral tangents.
pub fn gauss_linking(a: &[Vec3], b: &[Vec3], exec: Exec) -> Result<f64> {
    if a.len() < 8 || b.len() < 8 {
        return Err(ReebError::config("each curve needs at least 8 samples"));
    }
    let tangents = |c: &[Vec3]| -> Vec<Vec3> {
        let d: Vec<Vec<f64>> =
            (0..3).map(|k| fourier::derivative(&c.iter().map(|p| p[k]).collect::<Vec<_>>(), 1)).collect();
        (0..c.len()).map(|i| [d[0][i], d[1][i], d[2][i]]).collect()
    };
    let (ta, tb) = (tangents(a), tangents(b));
    let rows = try_par_map(exec, a.len(), |i| -> Result<f64> {
        let mut acc = 0.0;
        for (j, &q) in b.iter().enumerate() {
            let r = sub3(a[i], q);
            let d = norm3(r);
            if !(d > 0.0) {
                return Err(ReebError::Resolution(format!("curves meet at samples {i}, {j}")));
            }
            acc += dot3(r, cross(ta[i], tb[j])) / (d * d * d);
        }
        Ok(acc)
    })?;
    let w = (TAU / a.len() as f64) * (TAU / b.len() as f64);
    Ok(rows.iter().sum::<f64>() * w / (4.0 * PI))
}

/// Linking number of two closed polygons, summing exact solid angles of
/// segment pairs. Independent of the quadrature in [`gauss_linking`].
pub fn polygon_linking(a: &[Vec3], b: &[Vec3]) -> f64 {
    let mut total = 0.0;
    for i in 0..a.len() {
        let (p1, p2) = (a[i], a[(i + 1) % a.len()]);
        for j in 0..b.len() {
            let (p3, p4) = (b[j], b[(j + 1) % b.len()]);
            let r13 = sub3(p3, p1);
            let r14 = sub3(p4, p1);
            let r23 = sub3(p3, p2);
            let r24 = sub3(p4, p2);
            let unit = |v: Vec3| {
                let n = norm3(v);
                if n > 0.0 {
                    [v[0] / n, v[1] / n, v[2] / n]
                } else {
                    [0.0; 3]
                }
            };
            let n = [unit(cross(r13, r14)), unit(cross(r14, r24)), unit(cross(r24, r23)), unit(cross(r23, r13))];
            let omega: f64 = (0..4).map(|k| dot3(n[k], n[(k + 1) % 4]).clamp(-1.0, 1.0).asin()).sum();
            let s = dot3(cross(sub3(p4, p3), sub3(p2, p1)), r13);
            total += omega * s.signum();
        }
    }
    total / (4.0 * PI)
}

fn min_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    let mut m = f64::INFINITY;
    for p in a {
        for q in b {
            m = m.min(norm3(sub3(*p, *q)));
        }
    }
    m
}

/// Deterministic candidate poles on S³ in Hopf coordinates.
fn pole_candidates() -> Vec<Vec4> {
    let mut out = Vec::with_capacity(POLE_CANDIDATES);
    for i in 0..4 {
        let eta = PI / 2.0 * (i as f64 + 0.5) / 4.0;
        for j in 0..4 {
            for k in 0..4 {
                let x1 = TAU * (j as f64 + 0.25) / 4.0;
                let x2 = TAU * (k as f64 + 0.6) / 4.0;
                out.push([eta.cos() * x1.cos(), eta.cos() * x1.sin(), eta.sin() * x2.cos(), eta.sin() * x2.sin()]);
            }
        }
    }
    out
}

/// Orthonormal basis (e₁, e₂, e₃) of P^⊥ with det[e₁, e₂, e₃, P] = +1.
fn tangent_basis(p: Vec4) -> [Vec4; 3] {
    let mut basis: Vec<Vec4> = Vec::new();
    for k in 0..4 {
        let mut v = [0.0; 4];
        v[k] = 1.0;
        for u in std::iter::once(&p).chain(basis.iter()) {
            let c = dot4(v, *u);
            for m in 0..4 {
                v[m] -= c * u[m];
            }
        }
        let n = dot4(v, v).sqrt();
        if n > 1e-6 && basis.len() < 3 {
            basis.push(v.map(|x| x / n));
        }
    }
    let mut e = [basis[0], basis[1], basis[2]];
    if det4([e[0], e[1], e[2], p]) < 0.0 {
        e[2] = e[2].map(|x| -x);
    }
    e
}

/// Stereographic projection of unit vectors from pole P, orientation preserving
/// for S³ oriented as the boundary of the ball.
pub fn stereographic(q: Vec4, pole: Vec4) -> Vec3 {
    let e = tangent_basis(pole);
    let d = 1.0 - dot4(q, pole);
    [dot4(q, e[0]) / d, dot4(q, e[1]) / d, dot4(q, e[2]) / d]
}

fn normalize4(q: Vec4) -> Vec4 {
    let n = dot4(q, q).sqrt();
    q.map(|x| x / n)
}

/// Projects two closed curves on S³ (after radial normalization) from the best
/// of the candidate poles.
pub fn project_pair(a: &[Vec4], b: &[Vec4]) -> (Vec4, Vec<Vec3>, Vec<Vec3>) {
    let a: Vec<Vec4> = a.iter().map(|q| normalize4(*q)).collect();
    let b: Vec<Vec4> = b.iter().map(|q| normalize4(*q)).collect();
    let mut best = (f64::NEG_INFINITY, [1.0, 0.0, 0.0, 0.0]);
    for p in pole_candidates() {
        let d = a.iter().chain(b.iter()).map(|q| 1.0 - dot4(*q, p)).fold(f64::INFINITY, f64::min);
        if d > best.0 {
            best = (d, p);
        }
    }
    let pole = best.1;
    let pa = a.iter().map(|q| stereographic(*q, pole)).collect();
    let pb = b.iter().map(|q| stereographic(*q, pole)).collect();
    (pole, pa, pb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkingReport {
    pub value: i64,
    pub integral: f64,
    /// |integral − value|
    pub confidence: f64,
    pub min_distance: f64,
    pub pole: Vec4,
    pub n_samples: usize,
    #[serde(skip)]
    pub curves: [Vec<Vec3>; 2],
}

impl LinkingReport {
    /// Projected curves as "curve,index,x,y,z".
    pub fn curves_csv(&self) -> String {
        let mut s = String::from("curve,index,x,y,z\n");
        for (c, pts) in self.curves.iter().enumerate() {
            for (i, p) in pts.iter().enumerate() {
                let _ = writeln!(s, "{c},{i},{},{},{}", p[0], p[1], p[2]);
            }
        }
        s
    }
}

/// Linking number of two closed curves on S³ given by equispaced samples.
/// `min_sep` is the separation below which the quadrature is not trusted.
pub fn linking_on_s3(a: &[Vec4], b: &[Vec4], min_sep: f64, exec: Exec) -> Result<LinkingReport> {
    let (pole, pa, pb) = project_pair(a, b);
    let na: Vec<Vec4> = a.iter().map(|q| normalize4(*q)).collect();
    let nb: Vec<Vec4> = b.iter().map(|q| normalize4(*q)).collect();
    let mut sep = f64::INFINITY;
    for p in &na {
        for q in &nb {
            let d: f64 = p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            sep = sep.min(d);
        }
    }
    if sep < min_sep {
        return Err(ReebError::Resolution(format!("curves come within {sep:e} < {min_sep:e}")));
    }
    // The trapezoid rule resolves the Gauss kernel only on scales above the
    // sample spacing.
    let spacing = max_spacing(&na).max(max_spacing(&nb));
    if sep < spacing {
        return Err(ReebError::Resolution(format!(
            "curves come within {sep:e}, below the sample spacing {spacing:e}; increase the sample count"
        )));
    }
    let integral = gauss_linking(&pa, &pb, exec)?;
    let value = integral.round();
    let confidence = (integral - value).abs();
    if !(confidence <= INCONCLUSIVE) {
        return Err(ReebError::Inconclusive { value: integral, confidence });
    }
    Ok(LinkingReport {
        value: value as i64,
        integral,
        confidence,
        min_distance: min_distance(&pa, &pb),
        pole,
        n_samples: a.len(),
        curves: [pa, pb],
    })
}

fn max_spacing(c: &[Vec4]) -> f64 {
    (0..c.len())
        .map(|i| {
            let (p, q) = (c[i], c[(i + 1) % c.len()]);
            p.iter().zip(&q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

/// Normal direction (u, v) of the e₁ push-off at binding parameter b, read off
/// at ϑ = 0 and radius ρ in the binding chart.
fn push_direction(ham: &Hamiltonian, b: f64, rho: f64) -> Result<[f64; 2]> {
    let r = 1.0 - rho * rho;
    let p = DiscPoint::from_polar(r, b);
    let hv = ham.try_value(0.0, p)?;
    // e₁ = H ∂_x + y ∂_s, written in (r, θ, s) and then in (ρ, ϑ).
    let dr = p.x * hv / r;
    let dvartheta = p.y;
    let drho = -dr / (2.0 * rho);
    let w = [drho, rho * dvartheta];
    let n = w[0].hypot(w[1]);
    if !(n > 0.0) {
        return Err(ReebError::pre(format!("e₁ has no normal component at b = {b}")));
    }
    Ok([w[0] / n, w[1] / n])
}

/// Self-linking number of the binding: links B with its push-off along e₁
/// after mapping both into S³ through `spec`.
pub fn self_linking(
    spec: QuotientMapSpec,
    ham: &Hamiltonian,
    push_eps: f64,
    n_samples: usize,
    exec: Exec,
) -> Result<LinkingReport> {
    if !(1e-3..=1e-1).contains(&push_eps) {
        return Err(ReebError::pre(format!("push_eps = {push_eps} outside [1e-3, 1e-1]")));
    }
    if n_samples < 16 {
        return Err(ReebError::config("self_linking needs n_samples ≥ 16"));
    }
    let h = ham.h();
    if spec.h() != h {
        return Err(ReebError::config(format!("quotient map has h = {} but H has h = {h}", spec.h())));
    }
    let chart = BindingChart::with_default_collar(h)?;
    let probe = 0.5 * chart.rho_max();
    let pts = try_par_map(exec, n_samples, |i| -> Result<(Vec4, Vec4)> {
        let b = TAU * i as f64 / n_samples as f64;
        let on = quotient_map(spec, 0.0, 1.0, b)?;
        let w = push_direction(ham, b, probe)?;
        let (s, r, t) = phi_embed_polar(&chart, b, push_eps, w[1].atan2(w[0]))?;
        let off = quotient_map(spec, s, r, t)?;
        Ok((on, off))
    })?;
    let (a, bb): (Vec<Vec4>, Vec<Vec4>) = pts.into_iter().unzip();
    linking_on_s3(&a, &bb, 10.0 * push_eps / n_samples as f64, exec)
}

/// The Hopf link {z₂ = 0} ∪ {z₁ = 0}, both with the complex orientation.
pub fn hopf_fixture(n: usize) -> (Vec<Vec4>, Vec<Vec4>) {
    let t = |i: usize| TAU * i as f64 / n as f64;
    let a = (0..n).map(|i| [t(i).cos(), t(i).sin(), 0.0, 0.0]).collect();
    let b = (0..n).map(|i| [0.0, 0.0, t(i).cos(), t(i).sin()]).collect();
    (a, b)
}

/// Two small circles in disjoint caps of S³.
pub fn split_fixture(n: usize) -> (Vec<Vec4>, Vec<Vec4>) {
    let c: f64 = 0.2;
    let z = (1.0 - c * c).sqrt();
    let t = |i: usize| TAU * i as f64 / n as f64;
    let a = (0..n).map(|i| [z, 0.0, c * t(i).cos(), c * t(i).sin()]).collect();
    let b = (0..n).map(|i| [-z, 0.0, c * t(i).cos(), c * t(i).sin()]).collect();
    (a, b)
}
