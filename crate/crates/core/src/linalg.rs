//! Small dense linear algebra and quadrature helpers.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// A 2×2 real matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    /// Counterclockwise rotation by `angle`.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2([[c, -s], [s, c]])
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        Mat2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn scale(&self, k: f64) -> Self {
        Mat2([[k * self.0[0][0], k * self.0[0][1]], [k * self.0[1][0], k * self.0[1][1]]])
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-1.0)
    }
}

/// Solve `a x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` for a numerically singular matrix.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Weights `w[k][i]` such that `sum_i w[k][i] f(t_i)` is the k-th derivative at
/// `t = at` of the polynomial interpolating `f` on `nodes`, for `k <= max_order`.
///
/// Nodes are rescaled internally to keep the Vandermonde system well scaled.
pub fn derivative_weights(nodes: &[f64], at: f64, max_order: usize) -> Option<Vec<Vec<f64>>> {
    let n = nodes.len();
    let scale = nodes.iter().fold(0.0_f64, |m, t| m.max((t - at).abs()));
    if n == 0 || scale == 0.0 {
        return None;
    }
    // Columns of V^{-1}: solve V^T w = e_k for each derivative order.
    // p(t) = sum_j c_j ((t-at)/scale)^j, c = V^{-1} f, p^{(k)}(at) = k! c_k / scale^k.
    let z: Vec<f64> = nodes.iter().map(|t| (t - at) / scale).collect();
    let vt: Vec<Vec<f64>> = (0..n).map(|j| z.iter().map(|zi| zi.powi(j as i32)).collect()).collect();
    let mut out = Vec::with_capacity(max_order + 1);
    let mut fact = 1.0;
    for k in 0..=max_order {
        if k > 0 {
            fact *= k as f64;
        }
        if k >= n {
            out.push(vec![0.0; n]);
            continue;
        }
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let row = solve_dense(vt.clone(), e)?;
        let f = fact / scale.powi(k as i32);
        out.push(row.into_iter().map(|w| w * f).collect());
    }
    Some(out)
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Newton on P_n starting from the Chebyshev-like guess.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        x[i] = 0.5 * (1.0 - t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// Wrap an angle difference into (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_weights_recover_polynomial_jet() {
        let nodes = [-0.1, -0.05, -0.025, 0.025, 0.05, 0.1];
        let w = derivative_weights(&nodes, 0.0, 3).unwrap();
        let f = |t: f64| 1.0 + 2.0 * t - 3.0 * t * t + 0.5 * t.powi(3);
        let vals: Vec<f64> = nodes.iter().map(|&t| f(t)).collect();
        let d: Vec<f64> = w.iter().map(|row| row.iter().zip(&vals).map(|(a, b)| a * b).sum()).collect();
        assert!((d[0] - 1.0).abs() < 1e-12);
        assert!((d[1] - 2.0).abs() < 1e-10);
        assert!((d[2] + 6.0).abs() < 1e-8);
        assert!((d[3] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn gauss_legendre_integrates_degree_2n_minus_1() {
        let (x, w) = gauss_legendre_unit(5);
        let s: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(9)).sum();
        assert!((s - 0.1).abs() < 1e-14);
    }

    #[test]
    fn rotation_composes() {
        let r = Mat2::rotation(0.3) * Mat2::rotation(0.4);
        let e = r - Mat2::rotation(0.7);
        assert!(e.max_abs() < 1e-15);
        assert!((Mat2::rotation(1.1).det() - 1.0).abs() < 1e-15);
    }
}
