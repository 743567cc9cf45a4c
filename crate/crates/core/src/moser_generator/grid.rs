use crate::exec::{par_map, Exec};
use crate::linalg::gauss_legendre_unit;
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Cell integrals and derivatives from local cubic interpolants.
    Cubic4,
    /// The same from local quintic interpolants.
    Quintic6,
}

impl QuadratureRule {
    /// Interpolation points per cell.
    pub fn points(&self) -> usize {
        match self {
            QuadratureRule::Cubic4 => 4,
            QuadratureRule::Quintic6 => 6,
        }
    }

    pub fn order(&self) -> usize {
        self.points()
    }
}

/// Axis-aligned box [x0, x1] × [y0, y1] in I².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

/// Samples on the uniform n×n node grid of I² = [0,1]², nodes at i/(n−1).
/// Row-major with the y index outermost: `values[iy * n + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction2D {
    pub n: usize,
    pub values: Vec<f64>,
    /// Smallest box containing every nonzero sample (None when all vanish).
    pub support: Option<SupportBox>,
    pub rule: QuadratureRule,
    pub compactly_supported: bool,
}

impl GridFunction2D {
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 8 {
            return Err(ReebError::config(format!("grid size {n} is too small (need n ≥ 8)")));
        }
        if values.len() != n * n {
            return Err(ReebError::config("grid value count does not match n²"));
        }
        let mut g = GridFunction2D { n, values, support: None, rule: QuadratureRule::Quintic6, compactly_supported: false };
        g.refresh_support(2);
        Ok(g)
    }

    /// Sample `f(x, y)` at the nodes.
    pub fn from_fn<F: Fn(f64, f64) -> f64 + Sync>(n: usize, f: F, exec: Exec) -> Result<Self> {
        if n < 8 {
            return Err(ReebError::config(format!("grid size {n} is too small (need n ≥ 8)")));
        }
        let h = 1.0 / (n - 1) as f64;
        let rows = par_map(exec, n, |iy| (0..n).map(|ix| f(ix as f64 * h, iy as f64 * h)).collect::<Vec<_>>());
        Self::from_values(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_values(n, vec![0.0; n * n])
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.n + ix]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Recompute the support box and flag compact support when every sample
    /// within `margin` cells of the boundary is exactly zero.
    pub fn refresh_support(&mut self, margin: usize) {
        let n = self.n;
        let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (n, 0, n, 0);
        for iy in 0..n {
            for ix in 0..n {
                if self.values[iy * n + ix] != 0.0 {
                    lo_x = lo_x.min(ix);
                    hi_x = hi_x.max(ix);
                    lo_y = lo_y.min(iy);
                    hi_y = hi_y.max(iy);
                }
            }
        }
        if lo_x > hi_x {
            self.support = None;
            self.compactly_supported = true;
            return;
        }
        let h = self.spacing();
        self.support =
            Some(SupportBox { x0: lo_x as f64 * h, x1: hi_x as f64 * h, y0: lo_y as f64 * h, y1: hi_y as f64 * h });
        self.compactly_supported = lo_x >= margin && lo_y >= margin && hi_x + margin < n && hi_y + margin < n;
    }

    /// ∫_{I²} by the tensor product of the grid's rule.
    pub fn integral(&self) -> f64 {
        let w = Stencils::new(self.n, self.rule).full;
        let mut total = 0.0;
        for iy in 0..self.n {
            let mut row = 0.0;
            for ix in 0..self.n {
                row += w[ix] * self.values[iy * self.n + ix];
            }
            total += w[iy] * row;
        }
        total
    }

    /// CSV export: a comment header with n and the support box, then
    /// `x,y,value` rows in row-major order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let sup = match self.support {
            Some(b) => format!("{},{},{},{}", b.x0, b.x1, b.y0, b.y1),
            None => "none".to_string(),
        };
        let _ = writeln!(out, "# n={} support={}", self.n, sup);
        out.push_str("x,y,value\n");
        for iy in 0..self.n {
            for ix in 0..self.n {
                let _ = writeln!(out, "{},{},{}", self.node(ix), self.node(iy), self.at(ix, iy));
            }
        }
        out
    }
}

/// A 1-form P dx + Q dy on I².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneForm2D {
    pub dx: GridFunction2D,
    pub dy: GridFunction2D,
}

/// Unit-integral bump χ(y) = C (1 − t²)^k with t the affine coordinate of
/// the support interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitBump {
    pub support: (f64, f64),
    pub power: u32,
    norm: f64,
}

impl Default for UnitBump {
    fn default() -> Self {
        UnitBump::new(0.3, 0.7, 6).expect("valid default bump")
    }
}

impl UnitBump {
    pub fn new(a: f64, b: f64, power: u32) -> Result<Self> {
        if !(0.0 < a && a < b && b < 1.0) || power < 2 {
            return Err(ReebError::config("bump support must satisfy 0 < a < b < 1 and power ≥ 2"));
        }
        // The profile is a polynomial of degree 2k in t; Gauss–Legendre with
        // k+1 nodes integrates it exactly.
        let (x, w) = gauss_legendre_unit(power as usize + 2);
        let raw: f64 = x.iter().zip(&w).map(|(t, wi)| wi * (1.0 - (2.0 * t - 1.0).powi(2)).powi(power as i32)).sum();
        let norm = 1.0 / (raw * (b - a));
        Ok(UnitBump { support: (a, b), power, norm })
    }

    pub fn eval(&self, y: f64) -> f64 {
        let (a, b) = self.support;
        if y <= a || y >= b {
            return 0.0;
        }
        let t = (2.0 * y - a - b) / (b - a);
        self.norm * (1.0 - t * t).powi(self.power as i32)
    }

    /// Samples at the n grid nodes.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.eval(i as f64 / (n - 1) as f64)).collect()
    }
}

/// Interpolatory weights on a uniform grid of n nodes over [0, 1].
#[derive(Debug, Clone)]
pub(crate) struct Stencils {
    /// Per cell [x_i, x_{i+1}]: first node and weights.
    pub cell: Vec<(usize, Vec<f64>)>,
    /// Per node: first node and first-derivative weights.
    pub deriv: Vec<(usize, Vec<f64>)>,
    /// Node weights of the full integral.
    pub full: Vec<f64>,
}

impl Stencils {
    pub fn new(n: usize, rule: QuadratureRule) -> Self {
        let p = rule.points();
        let h = 1.0 / (n - 1) as f64;
        let offsets: Vec<f64> = (0..p).map(|k| k as f64).collect();
        let mut cell = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let start = i.saturating_sub(p / 2 - 1).min(n - p);
            let at = (i - start) as f64;
            // ∫_at^{at+1} p(t) dt = Σ_k p^{(k)}(at) / (k+1)!
            let dw = crate::linalg::derivative_weights(&offsets, at, p - 1).expect("distinct nodes");
            let mut w = vec![0.0; p];
            let mut fact = 1.0;
            for (k, row) in dw.iter().enumerate() {
                fact *= (k + 1) as f64;
                for j in 0..p {
                    w[j] += row[j] / fact * h;
                }
            }
            cell.push((start, w));
        }
        let q = p + 1;
        let doff: Vec<f64> = (0..q).map(|k| k as f64).collect();
        let deriv = (0..n)
            .map(|i| {
                let start = i.saturating_sub(q / 2).min(n - q);
                let dw = crate::linalg::derivative_weights(&doff, (i - start) as f64, 1).expect("distinct nodes");
                (start, dw[1].iter().map(|w| w / h).collect())
            })
            .collect();
        let mut full = vec![0.0; n];
        for (start, w) in &cell {
            for (k, wk) in w.iter().enumerate() {
                full[start + k] += wk;
            }
        }
        Stencils { cell, deriv, full }
    }

    fn cell_integral(&self, f: &[f64], i: usize) -> f64 {
        let (start, w) = &self.cell[i];
        w.iter().zip(&f[*start..]).map(|(a, b)| a * b).sum()
    }

    /// Cumulative integral ∫_0^{x_i} f for nodes in the left half and
    /// −∫_{x_i}^1 f for nodes in the right half. Both agree when ∫_0^1 f = 0;
    /// the split keeps the result exactly zero wherever f vanishes up to the
    /// nearer end of the interval.
    pub fn split_cumulative(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let mid = (n - 1) / 2;
        let mut out = vec![0.0; n];
        for i in 0..mid {
            out[i + 1] = out[i] + self.cell_integral(f, i);
        }
        let mut acc = 0.0;
        for i in (mid + 1..n).rev() {
            out[i] = -acc;
            acc += self.cell_integral(f, i - 1);
        }
        out
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        self.deriv.iter().map(|(start, w)| w.iter().zip(&f[*start..]).map(|(a, b)| a * b).sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bump_has_unit_integral() {
        let chi = UnitBump::default();
        let (x, w) = gauss_legendre_unit(40);
        let s: f64 = x.iter().zip(&w).map(|(t, wi)| wi * 0.4 * chi.eval(0.3 + 0.4 * t)).sum();
        assert!((s - 1.0).abs() < 1e-10);
        assert_eq!(chi.eval(0.3), 0.0);
        assert_eq!(chi.eval(0.71), 0.0);
    }

    #[test]
    fn cumulative_is_fourth_order() {
        let f = |x: f64| (3.0 * x).cos();
        let err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
            let w = Stencils::new(n, QuadratureRule::Cubic4).full;
            let s: f64 = w.iter().zip(&vals).map(|(a, b)| a * b).sum();
            (s - (3.0f64).sin() / 3.0).abs()
        };
        let (e1, e2) = (err(33), err(65));
        assert!(e1 / e2 > 12.0, "{e1} {e2}");
    }

    #[test]
    fn split_cumulative_matches_primitive() {
        let n = 129;
        let h = 1.0 / (n - 1) as f64;
        let f: Vec<f64> = (0..n).map(|i| (std::f64::consts::TAU * i as f64 * h).sin()).collect();
        let c = Stencils::new(n, QuadratureRule::Quintic6).split_cumulative(&f);
        for (i, ci) in c.iter().enumerate() {
            let x = i as f64 * h;
            let want = (1.0 - (std::f64::consts::TAU * x).cos()) / std::f64::consts::TAU;
            assert!((ci - want).abs() < 1e-10);
        }
    }

    #[test]
    fn cubic_rule_matches_closed_form_weights() {
        let st = Stencils::new(9, QuadratureRule::Cubic4);
        let h = 1.0 / 8.0;
        let want = [[9.0, 19.0, -5.0, 1.0], [-1.0, 13.0, 13.0, -1.0]];
        for (i, w) in want.iter().enumerate() {
            for k in 0..4 {
                assert!((st.cell[i].1[k] - h / 24.0 * w[k]).abs() < 1e-14);
            }
        }
        assert_eq!(st.cell[1].0, 0);
        assert_eq!(st.cell[7].0, 5);
    }

    #[test]
    fn quintic_rule_integrates_quintics_exactly() {
        let n = 11;
        let st = Stencils::new(n, QuadratureRule::Quintic6);
        let f: Vec<f64> = (0..n).map(|i| (i as f64 / 10.0).powi(5)).collect();
        let s: f64 = st.full.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert!((s - 1.0 / 6.0).abs() < 1e-14);
        let d = st.derivative(&f);
        assert!((d[n - 1] - 5.0).abs() < 1e-11);
    }

    #[test]
    fn derivative_is_accurate_at_edges() {
        let n = 65;
        let h = 1.0 / (n - 1) as f64;
        let f: Vec<f64> = (0..n).map(|i| (2.0 * i as f64 * h).exp()).collect();
        let d = Stencils::new(n, QuadratureRule::Cubic4).derivative(&f);
        for (i, di) in d.iter().enumerate() {
            let want = 2.0 * (2.0 * i as f64 * h).exp();
            assert!((di - want).abs() < 1e-5 * want, "{i}");
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = GridFunction2D::from_fn(8, |x, y| x * y, Exec::Sequential).unwrap();
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# n=8"));
        assert_eq!(lines[1], "x,y,value");
        assert_eq!(lines.len(), 2 + 64);
        assert!(!csv.contains('\r'));
    }
}
