//! Direct DFT on equispaced periodic samples; sizes here are small.

use std::f64::consts::PI;

/// Coefficients (a_m, b_m), m = 0..=n/2, with v_j = a_0 + Σ a_m cos(mϑ_j) + b_m sin(mϑ_j).
pub(crate) fn coeffs(v: &[f64]) -> Vec<(f64, f64)> {
    let n = v.len();
    let half = n / 2;
    (0..=half)
        .map(|m| {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, &x) in v.iter().enumerate() {
                let t = 2.0 * PI * (m * j % n) as f64 / n as f64;
                a += x * t.cos();
                b += x * t.sin();
            }
            let k = if m == 0 || (n % 2 == 0 && m == half) { 1.0 } else { 2.0 };
            (a * k / n as f64, b * k / n as f64)
        })
        .collect()
}

pub(crate) fn synth(c: &[(f64, f64)], n: usize, keep: impl Fn(usize) -> bool) -> Vec<f64> {
    (0..n)
        .map(|j| {
            c.iter()
                .enumerate()
                .filter(|(m, _)| keep(*m))
                .map(|(m, &(a, b))| {
                    let t = 2.0 * PI * (m * j % n) as f64 / n as f64;
                    a * t.cos() + b * t.sin()
                })
                .sum()
        })
        .collect()
}

/// Spectral derivative of order 1 or 2; the Nyquist mode is dropped for odd orders.
pub(crate) fn derivative(v: &[f64], order: u32) -> Vec<f64> {
    let n = v.len();
    let c = coeffs(v);
    let half = n / 2;
    let d: Vec<(f64, f64)> = c
        .iter()
        .enumerate()
        .map(|(m, &(a, b))| {
            let w = m as f64;
            match order {
                1 if n % 2 == 0 && m == half => (0.0, 0.0),
                1 => (w * b, -w * a),
                _ => (-w * w * a, -w * w * b),
            }
        })
        .collect();
    synth(&d, n, |_| true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_derivatives() {
        let n = 16;
        let f = |t: f64| 0.3 + (2.0 * t).cos() - 0.5 * (3.0 * t).sin();
        let v: Vec<f64> = (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect();
        let back = synth(&coeffs(&v), n, |_| true);
        let d1 = derivative(&v, 1);
        let d2 = derivative(&v, 2);
        for j in 0..n {
            let t = 2.0 * PI * j as f64 / n as f64;
            assert!((back[j] - v[j]).abs() < 1e-13);
            assert!((d1[j] - (-2.0 * (2.0 * t).sin() - 1.5 * (3.0 * t).cos())).abs() < 1e-12);
            assert!((d2[j] - (-4.0 * (2.0 * t).cos() + 4.5 * (3.0 * t).sin())).abs() < 1e-12);
        }
    }
}
