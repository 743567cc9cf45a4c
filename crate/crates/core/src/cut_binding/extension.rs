use super::chart::{binding_function_f, BindingChart};
use super::fourier;
use crate::disc_calculus::Hamiltonian;
use crate::exec::{try_par_map, Exec};
use crate::linalg::derivative_weights;
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtensionSettings {
    pub k_max: usize,
    pub rho0: f64,
    pub rungs: usize,
    pub n_directions: usize,
    pub n_b: usize,
    /// Rungs per side of a line fit; the one-sided C⁰ fit uses one more.
    pub window: usize,
    /// Limit rotation a in the model jet (h + a)(2 − ρ²), when known.
    pub expected_a: Option<f64>,
    /// Order-k tolerance is `tol_scale·(k + 1)`.
    pub tol_scale: f64,
    pub b_offset: f64,
    pub vartheta_offset: f64,
    pub exec: Exec,
}

impl Default for ExtensionSettings {
    fn default() -> Self {
        ExtensionSettings {
            k_max: 4,
            rho0: 0.1,
            rungs: 12,
            n_directions: 64,
            n_b: 4,
            window: 3,
            expected_a: None,
            tol_scale: 1e-4,
            b_offset: 0.0,
            vartheta_offset: 0.0,
            exec: Exec::Parallel,
        }
    }
}

impl ExtensionSettings {
    pub fn validate(&self, chart: &BindingChart) -> Result<()> {
        chart.validate()?;
        if !(self.rho0 > 0.0 && self.rho0 < chart.rho_max()) {
            return Err(ReebError::config(format!(
                "ladder start ρ₀ = {} leaves the chart (ρ < {})",
                self.rho0,
                chart.rho_max()
            )));
        }
        if self.window < 2 || self.rungs < self.window + 2 || self.rungs < 4 {
            return Err(ReebError::config("ladder needs window ≥ 2, rungs ≥ max(window + 2, 4)"));
        }
        if 2 * self.window <= self.k_max {
            return Err(ReebError::config("k_max must be below 2·window"));
        }
        if self.n_directions < 8 || self.n_directions % 4 != 0 {
            return Err(ReebError::config("n_directions must be a multiple of 4, at least 8"));
        }
        if self.n_b == 0 || !(self.tol_scale > 0.0) {
            return Err(ReebError::config("n_b ≥ 1 and tol_scale > 0 required"));
        }
        Ok(())
    }

    pub fn tolerance(&self, k: usize) -> f64 {
        self.tol_scale * (k + 1) as f64
    }

    pub fn rho(&self, m: usize) -> f64 {
        self.rho0 * 0.5f64.powi(m as i32)
    }

    pub fn vartheta(&self, j: usize) -> f64 {
        self.vartheta_offset + 2.0 * PI * j as f64 / self.n_directions as f64
    }

    pub fn b(&self, i: usize) -> f64 {
        self.b_offset + 2.0 * PI * i as f64 / self.n_b as f64
    }
}

/// Rounding model for a lifted function: error ≈ scale·ε/ρ^power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub scale: f64,
    pub power: i32,
}

impl NoiseModel {
    pub fn at(&self, rho: f64) -> f64 {
        self.scale * f64::EPSILON / rho.powi(self.power)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub order: usize,
    pub pass: bool,
    pub tolerance: f64,
    /// C⁰: max over b of max_ϑ |f(0) − mean|. Higher orders: the larger of the
    /// Fourier modes a degree-k homogeneous jet cannot have and the gap to the
    /// staggered fit.
    pub structure_defect: f64,
    /// Change between the selected window and the next coarser one.
    pub uniformity: f64,
    pub model_deviation: Option<f64>,
    pub noise_bound: f64,
    pub admissible_windows: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RungDiagnostics {
    pub rho: f64,
    /// max |u_x − u_x(0)| and max |u_y − u_y(0)| over b, ϑ
    pub ux_deviation: f64,
    pub uy_deviation: f64,
    pub fxx_deviation: f64,
    /// max |·| of the five polar terms of f_xx
    pub fxx_terms: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
/// Jet entries for orders ≥ 1 are Taylor coefficients D_k/k! of the lines
/// through the origin, so the model jet of (h + a)(2 − ρ²) is −(h + a) at order 2.
pub struct ExtensionReport {
    pub h: u32,
    pub rho: Vec<f64>,
    pub vartheta: Vec<f64>,
    pub b: Vec<f64>,
    /// samples[i][m][j] = f̃(b_i, ρ_m, ϑ_j)
    pub samples: Vec<Vec<Vec<f64>>>,
    /// Directional limits at ρ = 0 from the selected window, [i][j].
    pub f0: Vec<Vec<f64>>,
    pub f0_mean: f64,
    pub direction_spread: f64,
    /// f0_mean/2 − h
    pub effective_a: f64,
    pub f_rho0: Vec<Vec<f64>>,
    pub f_rhorho0: Vec<Vec<f64>>,
    pub orders: Vec<OrderVerdict>,
    /// Highest order passed (with all lower ones), or None if C⁰ fails.
    pub smooth_order: Option<usize>,
    pub pass: bool,
    pub rung_diagnostics: Vec<RungDiagnostics>,
}

impl ExtensionReport {
    /// "rho,vartheta,f" rows for the b-sample `i`.
    pub fn profile_csv(&self, i: usize) -> String {
        let mut s = String::from("rho,vartheta,f\n");
        if let Some(rows) = self.samples.get(i) {
            for (m, row) in rows.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    s.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", self.rho[m], self.vartheta[j], v));
                }
            }
        }
        s
    }
}

/// Extension test for f = (H∘Φ − h(1 − ρ²)²)/ρ².
pub fn extension_test(ham: &Hamiltonian, chart: &BindingChart, settings: &ExtensionSettings) -> Result<ExtensionReport> {
    settings.validate(chart)?;
    if ham.h() != chart.h {
        return Err(ReebError::config(format!("Hamiltonian has h = {}, chart has h = {}", ham.h(), chart.h)));
    }
    let lift = |b: f64, rho: f64, t: f64| binding_function_f(ham, chart, b, rho, t);
    let samples = sample(&lift, settings)?;
    let q = |r: f64| (1.0 - r * r).powi(2);
    let mut hmax = 0.0_f64;
    for (m, rr) in samples.iter().flat_map(|s| s.iter().enumerate()) {
        let r = settings.rho(m);
        for v in rr {
            hmax = hmax.max((v * r * r).abs() + chart.h as f64 * q(r));
        }
    }
    analyse(chart.h, samples, NoiseModel { scale: 2.0 * hmax, power: 2 }, settings)
}

/// Extension test for an arbitrary lifted function (b, ρ, ϑ) ↦ g̃.
pub fn extension_test_fn<F>(h: u32, lift: F, noise: NoiseModel, chart: &BindingChart, settings: &ExtensionSettings) -> Result<ExtensionReport>
where
    F: Fn(f64, f64, f64) -> Result<f64> + Sync,
{
    settings.validate(chart)?;
    let samples = sample(&lift, settings)?;
    analyse(h, samples, noise, settings)
}

fn sample<F>(lift: &F, st: &ExtensionSettings) -> Result<Vec<Vec<Vec<f64>>>>
where
    F: Fn(f64, f64, f64) -> Result<f64> + Sync,
{
    let (nb, nr, nd) = (st.n_b, st.rungs, st.n_directions);
    let rows = try_par_map(st.exec, nb * nr, |k| {
        let (i, m) = (k / nr, k % nr);
        (0..nd).map(|j| lift(st.b(i), st.rho(m), st.vartheta(j))).collect::<Result<Vec<f64>>>()
    })?;
    let mut it = rows.into_iter();
    Ok((0..nb).map(|_| (0..nr).map(|_| it.next().unwrap()).collect()).collect())
}

fn weights(nodes: &[f64], k: usize) -> Result<Vec<Vec<f64>>> {
    derivative_weights(nodes, 0.0, k).ok_or_else(|| ReebError::Construction("singular extrapolation stencil".into()))
}

fn dot(w: &[f64], v: impl Iterator<Item = f64>) -> f64 {
    w.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn analyse(h: u32, samples: Vec<Vec<Vec<f64>>>, noise: NoiseModel, st: &ExtensionSettings) -> Result<ExtensionReport> {
    let (nb, nr, nd, win) = (st.n_b, st.rungs, st.n_directions, st.window);
    let rho: Vec<f64> = (0..nr).map(|m| st.rho(m)).collect();
    let n_win = nr - win;
    let hf = h as f64;
    let model = st.expected_a.map(|a| hf + a);
    let mut orders = Vec::new();

    // Order 0: one-sided extrapolation of each ray.
    let tol0 = st.tolerance(0);
    let mut est0 = Vec::new();
    for w in 0..n_win {
        let nodes = &rho[w..w + win + 1];
        let wt = &weights(nodes, 0)?[0];
        let eta: f64 = wt.iter().zip(nodes).map(|(a, r)| a.abs() * noise.at(*r)).sum();
        let f0: Vec<Vec<f64>> = (0..nb)
            .map(|i| (0..nd).map(|j| dot(wt, (w..w + win + 1).map(|m| samples[i][m][j]))).collect())
            .collect();
        est0.push((eta, f0));
    }
    let adm0: Vec<usize> = (0..n_win).filter(|&w| est0[w].0 <= tol0 / 4.0).collect();
    let (finest0, uniformity0) = select(&adm0, |w| est0[w].0, |w| est0[w].1.iter().flatten().copied().collect());
    let f0 = est0[finest0].1.clone();
    let all0: Vec<f64> = f0.iter().flatten().copied().collect();
    let f0_mean = all0.iter().sum::<f64>() / all0.len() as f64;
    let direction_spread = f0
        .iter()
        .map(|row| {
            let mean = row.iter().sum::<f64>() / nd as f64;
            row.iter().fold(0.0_f64, |m, v| m.max((v - mean).abs()))
        })
        .fold(0.0_f64, f64::max);
    let model0 = model.map(|k| all0.iter().fold(0.0_f64, |m, v| m.max((v - 2.0 * k).abs())));
    orders.push(verdict(0, tol0, direction_spread, uniformity0, model0, est0[finest0].0, adm0.len(), true));

    // Orders ≥ 1: Taylor coefficients of the line t ↦ f̃(|t|, ϑ or ϑ + π) through
    // the origin, from symmetric windows. A second fit with the t < 0 side moved
    // down one rung must agree; parity hides kinks like t|t| from symmetric fits.
    let half = nd / 2;
    let line = |w: usize, shift: usize| -> Result<(Vec<f64>, Vec<Vec<Vec<f64>>>)> {
        let neg = w + shift..w + shift + win;
        let mut nodes: Vec<f64> = neg.clone().rev().map(|m| -rho[m]).collect();
        nodes.extend((w..w + win).map(|m| rho[m]));
        let mut wt = weights(&nodes, st.k_max)?;
        let mut fact = 1.0;
        for (k, row) in wt.iter_mut().enumerate().skip(1) {
            fact *= k as f64;
            row.iter_mut().for_each(|a| *a /= fact);
        }
        let eta = wt.iter().map(|row| row.iter().zip(&nodes).map(|(a, t)| a.abs() * noise.at(t.abs())).sum()).collect();
        let d = (0..=st.k_max)
            .map(|k| {
                (0..nb)
                    .map(|i| {
                        (0..nd)
                            .map(|j| {
                                let jp = (j + half) % nd;
                                let vals = neg.clone().rev().map(|m| samples[i][m][jp]).chain((w..w + win).map(|m| samples[i][m][j]));
                                dot(&wt[k], vals)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok((eta, d))
    };
    let sym = (0..=nr - win).map(|w| line(w, 0)).collect::<Result<Vec<_>>>()?;
    let stag = (0..nr - win).map(|w| line(w, 1)).collect::<Result<Vec<_>>>()?;
    let mut all_lower = orders[0].pass;
    for k in 1..=st.k_max {
        let tol = st.tolerance(k);
        let adm: Vec<usize> = (0..sym.len()).filter(|&w| sym[w].0[k] <= tol / 4.0).collect();
        let (fin, unif) = select(&adm, |w| sym[w].0[k], |w| sym[w].1[k].iter().flatten().copied().collect());
        let dk = &sym[fin].1[k];
        let mut structure = dk
            .iter()
            .map(|row| {
                let c = fourier::coeffs(row);
                let bad = fourier::synth(&c, nd, |m| m > k || (m + k) % 2 == 1);
                bad.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
            })
            .fold(0.0_f64, f64::max);
        // Consistency with the staggered fit at the finest window admissible for both.
        let both = (0..stag.len()).filter(|&w| stag[w].0[k] <= tol / 4.0 && sym[w].0[k] <= tol / 4.0).last();
        let kink = match both {
            Some(w) => sym[w].1[k].iter().flatten().zip(stag[w].1[k].iter().flatten()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())),
            None => f64::INFINITY,
        };
        structure = structure.max(kink);
        let target = model.map(|hk| match k {
            2 => -hk,
            _ => 0.0,
        });
        let model_dev = target.map(|t| dk.iter().flatten().fold(0.0_f64, |m, v| m.max((v - t).abs())));
        let v = verdict(k, tol, structure, unif, model_dev, sym[fin].0[k], adm.len(), all_lower);
        all_lower = v.pass;
        orders.push(v);
    }
    let smooth_order = orders.iter().take_while(|o| o.pass).last().map(|o| o.order);
    let pass = orders.iter().all(|o| o.pass);

    // One-sided ρ-derivatives at 0 from the four coarsest rungs.
    let wr = weights(&rho[..4], 2)?;
    let f_rho0 = one_sided(&samples, &wr[1], nb, nd);
    let f_rhorho0 = one_sided(&samples, &wr[2], nb, nd);

    let rung_diagnostics = diagnostics(&samples, &rho, &f_rho0, &f_rhorho0, st)?;

    Ok(ExtensionReport {
        h,
        rho,
        vartheta: (0..nd).map(|j| st.vartheta(j)).collect(),
        b: (0..nb).map(|i| st.b(i)).collect(),
        samples,
        f0,
        f0_mean,
        direction_spread,
        effective_a: f0_mean / 2.0 - hf,
        f_rho0,
        f_rhorho0,
        orders,
        smooth_order,
        pass,
        rung_diagnostics,
    })
}

/// Among consecutive admissible windows, the one minimizing noise bound plus
/// change from its predecessor; returns it with that change.
fn select(adm: &[usize], eta: impl Fn(usize) -> f64, est: impl Fn(usize) -> Vec<f64>) -> (usize, f64) {
    let mut best = (*adm.last().unwrap_or(&0), f64::INFINITY, f64::INFINITY);
    for p in adm.windows(2) {
        let (a, b) = (est(p[0]), est(p[1]));
        let dev = a.iter().zip(&b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        let score = dev + eta(p[1]);
        if score < best.2 {
            best = (p[1], dev, score);
        }
    }
    (best.0, best.1)
}

#[allow(clippy::too_many_arguments)]
fn verdict(
    order: usize,
    tolerance: f64,
    structure_defect: f64,
    uniformity: f64,
    model_deviation: Option<f64>,
    noise_bound: f64,
    admissible_windows: usize,
    lower_pass: bool,
) -> OrderVerdict {
    let mut notes = Vec::new();
    if admissible_windows < 2 {
        notes.push(format!("only {admissible_windows} window(s) above the noise floor"));
    }
    if structure_defect > tolerance {
        notes.push(if order == 0 {
            format!("limit depends on direction (spread {structure_defect:.3e})")
        } else {
            format!("jet is not a homogeneous polynomial of degree {order} (defect {structure_defect:.3e})")
        });
    }
    if uniformity > tolerance && admissible_windows >= 2 {
        notes.push(format!("window-to-window deviation {uniformity:.3e}"));
    }
    if let Some(d) = model_deviation.filter(|d| *d > tolerance) {
        notes.push(format!("model jet deviation {d:.3e}"));
    }
    if !lower_pass {
        notes.push("a lower order failed".into());
    }
    OrderVerdict {
        order,
        pass: notes.is_empty(),
        tolerance,
        structure_defect,
        uniformity,
        model_deviation,
        noise_bound,
        admissible_windows,
        note: if notes.is_empty() { None } else { Some(notes.join("; ")) },
    }
}

fn one_sided(samples: &[Vec<Vec<f64>>], w: &[f64], nb: usize, nd: usize) -> Vec<Vec<f64>> {
    (0..nb).map(|i| (0..nd).map(|j| dot(w, (0..w.len()).map(|m| samples[i][m][j]))).collect()).collect()
}

/// Cartesian first and second derivatives at the origin from the angular
/// profiles of f̃_ρ(0,·) and f̃_ρρ(0,·), assuming the C² form of Lemma-type
/// identities f̃_ρ = u_x cos ϑ + u_y sin ϑ, f̃_ρρ = f_xx cos²ϑ + 2f_xy sinϑ cosϑ + f_yy sin²ϑ.
fn origin_jet(fr: &[f64], frr: &[f64], off: f64) -> (f64, f64, f64) {
    let c1 = fourier::coeffs(fr);
    let (a1, b1) = c1[1];
    let ux = a1 * off.cos() - b1 * off.sin();
    let uy = a1 * off.sin() + b1 * off.cos();
    let c2 = fourier::coeffs(frr);
    let (a2, b2) = c2[2];
    let fxx = c2[0].0 + a2 * (2.0 * off).cos() - b2 * (2.0 * off).sin();
    (ux, uy, fxx)
}

fn diagnostics(samples: &[Vec<Vec<f64>>], rho: &[f64], f_rho0: &[Vec<f64>], f_rr0: &[Vec<f64>], st: &ExtensionSettings) -> Result<Vec<RungDiagnostics>> {
    let nr = rho.len();
    let nd = st.n_directions;
    let mut out = Vec::with_capacity(nr);
    for m in 0..nr {
        let lo = m.saturating_sub(1).min(nr - 4);
        let nodes = &rho[lo..lo + 4];
        let w = derivative_weights(nodes, rho[m], 2).ok_or_else(|| ReebError::Construction("singular rung stencil".into()))?;
        let mut d = RungDiagnostics { rho: rho[m], ux_deviation: 0.0, uy_deviation: 0.0, fxx_deviation: 0.0, fxx_terms: [0.0; 5] };
        let r = rho[m];
        for (i, si) in samples.iter().enumerate() {
            let col = |k: usize| -> Vec<f64> { (0..nd).map(|j| dot(&w[k], (lo..lo + 4).map(|mm| si[mm][j]))).collect() };
            let (fr, frr) = (col(1), col(2));
            let ft = fourier::derivative(&si[m], 1);
            let ftt = fourier::derivative(&si[m], 2);
            let frt = fourier::derivative(&fr, 1);
            let (ux0, uy0, fxx0) = origin_jet(&f_rho0[i], &f_rr0[i], st.vartheta_offset);
            for j in 0..nd {
                let t = st.vartheta(j);
                let (sn, cs) = t.sin_cos();
                let ux = cs * fr[j] - sn / r * ft[j];
                let uy = sn * fr[j] + cs / r * ft[j];
                d.ux_deviation = d.ux_deviation.max((ux - ux0).abs());
                d.uy_deviation = d.uy_deviation.max((uy - uy0).abs());
                let terms = [
                    cs * cs * frr[j],
                    -2.0 * sn * cs / r * frt[j],
                    sn * sn / (r * r) * ftt[j],
                    sn * sn / r * fr[j],
                    2.0 * sn * cs / (r * r) * ft[j],
                ];
                for (a, b) in d.fxx_terms.iter_mut().zip(terms) {
                    *a = a.max(b.abs());
                }
                d.fxx_deviation = d.fxx_deviation.max((terms.iter().sum::<f64>() - fxx0).abs());
            }
        }
        out.push(d);
    }
    Ok(out)
}
