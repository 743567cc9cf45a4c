use crate::disc_calculus::{DiscPoint, Hamiltonian};
use crate::exec::{par_map, Exec};
use crate::isotopy_flow::{return_map, FlowSettings};
use crate::linalg::derivative_weights;
use crate::{ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JetSettings {
    /// Radial node spacing; nodes are r = 1 − j·step, j = 0..=K.
    pub step: f64,
    pub n_s: usize,
    pub n_theta: usize,
    pub exec: Exec,
}

impl Default for JetSettings {
    fn default() -> Self {
        JetSettings { step: 0.02, n_s: 8, n_theta: 32, exec: Exec::Parallel }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryJetReport {
    pub a: f64,
    pub order: usize,
    pub step: f64,
    /// defects[k] = max over (s, θ) of |∂_r^k (H_s − (h + a − a r²))| at r = 1.
    pub defects: Vec<f64>,
    /// Rounding bound Σ|w|·4ε·max|H| for each order.
    pub noise_bounds: Vec<f64>,
}

/// One-sided radial jets at r = 1 of H_s minus the radial model h + a − a r².
pub fn boundary_jet_check(ham: &Hamiltonian, a: f64, order: usize, settings: &JetSettings) -> Result<BoundaryJetReport> {
    if order > 6 {
        return Err(ReebError::config("boundary jets are available up to order 6"));
    }
    if !(settings.step > 0.0 && settings.step * order as f64 <= 0.5) || settings.n_s == 0 || settings.n_theta == 0 {
        return Err(ReebError::config("jet nodes must stay in r ≥ 0.5 and the sample grid must be nonempty"));
    }
    let model = Hamiltonian::quadratic(ham.h() as f64 + a, -a)?;
    let nodes: Vec<f64> = (0..=order).map(|j| 1.0 - j as f64 * settings.step).collect();
    let w = derivative_weights(&nodes, 1.0, order).ok_or_else(|| ReebError::config("degenerate jet nodes"))?;
    let rows = par_map(settings.exec, settings.n_s, |i| -> Result<(Vec<f64>, f64)> {
        let s = TAU * i as f64 / settings.n_s as f64;
        let mut worst = vec![0.0_f64; order + 1];
        let mut hmax = 0.0_f64;
        for k in 0..settings.n_theta {
            let t = TAU * k as f64 / settings.n_theta as f64;
            let mut d = Vec::with_capacity(nodes.len());
            for &r in &nodes {
                let p = DiscPoint::from_polar(r, t);
                let v = ham.try_value(s, p)?;
                hmax = hmax.max(v.abs());
                d.push(v - model.value(s, p));
            }
            for (kk, wk) in w.iter().enumerate() {
                let val: f64 = wk.iter().zip(&d).map(|(a, b)| a * b).sum();
                worst[kk] = worst[kk].max(val.abs());
            }
        }
        Ok((worst, hmax))
    });
    let mut defects = vec![0.0_f64; order + 1];
    let mut hmax = 0.0_f64;
    for row in rows {
        let (r, hm) = row?;
        hmax = hmax.max(hm);
        for (d, v) in defects.iter_mut().zip(r) {
            *d = d.max(v);
        }
    }
    let noise_bounds = w.iter().map(|wk| wk.iter().map(|x| x.abs()).sum::<f64>() * 4.0 * f64::EPSILON * hmax).collect();
    Ok(BoundaryJetReport { a, order, step: settings.step, defects, noise_bounds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitStatistics {
    pub p0: DiscPoint,
    pub requested: usize,
    pub completed: usize,
    pub aborted: Option<String>,
    pub r_bins: Vec<usize>,
    pub theta_bins: Vec<usize>,
    /// Birkhoff averages of r² and cos θ after each recorded iterate count.
    pub birkhoff: Vec<BirkhoffSample>,
    pub mean_r2: f64,
    pub mean_cos_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffSample {
    pub n: usize,
    pub r2: f64,
    pub cos_theta: f64,
}

impl OrbitStatistics {
    /// Histograms as "kind,bin,lo,hi,count".
    pub fn histograms_csv(&self) -> String {
        let mut s = String::from("kind,bin,lo,hi,count\n");
        let nr = self.r_bins.len() as f64;
        for (i, c) in self.r_bins.iter().enumerate() {
            let _ = writeln!(s, "r,{i},{},{},{c}", i as f64 / nr, (i + 1) as f64 / nr);
        }
        let nt = self.theta_bins.len() as f64;
        for (i, c) in self.theta_bins.iter().enumerate() {
            let _ = writeln!(s, "theta,{i},{},{},{c}", TAU * i as f64 / nt, TAU * (i + 1) as f64 / nt);
        }
        s
    }

    /// max over θ bins of |fraction − 1/bins|.
    pub fn theta_uniformity(&self) -> f64 {
        let n = self.theta_bins.iter().sum::<usize>().max(1) as f64;
        let target = 1.0 / self.theta_bins.len() as f64;
        self.theta_bins.iter().map(|&c| (c as f64 / n - target).abs()).fold(0.0, f64::max)
    }

    pub fn occupied_theta_bins(&self) -> usize {
        self.theta_bins.iter().filter(|&&c| c > 0).count()
    }
}

/// Iterates the return map N times from p0 and accumulates r and θ histograms
/// (θ binned on [0, 2π)) and Birkhoff averages. The orbit point p0 itself is
/// included. Integration failures or escapes end the run with partial data.
pub fn orbit_statistics(
    ham: &Hamiltonian,
    p0: DiscPoint,
    iterations: usize,
    bins: (usize, usize),
    flow: &FlowSettings,
) -> Result<OrbitStatistics> {
    if iterations > 1_000_000 {
        return Err(ReebError::config("orbit_statistics is limited to 1e6 iterations"));
    }
    if bins.0 == 0 || bins.1 == 0 {
        return Err(ReebError::config("histograms need at least one bin"));
    }
    if !p0.in_disc() {
        return Err(ReebError::pre("start point is outside the disc"));
    }
    let mut st = OrbitStatistics {
        p0,
        requested: iterations,
        completed: 0,
        aborted: None,
        r_bins: vec![0; bins.0],
        theta_bins: vec![0; bins.1],
        birkhoff: Vec::new(),
        mean_r2: 0.0,
        mean_cos_theta: 0.0,
    };
    let (mut s_r2, mut s_cos) = (0.0, 0.0);
    let mut p = p0;
    let mut next_record = 1usize;
    for n in 0..=iterations {
        if n > 0 {
            match return_map(ham, p, flow) {
                Ok(q) if q.r() <= 1.0 + 1e-6 => p = q,
                Ok(q) => {
                    st.aborted = Some(format!("orbit left the disc at iterate {n} (r = {})", q.r()));
                    break;
                }
                Err(e) => {
                    st.aborted = Some(format!("iterate {n}: {e}"));
                    break;
                }
            }
            st.completed = n;
        }
        let r = p.r().min(1.0);
        let rb = ((r * bins.0 as f64) as usize).min(bins.0 - 1);
        st.r_bins[rb] += 1;
        let cos_t = if r > 0.0 { p.x / p.r() } else { 1.0 };
        if r > 0.0 {
            let t = p.y.atan2(p.x).rem_euclid(TAU);
            let tb = ((t / TAU * bins.1 as f64) as usize).min(bins.1 - 1);
            st.theta_bins[tb] += 1;
        }
        s_r2 += p.r2();
        s_cos += cos_t;
        let count = n + 1;
        if count == next_record || n == iterations {
            st.birkhoff.push(BirkhoffSample { n: count, r2: s_r2 / count as f64, cos_theta: s_cos / count as f64 });
            next_record *= 2;
        }
    }
    let count = (st.completed + 1) as f64;
    st.mean_r2 = s_r2 / count;
    st.mean_cos_theta = s_cos / count;
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudorotation_lab::{conjugated_stage, Conjugator, ConjugatorSettings, ConjugatorSpec};

    fn js() -> JetSettings {
        JetSettings { exec: Exec::Sequential, ..Default::default() }
    }

    #[test]
    fn exact_model_has_zero_jets() {
        let a = 1.0 / 3.0;
        let ham = Hamiltonian::rigid_rotation(2, 1, 3).unwrap();
        let rep = boundary_jet_check(&ham, a, 6, &js()).unwrap();
        assert!(rep.defects.iter().all(|&d| d <= 1e-8), "{:?}", rep.defects);
    }

    #[test]
    fn stage_jets_against_stage_and_limit() {
        let phi = Conjugator::new(ConjugatorSpec::new(0.2, 0.2, 1), ConjugatorSettings::default()).unwrap();
        let st = conjugated_stage(2, 2, 3, &phi).unwrap();
        let rep = boundary_jet_check(&st.hamiltonian, 2.0 / 3.0, 4, &JetSettings { step: 0.04, ..js() }).unwrap();
        assert!(rep.defects.iter().all(|&d| d <= 1e-8), "{:?}", rep.defects);
        let g = 2.0 / (1.0 + 5f64.sqrt());
        let rep = boundary_jet_check(&st.hamiltonian, g, 4, &JetSettings { step: 0.04, ..js() }).unwrap();
        let want = 2.0 * (g - 2.0 / 3.0).abs();
        assert!((rep.defects[2] - want).abs() < 1e-8, "{:?} {want}", rep.defects);
        assert!((rep.defects[1] - want).abs() < 1e-8);
        assert!(boundary_jet_check(&st.hamiltonian, g, 7, &js()).is_err());
    }

    #[test]
    fn rigid_orbit_statistics() {
        let flow = FlowSettings { exec: Exec::Sequential, ..FlowSettings::with_steps(600) };
        let ham = Hamiltonian::rigid_rotation(2, 1, 3).unwrap();
        let st = orbit_statistics(&ham, DiscPoint::new(0.5, 0.2), 30, (10, 48), &flow).unwrap();
        assert_eq!(st.completed, 30);
        assert_eq!(st.occupied_theta_bins(), 3);
        assert_eq!(st.r_bins.iter().filter(|&&c| c > 0).count(), 1);
        let st = orbit_statistics(&ham, DiscPoint::ORIGIN, 5, (4, 4), &flow).unwrap();
        assert_eq!(st.r_bins[0], 6);
        assert!((st.mean_r2).abs() < 1e-15);
        assert!(st.histograms_csv().lines().count() == 1 + 8);
    }

    #[test]
    fn large_denominator_equidistributes() {
        let flow = FlowSettings { exec: Exec::Sequential, ..FlowSettings::with_steps(400) };
        let ham = Hamiltonian::rigid_rotation(2, 21, 34).unwrap();
        let st = orbit_statistics(&ham, DiscPoint::new(0.65, 0.0), 135, (10, 16), &flow).unwrap();
        assert!(st.theta_uniformity() < 0.03, "{}", st.theta_uniformity());
        assert_eq!(st.r_bins.iter().filter(|&&c| c > 0).count(), 1);
    }
}
