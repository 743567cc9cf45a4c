use crate::disc_calculus::{DiscPoint, Hamiltonian};
use crate::linalg::Mat2;
use crate::{Exec, ReebError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSettings {
    pub integrator: Integrator,
    /// Fixed step for RK4, initial step for RK45.
    pub step: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    pub exec: Exec,
}

impl Default for FlowSettings {
    fn default() -> Self {
        FlowSettings {
            integrator: Integrator::Rk4,
            step: TAU / 2000.0,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_steps: 1_000_000,
            exec: Exec::Parallel,
        }
    }
}

impl FlowSettings {
    pub fn with_steps(n: usize) -> Self {
        FlowSettings { step: TAU / n as f64, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(ReebError::config("flow step must be positive"));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(ReebError::config("flow tolerances must be positive"));
        }
        if self.max_steps == 0 {
            return Err(ReebError::config("max_steps must be positive"));
        }
        Ok(())
    }
}

/// Disc component of the flow of ∂_s + X_s, sampled at integrator steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowPath {
    pub s: Vec<f64>,
    pub points: Vec<DiscPoint>,
}

impl FlowPath {
    pub fn start(&self) -> DiscPoint {
        self.points[0]
    }

    pub fn end(&self) -> DiscPoint {
        *self.points.last().expect("non-empty path")
    }
}

/// Path with the fundamental solution J(s) of the variational equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalPath {
    pub s: Vec<f64>,
    pub points: Vec<DiscPoint>,
    pub jacobians: Vec<Mat2>,
}

const ESCAPE_TOL: f64 = 1e-6;

fn field(ham: &Hamiltonian, s: f64, y: &[f64; 2]) -> [f64; 2] {
    let g = ham.gradient(s, DiscPoint::new(y[0], y[1]));
    [0.5 * g[1], -0.5 * g[0]]
}

fn field_var(ham: &Hamiltonian, s: f64, y: &[f64; 6]) -> [f64; 6] {
    let p = DiscPoint::new(y[0], y[1]);
    let g = ham.gradient(s, p);
    let h = ham.hessian(s, p);
    // DX = [[H_xy/2, H_yy/2], [−H_xx/2, −H_xy/2]], J' = DX J with J = [[y2, y3], [y4, y5]].
    let a = 0.5 * h[1];
    let b = 0.5 * h[2];
    let c = -0.5 * h[0];
    let d = -0.5 * h[1];
    [
        0.5 * g[1],
        -0.5 * g[0],
        a * y[2] + b * y[4],
        a * y[3] + b * y[5],
        c * y[2] + d * y[4],
        c * y[3] + d * y[5],
    ]
}

fn axpy<const N: usize>(y: &[f64; N], k: f64, d: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += k * d[i];
    }
    out
}

fn rk4_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(f: &F, s: f64, y: &[f64; N], h: f64) -> [f64; N] {
    let k1 = f(s, y);
    let k2 = f(s + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(s + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(s + h, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dp_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    f: &F,
    s: f64,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N]) {
    let mut k = [[0.0; N]; 7];
    for st in 0..7 {
        let mut yi = *y;
        for j in 0..st {
            if DP_A[st][j] != 0.0 {
                for i in 0..N {
                    yi[i] += h * DP_A[st][j] * k[j][i];
                }
            }
        }
        k[st] = f(s + DP_C[st] * h, &yi);
    }
    let mut y5 = *y;
    let mut y4 = *y;
    for st in 0..7 {
        for i in 0..N {
            y5[i] += h * DP_B5[st] * k[st][i];
            y4[i] += h * DP_B4[st] * k[st][i];
        }
    }
    (y5, y4)
}

fn fail<const N: usize>(s: f64, y: &[f64; N], reason: impl Into<String>) -> ReebError {
    ReebError::Integration { s, x: y[0], y: y[1], reason: reason.into() }
}

fn check_state<const N: usize>(s: f64, y: &[f64; N], last: &[f64; N]) -> Result<()> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(fail(s, last, "non-finite state"));
    }
    if y[0].hypot(y[1]) > 1.0 + ESCAPE_TOL {
        return Err(fail(s, last, "trajectory left the closed disc"));
    }
    Ok(())
}

/// Integrate `f` from s0 to s1, calling `record` at every accepted step.
pub(crate) fn drive<const N: usize, F, R>(
    f: &F,
    y0: [f64; N],
    s0: f64,
    s1: f64,
    settings: &FlowSettings,
    mut record: R,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    R: FnMut(f64, &[f64; N]),
{
    settings.validate()?;
    let span = s1 - s0;
    record(s0, &y0);
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    match settings.integrator {
        Integrator::Rk4 => {
            let n = (span.abs() / settings.step).ceil().max(1.0) as usize;
            if n > settings.max_steps {
                return Err(fail(s0, &y0, format!("{n} steps exceed max_steps")));
            }
            let h = span / n as f64;
            let mut y = y0;
            for i in 0..n {
                let s = s0 + i as f64 * h;
                let next = rk4_step(f, s, &y, h);
                check_state(s + h, &next, &y)?;
                y = next;
                let s_next = if i + 1 == n { s1 } else { s0 + (i + 1) as f64 * h };
                record(s_next, &y);
            }
            Ok(y)
        }
        Integrator::Rk45 => {
            let mut y = y0;
            let mut s = s0;
            let mut h = settings.step.min(span.abs()) * dir;
            let mut steps = 0usize;
            while (s1 - s) * dir > 0.0 {
                if steps >= settings.max_steps {
                    return Err(fail(s, &y, "max_steps exceeded"));
                }
                steps += 1;
                if (s + h - s1) * dir > 0.0 {
                    h = s1 - s;
                }
                let (y5, y4) = dp_step(f, s, &y, h);
                let mut err = 0.0_f64;
                for i in 0..N {
                    let sc = settings.abs_tol + settings.rel_tol * y[i].abs().max(y5[i].abs());
                    err = err.max(((y5[i] - y4[i]) / sc).abs());
                }
                if !err.is_finite() {
                    h *= 0.2;
                } else if err <= 1.0 {
                    check_state(s + h, &y5, &y)?;
                    s = if (s + h - s1) * dir >= 0.0 { s1 } else { s + h };
                    y = y5;
                    record(s, &y);
                    h *= (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                } else {
                    h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                }
                if h.abs() < 1e-14 * s.abs().max(1.0) {
                    return Err(fail(s, &y, "step size underflow"));
                }
            }
            Ok(y)
        }
    }
}

/// Flow of dp/ds = X_s(p) from s0 to s1.
pub fn integrate_isotopy(ham: &Hamiltonian, p0: DiscPoint, s0: f64, s1: f64, settings: &FlowSettings) -> Result<FlowPath> {
    check_start(p0)?;
    let f = |s: f64, y: &[f64; 2]| field(ham, s, y);
    let mut path = FlowPath { s: Vec::new(), points: Vec::new() };
    drive(&f, [p0.x, p0.y], s0, s1, settings, |s, y| {
        path.s.push(s);
        path.points.push(DiscPoint::new(y[0], y[1]));
    })?;
    Ok(path)
}

/// Endpoint of the flow without storing the path.
pub fn flow_endpoint(ham: &Hamiltonian, p0: DiscPoint, s0: f64, s1: f64, settings: &FlowSettings) -> Result<DiscPoint> {
    check_start(p0)?;
    let f = |s: f64, y: &[f64; 2]| field(ham, s, y);
    let y = drive(&f, [p0.x, p0.y], s0, s1, settings, |_, _| {})?;
    Ok(DiscPoint::new(y[0], y[1]))
}

/// Endpoint and Jacobian of the flow from s0 to s1.
pub fn flow_with_jacobian(
    ham: &Hamiltonian,
    p0: DiscPoint,
    s0: f64,
    s1: f64,
    settings: &FlowSettings,
) -> Result<(DiscPoint, Mat2)> {
    check_start(p0)?;
    let f = |s: f64, y: &[f64; 6]| field_var(ham, s, y);
    let y = drive(&f, [p0.x, p0.y, 1.0, 0.0, 0.0, 1.0], s0, s1, settings, |_, _| {})?;
    Ok((DiscPoint::new(y[0], y[1]), Mat2::new(y[2], y[3], y[4], y[5])))
}

/// Path together with J(s).
pub fn variational_path(
    ham: &Hamiltonian,
    p0: DiscPoint,
    s0: f64,
    s1: f64,
    settings: &FlowSettings,
) -> Result<VariationalPath> {
    check_start(p0)?;
    let f = |s: f64, y: &[f64; 6]| field_var(ham, s, y);
    let mut out = VariationalPath { s: Vec::new(), points: Vec::new(), jacobians: Vec::new() };
    drive(&f, [p0.x, p0.y, 1.0, 0.0, 0.0, 1.0], s0, s1, settings, |s, y| {
        out.s.push(s);
        out.points.push(DiscPoint::new(y[0], y[1]));
        out.jacobians.push(Mat2::new(y[2], y[3], y[4], y[5]));
    })?;
    Ok(out)
}

fn check_start(p: DiscPoint) -> Result<()> {
    if !p.is_finite() || !p.in_disc() {
        return Err(ReebError::pre(format!("start point ({}, {}) is not in the closed disc", p.x, p.y)));
    }
    Ok(())
}
