use super::grid::{GridFunction2D, OneForm2D, QuadratureRule, Stencils, UnitBump};
use crate::exec::{par_map, Exec};
use crate::{ReebError, Result};

/// Total-integral tolerance for the primitive to exist.
pub const ZERO_INTEGRAL_TOL: f64 = 1e-8;

/// Compactly supported β with dβ = η for η = g dx∧dy of zero total integral.
///
/// a(x) = ∫ g(x,y) dy, b(x) = ∫_0^x a, u = −g + a(x)χ(y), v(x,y) = ∫_0^y u,
/// and β = v dx + b(x)χ(y) dy.
pub fn poincare_primitive(eta: &GridFunction2D, chi: &UnitBump, exec: Exec) -> Result<OneForm2D> {
    let n = eta.n;
    let total = eta.integral();
    if total.abs() > ZERO_INTEGRAL_TOL {
        return Err(ReebError::pre(format!("∫η = {total:e} is not zero (tolerance {ZERO_INTEGRAL_TOL:e})")));
    }
    let st = Stencils::new(n, eta.rule);
    let w = &st.full;
    let chi_s = chi.sample(n);

    let a: Vec<f64> = par_map(exec, n, |ix| (0..n).map(|iy| w[iy] * eta.at(ix, iy)).sum());
    let b = st.split_cumulative(&a);

    // v column by column.
    let cols = par_map(exec, n, |ix| {
        let u: Vec<f64> = (0..n).map(|iy| -eta.at(ix, iy) + a[ix] * chi_s[iy]).collect();
        st.split_cumulative(&u)
    });
    let mut v = vec![0.0; n * n];
    let mut q = vec![0.0; n * n];
    for iy in 0..n {
        for ix in 0..n {
            v[iy * n + ix] = cols[ix][iy];
            q[iy * n + ix] = b[ix] * chi_s[iy];
        }
    }
    Ok(OneForm2D {
        dx: GridFunction2D::from_values(n, v)?.with_rule(eta.rule),
        dy: GridFunction2D::from_values(n, q)?.with_rule(eta.rule),
    })
}

/// dβ = (∂x Q − ∂y P) dx∧dy by differences of the grid's order.
pub fn exterior_derivative(beta: &OneForm2D, exec: Exec) -> Result<GridFunction2D> {
    let n = beta.dx.n;
    if beta.dy.n != n {
        return Err(ReebError::config("1-form components live on different grids"));
    }
    let st = Stencils::new(n, beta.dx.rule);
    let qx_rows = par_map(exec, n, |iy| st.derivative(&beta.dy.values[iy * n..(iy + 1) * n]));
    let py_cols = par_map(exec, n, |ix| {
        let col: Vec<f64> = (0..n).map(|iy| beta.dx.at(ix, iy)).collect();
        st.derivative(&col)
    });
    let mut out = vec![0.0; n * n];
    for iy in 0..n {
        for ix in 0..n {
            out[iy * n + ix] = qx_rows[iy][ix] - py_cols[ix][iy];
        }
    }
    Ok(GridFunction2D::from_values(n, out)?.with_rule(beta.dx.rule))
}

/// ‖dβ − η‖_∞ on the grid.
pub fn primitive_residual(beta: &OneForm2D, eta: &GridFunction2D, exec: Exec) -> Result<f64> {
    let d = exterior_derivative(beta, exec)?;
    Ok(d.values.iter().zip(&eta.values).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
}

/// Polynomial bump (1 − t²)^k on [a, b] with its first derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyBump {
    pub a: f64,
    pub b: f64,
    pub power: i32,
}

impl PolyBump {
    pub fn new(a: f64, b: f64, power: i32) -> Self {
        PolyBump { a, b, power }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        (1.0 - t * t).powi(self.power)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        let k = 2.0 / (self.b - self.a);
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        self.power as f64 * (1.0 - t * t).powi(self.power - 1) * (-2.0 * t) * k
    }
}

/// Zero-integral test densities g(x, y) with closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaFixture {
    /// ∂x(bump)·bump
    DerivativeProduct,
    /// difference of two translated copies of one bump
    TranslatedPair,
    /// ∂y of sin(3x)·bump(x)·bump(y)
    ModulatedDerivative,
}

impl EtaFixture {
    pub const ALL: [EtaFixture; 3] =
        [EtaFixture::DerivativeProduct, EtaFixture::TranslatedPair, EtaFixture::ModulatedDerivative];

    pub fn name(&self) -> &'static str {
        match self {
            EtaFixture::DerivativeProduct => "derivative_product",
            EtaFixture::TranslatedPair => "translated_pair",
            EtaFixture::ModulatedDerivative => "modulated_derivative",
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            EtaFixture::DerivativeProduct => {
                PolyBump::new(0.2, 0.8, 8).deriv(x) * PolyBump::new(0.25, 0.75, 8).eval(y) * 0.1
            }
            EtaFixture::TranslatedPair => {
                let p = PolyBump::new(0.15, 0.55, 6).eval(x) * PolyBump::new(0.2, 0.6, 6).eval(y);
                let q = PolyBump::new(0.45, 0.85, 6).eval(x) * PolyBump::new(0.4, 0.8, 6).eval(y);
                p - q
            }
            EtaFixture::ModulatedDerivative => {
                (3.0 * x).sin() * PolyBump::new(0.1, 0.9, 6).eval(x) * PolyBump::new(0.1, 0.9, 6).deriv(y) * 0.2
            }
        }
    }

    pub fn grid(&self, n: usize, exec: Exec) -> Result<GridFunction2D> {
        GridFunction2D::from_fn(n, |x, y| self.eval(x, y), exec)
    }
}

/// Residual at n and 2n − 1 nodes (nested grids) and the observed order.
pub fn residual_order(
    fixture: EtaFixture,
    n: usize,
    rule: QuadratureRule,
    chi: &UnitBump,
    exec: Exec,
) -> Result<(f64, f64, f64)> {
    let r = |m: usize| -> Result<f64> {
        let eta = fixture.grid(m, exec)?.with_rule(rule);
        let beta = poincare_primitive(&eta, chi, exec)?;
        primitive_residual(&beta, &eta, exec)
    };
    let coarse = r(n)?;
    let fine = r(2 * n - 1)?;
    Ok((coarse, fine, (coarse / fine).log2()))
}
