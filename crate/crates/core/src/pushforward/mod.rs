//! Push-forward of densities on the quadrant under `(x, y) ↦ xy`, the SAL
//! prediction for smooth densities, least-squares fits of sampled
//! asymptotics, and the blown-up corner model.

mod blowup;

use serde::Serialize;

use crate::asymfun::{Expansion, Term};
use crate::expr::{Compiled, Expr, StepRule};
use crate::fit::least_squares;
use crate::logpoly::LogPoly;
use crate::numdiff::DerivTable;
use crate::quadrature::Quadrature;
use crate::sal::{taylor_weighted, TAYLOR_EXTRA};
use crate::scalar::factorial;
use crate::{Error, Result};

pub use blowup::{
    condition_c_check, f_pushforward, sigma_from_density, BlowupDensity, ConditionCReport, ConditionSample,
};

type C64 = num_complex::Complex64;
type Lp = LogPoly<f64>;

/// Largest `J` accepted by [`sal_prediction_smooth`].
pub const MAX_PREDICTION_ORDER: usize = 6;

/// Condition number above which [`fit_asymptotics`] warns.
pub const FIT_CONDITION_WARN: f64 = 1e8;

/// A density `u(x, y) dx dy` supported in `[0, X] × [0, Y]`.
#[derive(Debug, Clone)]
pub struct Density2D {
    expr: Expr,
    gated: Expr,
    compiled: Compiled,
    x_max: f64,
    y_max: f64,
    smooth: bool,
}

impl Density2D {
    /// `expr` in `x` and `y`; values outside the box are cut off by step factors.
    pub fn new(expr: Expr, x_max: f64, y_max: f64, smooth: bool) -> Result<Self> {
        if let Some(v) = expr.free_vars().into_iter().find(|v| v != "x" && v != "y") {
            return Err(Error::UnboundVariable(v));
        }
        if !(x_max > 0.0 && y_max > 0.0 && x_max.is_finite() && y_max.is_finite()) {
            return Err(Error::InvalidInput(format!("support box [0, {x_max}] × [0, {y_max}] is not bounded")));
        }
        let gate = |v: &str, m: f64| Expr::call(crate::expr::Func::Step, Expr::sub(Expr::num(m), Expr::var(v)));
        let gated = Expr::mul(expr.clone(), Expr::mul(gate("x", x_max), gate("y", y_max)));
        let compiled = gated.compile(&["x", "y"])?;
        Ok(Density2D { expr, gated, compiled, x_max, y_max, smooth })
    }

    pub fn parse(text: &str, x_max: f64, y_max: f64, smooth: bool) -> Result<Self> {
        Self::new(text.parse()?, x_max, y_max, smooth)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// The expression with the support cut-offs applied.
    pub fn gated_expr(&self) -> &Expr {
        &self.gated
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    /// `u(x, y)` on the closed quadrant, `0` outside the box or for negative arguments.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if x < 0.0 || y < 0.0 {
            return 0.0;
        }
        self.compiled.eval_or_nan(&[x, y])
    }

    /// `u(y, x)` on the mirrored box.
    pub fn swapped(&self) -> Result<Self> {
        let tmp = "__swap";
        let e = self.expr.substitute("x", &Expr::var(tmp)).substitute("y", &Expr::var("x")).substitute(tmp, &Expr::var("y"));
        Self::new(e, self.y_max, self.x_max, self.smooth)
    }
}

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PushValue {
    pub value: f64,
    pub error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn push_quad() -> Quadrature<f64> {
    Quadrature::new(1e-15, 1e-14)
}

/// `f_*u(t) = ∫ u(x, t/x) dx/x` over `x ∈ [t/Y, X]`, integrated in `s = ln x`.
pub fn push_xy(u: &Density2D, t: f64) -> Result<PushValue> {
    push_xy_with(u, t, &push_quad())
}

pub fn push_xy_with(u: &Density2D, t: f64, quad: &Quadrature<f64>) -> Result<PushValue> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
    }
    if t >= u.x_max * u.y_max {
        return Ok(PushValue {
            value: 0.0,
            error: 0.0,
            note: Some(format!("t = {t} lies outside (0, {}): the level set misses the support", u.x_max * u.y_max)),
        });
    }
    let lo = (t / u.y_max).ln();
    let hi = u.x_max.ln();
    let mid = 0.5 * t.ln();
    let mut pts = vec![lo];
    if mid > lo && mid < hi {
        pts.push(mid);
    }
    pts.push(hi);
    let g = |s: f64| {
        let x = s.exp();
        u.eval(x, t / x)
    };
    let r = quad.integrate_points(g, &pts);
    let accept = 1e4 * quad.abs_tol.max(quad.rel_tol * r.value.abs());
    let value = r.checked(accept)?;
    Ok(PushValue { value, error: r.error, note: None })
}

/// `⨍ s^{-1-j} g(s) ds` for `g` the closed-form expression `e` in `var`,
/// supported in `[0, m]`.
fn boundary_moment(e: &Expr, var: &str, j: usize, m: f64, quad: &Quadrature<f64>) -> Result<C64> {
    if e.as_num() == Some(0.0) {
        return Ok(C64::new(0.0, 0.0));
    }
    let table = DerivTable::with_rule(e, &[var], var, j + TAYLOR_EXTRA + 1, StepRule::LocallyConstant)?;
    let f = taylor_weighted(C64::new(-1.0 - j as f64, 0.0), vec![(Lp::constant(C64::new(1.0, 0.0)), table)], Some((0.0, m)))?;
    Ok(f.reg_integral_with(quad)?.value)
}

/// Expansion of `f_*u(t)` as `t → 0` through order `t^J`: the boundary
/// moments `⨍ y^{-1-j} ∂₁ʲu(0,y)/j! dy + ⨍ x^{-1-j} ∂₂ʲu(x,0)/j! dx` and the
/// log coefficients `−∂₁ʲ∂₂ʲu(0,0)/(j!)²`.
pub fn sal_prediction_smooth(u: &Density2D, order: usize) -> Result<Expansion> {
    if !u.smooth {
        return Err(Error::InvalidInput("the smooth-density prediction needs a smooth density".into()));
    }
    if order > MAX_PREDICTION_ORDER {
        return Err(Error::InvalidInput(format!("prediction order {order} exceeds {MAX_PREDICTION_ORDER}")));
    }
    let quad = Quadrature::new(1e-14, 1e-13);
    let rule = StepRule::LocallyConstant;
    let mut terms = Vec::new();
    for j in 0..=order {
        let fact = factorial(j).ok_or(Error::LogPowerTooLarge(j))?;
        let dx = u.gated.diff_n("x", j, rule)?;
        let dy = u.gated.diff_n("y", j, rule)?;
        let a_expr = Expr::mul(Expr::num(1.0 / fact), dx.fix("x", 0.0));
        let b_expr = Expr::mul(Expr::num(1.0 / fact), dy.fix("y", 0.0));
        let a = boundary_moment(&a_expr, "y", j, u.y_max, &quad)?;
        let b = boundary_moment(&b_expr, "x", j, u.x_max, &quad)?;
        let mixed = dx.diff_n("y", j, rule)?.compile(&["x", "y"])?.eval(&[0.0, 0.0])?;
        let log = C64::new(-mixed / (fact * fact), 0.0);
        let poly = Lp::new(vec![a + b, log]);
        if !poly.is_zero() {
            terms.push(Term::new(C64::new(j as f64, 0.0), poly));
        }
    }
    Ok(Expansion::new("t", terms, order as f64 + 1.0, 1))
}

/// Least-squares fit of samples against `t^a lnᵇ t`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FitResult {
    pub basis: Vec<(f64, usize)>,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub condition: f64,
    /// The sample abscissae the residual refers to.
    pub grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

pub fn fit_asymptotics(samples: &[(f64, f64)], basis: &[(f64, usize)]) -> Result<FitResult> {
    if basis.is_empty() {
        return Err(Error::InvalidInput("empty basis".into()));
    }
    if samples.len() < 2 * basis.len() {
        return Err(Error::InvalidInput(format!(
            "{} samples for {} basis functions; need at least twice as many",
            samples.len(),
            basis.len()
        )));
    }
    if let Some((t, _)) = samples.iter().find(|(t, v)| !(*t > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!("sample at t = {t} is not usable")));
    }
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|&(t, _)| basis.iter().map(|&(a, b)| t.powf(a) * t.ln().powi(b as i32)).collect())
        .collect();
    let rhs: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let fit = least_squares(&rows, &rhs)?;
    let warning = (fit.condition > FIT_CONDITION_WARN)
        .then(|| format!("design condition number {:.3e} exceeds {FIT_CONDITION_WARN:e}", fit.condition));
    Ok(FitResult {
        basis: basis.to_vec(),
        coefficients: fit.coefficients,
        residual_norm: fit.residual_norm,
        condition: fit.condition,
        grid: samples.iter().map(|s| s.0).collect(),
        warning,
    })
}
