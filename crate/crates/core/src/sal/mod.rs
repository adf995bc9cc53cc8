//! Expansions of `∫₀^∞ σ(x, xz) dx` as `z → ∞` along the real axis, the
//! separable special cases `⨍ φ(tx) f(x) dx` and `⨍ φ(x) f(x/t) dx`,
//! sampled hypothesis diagnostics and quadrature verification.

mod diagnostics;
mod separable;
mod verify;

use serde::Serialize;

use crate::asymfun::{AsymFunction, Expansion, ExpansionSide, Side, Term, PRIMITIVE_EPS};
use crate::expr::Expr;
use crate::logpoly::LogPoly;
use crate::numdiff::DerivTable;
use crate::quadrature::{dyadic_growth, Quadrature};
use crate::scalar::{as_integer, binomial, factorial, real_pow, EXPONENT_TOL};
use crate::{Error, Result};

pub use diagnostics::{
    check_sal_hypotheses, BoundaryIntegral, FpFit, FpModel, HypothesisReport, RemainderBound,
};
pub use separable::{corollary_expansion, separable_expansion};
pub use verify::{verify_expansion, ResidualPoint, VerifyReport};

type C64 = num_complex::Complex64;
type Lp = LogPoly<f64>;

fn c64(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Order assigned to the rapidly decaying end of an auxiliary integrand.
pub(crate) const RAPID_DECAY_ORDER: f64 = 30.0;

/// Taylor terms taken beyond the ones needed for integrability at `0`.
pub const TAYLOR_EXTRA: usize = 4;

/// `ζ^α p_α(x, ln ζ)` with `p_α(x, L) = Σ_i c_i(x) Lⁱ`.
#[derive(Debug, Clone)]
pub struct SigmaTerm {
    pub alpha: C64,
    pub coeffs: Vec<Expr>,
}

impl SigmaTerm {
    pub fn new(alpha: C64, coeffs: Vec<Expr>) -> Self {
        SigmaTerm { alpha, coeffs }
    }

    /// Real exponent with coefficient expressions in `x`.
    pub fn parse(alpha: f64, coeffs: &[&str]) -> Result<Self> {
        let coeffs = coeffs.iter().map(|c| c.parse()).collect::<Result<Vec<Expr>>>()?;
        Ok(SigmaTerm { alpha: c64(alpha), coeffs })
    }
}

/// Coefficient functions of one [`SigmaTerm`] with their `x`-derivatives.
#[derive(Debug, Clone)]
struct TermTables {
    alpha: C64,
    coeffs: Vec<DerivTable>,
}

impl TermTables {
    fn new(t: &SigmaTerm, max_order: usize) -> Result<Self> {
        for c in &t.coeffs {
            if let Some(v) = c.free_vars().into_iter().find(|v| v != "x") {
                return Err(Error::UnboundVariable(v));
            }
        }
        let coeffs = t
            .coeffs
            .iter()
            .map(|c| DerivTable::new(c, &["x"], "x", max_order))
            .collect::<Result<Vec<_>>>()?;
        Ok(TermTables { alpha: t.alpha, coeffs })
    }

    /// `[∂ʲc_i(x) / j!]_i` as a log-polynomial.
    fn taylor_poly(&self, j: usize, x: f64) -> Result<Lp> {
        let fact = factorial(j).ok_or(Error::LogPowerTooLarge(j))?;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let v = c.deriv(j, &[x])?;
            if !v.is_finite() {
                return Err(Error::InvalidExpansion(format!(
                    "derivative {j} of coefficient {i} is not finite at x = {x}"
                )));
            }
            out.push(c64(v / fact));
        }
        Ok(Lp::new(out))
    }

    /// `Σ_i c_i(x) Lⁱ` evaluated (NaN-propagating).
    fn eval(&self, k: usize, x: f64, l: f64) -> Result<f64> {
        let mut acc = 0.0;
        let mut pow = 1.0;
        for c in &self.coeffs {
            acc += c.deriv(k, &[x])? * pow;
            pow *= l;
        }
        Ok(acc)
    }
}

/// SAL input: `σ(x, ζ)` with its `ζ → ∞` expansion data.
#[derive(Debug, Clone)]
pub struct SigmaFunction {
    expr: Expr,
    order: usize,
    log_bound: usize,
    zeta_asym: Vec<SigmaTerm>,
    zeta_small: Vec<SigmaTerm>,
    zeta_small_order: Option<f64>,
    x_support: Option<(f64, f64)>,
    zeta_support: Option<(f64, f64)>,
    table: DerivTable,
    asym_tables: Vec<TermTables>,
    small_tables: Vec<TermTables>,
}

impl SigmaFunction {
    /// `expr` in variables `x` and `zeta`; `order` is SAL's `p`, `log_bound` its `r`.
    pub fn new(expr: Expr, order: usize, log_bound: usize, zeta_asym: Vec<SigmaTerm>) -> Result<Self> {
        if let Some(v) = expr.free_vars().into_iter().find(|v| v != "x" && v != "zeta") {
            return Err(Error::UnboundVariable(v));
        }
        let p1 = -(order as f64) - 1.0;
        if let Some(t) = zeta_asym.iter().find(|t| t.alpha.re <= p1 + EXPONENT_TOL) {
            return Err(Error::InvalidExpansion(format!(
                "exponent {} is not above -p-1 = {p1}",
                t.alpha
            )));
        }
        let table = DerivTable::new(&expr, &["x", "zeta"], "x", order)?;
        let asym_tables = zeta_asym
            .iter()
            .map(|t| TermTables::new(t, order + TAYLOR_EXTRA + 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(SigmaFunction {
            expr,
            order,
            log_bound,
            zeta_asym,
            zeta_small: Vec::new(),
            zeta_small_order: None,
            x_support: None,
            zeta_support: None,
            table,
            asym_tables,
            small_tables: Vec::new(),
        })
    }

    pub fn parse(text: &str, order: usize, log_bound: usize, zeta_asym: Vec<SigmaTerm>) -> Result<Self> {
        Self::new(text.parse()?, order, log_bound, zeta_asym)
    }

    /// Expansion `σ ~ Σ ζ^γ s_γ(x, ln ζ)` as `ζ → 0`, with remainder order.
    pub fn with_zeta_small(mut self, terms: Vec<SigmaTerm>, order: f64) -> Result<Self> {
        self.small_tables = terms
            .iter()
            .map(|t| TermTables::new(t, self.order + 1))
            .collect::<Result<Vec<_>>>()?;
        self.zeta_small = terms;
        self.zeta_small_order = Some(order);
        Ok(self)
    }

    /// `σ` vanishes for `x` outside `[a, b]`.
    pub fn with_x_support(mut self, a: f64, b: f64) -> Self {
        self.x_support = Some((a, b));
        self
    }

    /// `σ` vanishes for `ζ` outside `[a, b]`.
    pub fn with_zeta_support(mut self, a: f64, b: f64) -> Self {
        self.zeta_support = Some((a, b));
        self
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn log_bound(&self) -> usize {
        self.log_bound
    }

    pub fn zeta_asym(&self) -> &[SigmaTerm] {
        &self.zeta_asym
    }

    pub fn x_support(&self) -> Option<(f64, f64)> {
        self.x_support
    }

    pub fn zeta_support(&self) -> Option<(f64, f64)> {
        self.zeta_support
    }

    fn inside(&self, x: f64, zeta: f64) -> bool {
        self.x_support.is_none_or(|(a, b)| x >= a && x <= b)
            && self.zeta_support.is_none_or(|(a, b)| zeta >= a && zeta <= b)
    }

    /// `σ(x, ζ)`, zero outside the declared supports.
    pub fn eval(&self, x: f64, zeta: f64) -> f64 {
        if !self.inside(x, zeta) {
            return 0.0;
        }
        self.table.eval(&[x, zeta])
    }

    /// `∂₁ʲσ(x, ζ)`.
    pub fn dx(&self, j: usize, x: f64, zeta: f64) -> Result<f64> {
        if !self.inside(x, zeta) {
            return Ok(0.0);
        }
        self.table.deriv(j, &[x, zeta])
    }

    /// True when `∂₁ʲσ` is available symbolically.
    pub fn symbolic_dx(&self, j: usize) -> bool {
        self.table.is_symbolic(j)
    }

    /// `Σ ζ^α ∂₁ᵏp_α(x, ln ζ)` over the declared large-`ζ` terms.
    pub fn asym_dx(&self, k: usize, x: f64, zeta: f64) -> Result<C64> {
        let l = zeta.ln();
        let mut acc = c64(0.0);
        for t in &self.asym_tables {
            acc += real_pow(zeta, t.alpha) * t.eval(k, x, l)?;
        }
        Ok(acc)
    }

    /// `c·σ` with every declared coefficient scaled.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let k = Expr::num(c);
        let scale = |ts: &[SigmaTerm]| -> Vec<SigmaTerm> {
            ts.iter()
                .map(|t| SigmaTerm::new(t.alpha, t.coeffs.iter().map(|e| Expr::mul(k.clone(), e.clone())).collect()))
                .collect()
        };
        let mut out = Self::new(Expr::mul(k.clone(), self.expr.clone()), self.order, self.log_bound, scale(&self.zeta_asym))?;
        if let Some(o) = self.zeta_small_order {
            out = out.with_zeta_small(scale(&self.zeta_small), o)?;
        }
        out.x_support = self.x_support;
        out.zeta_support = self.zeta_support;
        Ok(out)
    }

    /// The same data with SAL order `p`, dropping terms at or below `−p−1`.
    pub fn with_order(&self, p: usize) -> Result<Self> {
        let keep: Vec<SigmaTerm> = self
            .zeta_asym
            .iter()
            .filter(|t| t.alpha.re > -(p as f64) - 1.0 + EXPONENT_TOL)
            .cloned()
            .collect();
        let mut out = Self::new(self.expr.clone(), p, self.log_bound, keep)?;
        if let Some(o) = self.zeta_small_order {
            out = out.with_zeta_small(self.zeta_small.clone(), o)?;
        }
        out.x_support = self.x_support;
        out.zeta_support = self.zeta_support;
        Ok(out)
    }
}

/// Settings for [`sal_expansion`].
#[derive(Debug, Clone)]
pub struct SalOptions {
    pub quad: Quadrature<f64>,
    /// Fail with [`Error::Hypothesis`] when the diagnostics do not pass.
    pub enforce_hypotheses: bool,
    /// Skip the diagnostics entirely (the report then carries a note).
    pub skip_diagnostics: bool,
}

impl Default for SalOptions {
    fn default() -> Self {
        SalOptions { quad: Quadrature::default(), enforce_hypotheses: true, skip_diagnostics: false }
    }
}

/// Expansion in `z` with diagnostics and (optionally) oracle residuals.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SalReport {
    pub expansion: Expansion,
    pub hypothesis_diagnostics: HypothesisReport,
    pub oracle_residuals: Vec<ResidualPoint>,
}

/// `ζ ↦ ζʲ/j! · ∂₁ʲσ(0, ζ)` as an [`AsymFunction`].
pub(crate) fn boundary_function(sigma: &SigmaFunction, j: usize, quad: &Quadrature<f64>) -> Result<AsymFunction> {
    let p = sigma.order as f64;
    let fact = factorial(j).ok_or(Error::LogPowerTooLarge(j))?;
    let inf_terms = sigma
        .asym_tables
        .iter()
        .map(|t| Ok(Term::new(t.alpha + j as f64, t.taylor_poly(j, 0.0)?)))
        .collect::<Result<Vec<_>>>()?;
    let inf = ExpansionSide::fitted(Side::Infinity, inf_terms, p - j as f64 - PRIMITIVE_EPS)?;
    let sig = sigma.clone();
    let g = move |zeta: f64| {
        let d = sig.dx(j, 0.0, zeta).unwrap_or(f64::NAN);
        if d == 0.0 {
            c64(0.0)
        } else {
            c64(zeta.powi(j as i32) / fact * d)
        }
    };
    let zero = match sigma.zeta_small_order {
        Some(order) => {
            let terms = sigma
                .small_tables
                .iter()
                .map(|t| Ok(Term::new(t.alpha + j as f64, t.taylor_poly(j, 0.0)?)))
                .collect::<Result<Vec<_>>>()?;
            ExpansionSide::fitted(Side::Zero, terms, order + j as f64)?
        }
        None if sigma.zeta_support.is_some_and(|(a, _)| a > 0.0) => ExpansionSide::empty(Side::Zero, RAPID_DECAY_ORDER),
        None => {
            let fit = dyadic_growth(quad, |z| g(z).re, 1.0, 30);
            if fit.divergent() {
                return Err(Error::MissingExpansion(format!(
                    "ζʲ∂₁ʲσ(0,ζ) is not integrable at ζ = 0 for j = {j}; supply small-ζ expansion data"
                )));
            }
            ExpansionSide::empty(Side::Zero, PRIMITIVE_EPS)
        }
    };
    let mut f = AsymFunction::native(g, true, zero, inf)?;
    if let Some((a, b)) = sigma.zeta_support {
        f = f.with_support(a, b)?;
    }
    Ok(f)
}

/// `x ↦ x^α Σ_i a_i(x) lnⁱx`, with Taylor terms of the `a_i` at `0` and no
/// terms at infinity (the `a_i` are assumed rapidly decaying).
pub(crate) fn taylor_weighted(
    alpha: C64,
    coeffs: Vec<(Lp, DerivTable)>,
    support: Option<(f64, f64)>,
) -> Result<AsymFunction> {
    // each entry: (log-polynomial multiplier, coefficient table); the
    // integrand is x^α Σ multiplier(ln x) · a(x)
    let needed = (-alpha.re - 1.0).ceil().max(0.0) as usize;
    let n = needed + TAYLOR_EXTRA;
    let mut zero_terms = Vec::with_capacity(n);
    for m in 0..n {
        let fact = factorial(m).ok_or(Error::LogPowerTooLarge(m))?;
        let mut poly = Lp::zero();
        for (mult, table) in &coeffs {
            if m > table.max_order() {
                return Err(Error::InvalidInput(format!("Taylor order {m} exceeds the derivative table")));
            }
            let d = table.deriv(m, &[0.0])?;
            if !d.is_finite() {
                return Err(Error::InvalidExpansion(format!("derivative {m} is not finite at x = 0")));
            }
            poly = &poly + &mult.scale_real(d / fact);
        }
        zero_terms.push(Term::new(alpha + m as f64, poly));
    }
    let order = alpha.re + n as f64 + 1.0 - PRIMITIVE_EPS;
    let zero = ExpansionSide::fitted(Side::Zero, zero_terms, order)?;
    let inf = ExpansionSide::empty(Side::Infinity, RAPID_DECAY_ORDER);
    let real = alpha.im == 0.0 && coeffs.iter().all(|(m, _)| m.coeffs().iter().all(|c| c.im == 0.0));
    let f = move |x: f64| {
        let l = x.ln();
        let mut acc = c64(0.0);
        for (mult, table) in &coeffs {
            let a = table.eval(&[x]);
            if a != 0.0 {
                acc += mult.eval_real(l) * a;
            }
        }
        if acc == c64(0.0) {
            acc
        } else {
            acc * real_pow(x, alpha)
        }
    };
    let mut out = AsymFunction::native(f, real, zero, inf)?;
    if let Some((a, b)) = support {
        out = out.with_support(a, b)?;
    }
    Ok(out)
}

/// `⨍ x^α Σ_{i≥m} C(i,m) c_i(x) ln^{i−m}x dx` for `m = 0..deg`: the
/// coefficients of `(ln z)^m` in `⨍ x^α p_α(x, ln x + ln z) dx`.
fn shifted_coefficients(
    t: &TermTables,
    support: Option<(f64, f64)>,
    quad: &Quadrature<f64>,
) -> Result<Lp> {
    let deg = t.coeffs.len();
    let mut out = Vec::with_capacity(deg);
    for m in 0..deg {
        let parts: Vec<(Lp, DerivTable)> = (m..deg)
            .map(|i| (Lp::monomial(c64(binomial(i, m)), i - m), t.coeffs[i].clone()))
            .collect();
        let h = taylor_weighted(t.alpha, parts, support)?;
        out.push(h.reg_integral_with(quad)?.value);
    }
    Ok(Lp::new(out))
}

/// SAL expansion of `∫₀^∞ σ(x, xz) dx` in `z`.
pub fn sal_expansion(sigma: &SigmaFunction) -> Result<SalReport> {
    sal_expansion_with(sigma, &SalOptions::default())
}

pub fn sal_expansion_with(sigma: &SigmaFunction, opts: &SalOptions) -> Result<SalReport> {
    let diagnostics = if opts.skip_diagnostics {
        HypothesisReport::skipped()
    } else {
        check_sal_hypotheses(sigma)
    };
    if opts.enforce_hypotheses && !diagnostics.ok {
        return Err(Error::Hypothesis(Box::new(diagnostics)));
    }
    let p = sigma.order;
    let mut terms = Vec::new();
    // boundary data: ⨍ ζʲ/j! ∂₁ʲσ(0,ζ) dζ · z^{-j-1}
    for j in 0..p {
        let g = boundary_function(sigma, j, &opts.quad)?;
        let a = g.reg_integral_with(&opts.quad)?.value;
        terms.push(Term::new(c64(-(j as f64) - 1.0), Lp::constant(a)));
    }
    // ⨍ x^α p_α(x, ln x + ln z) dx · z^α
    for t in &sigma.asym_tables {
        let poly = shifted_coefficients(t, sigma.x_support, &opts.quad)?;
        terms.push(Term::new(t.alpha, poly));
    }
    // z^α/(−α−1)! · ∂₁^{−α−1}P_α(0, ln z) for integer α in [−p, −1]
    for t in &sigma.asym_tables {
        let Some(a) = as_integer(t.alpha, EXPONENT_TOL) else { continue };
        if a > -1 || a < -(p as i64) {
            continue;
        }
        let n = (-a - 1) as usize;
        let taylor = t.taylor_poly(n, 0.0)?;
        terms.push(Term::new(c64(a as f64), taylor.antiderivative()));
    }
    let expansion = Expansion::new("z", terms, -(p as f64) - 1.0, sigma.log_bound + 1);
    Ok(SalReport { expansion, hypothesis_diagnostics: diagnostics, oracle_residuals: Vec::new() })
}

/// [`sal_expansion_with`] followed by [`verify_expansion`] on `z_grid`.
pub fn sal_expansion_verified(sigma: &SigmaFunction, opts: &SalOptions, z_grid: &[f64]) -> Result<(SalReport, VerifyReport)> {
    let mut report = sal_expansion_with(sigma, opts)?;
    let verify = verify_expansion(&report.expansion, sigma, z_grid)?;
    report.oracle_residuals = verify.points.clone();
    Ok((report, verify))
}

#[cfg(test)]
mod tests;
