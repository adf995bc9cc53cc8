//! Functions on `(0,∞)` with declared log-polynomial expansions at `0` and
//! `∞`: limits in the mean, the primitive, the regularized integral, the
//! Mellin continuation and the substitution rule.

mod expansion;
mod mellin;
mod regint;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expr::{Compiled, Expr};
use crate::logpoly::LogPoly;
use crate::scalar::{real_pow, same_exponent, EXPONENT_TOL};
use crate::{Error, Result};

pub use expansion::{Expansion, Term};
pub use mellin::{MellinValue, PoleFit, PoleInfo};
pub use regint::{ConsistencyReport, Estimate};

pub(crate) type C64 = Complex64;
pub(crate) type Lp = LogPoly<f64>;

/// Bookkeeping loss in the remainder order of a primitive.
pub const PRIMITIVE_EPS: f64 = 0.01;

pub(crate) fn c64(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// End of `(0,∞)` an expansion describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Zero,
    Infinity,
}

/// Expansion at one end: `Σ x^α p_α(ln x)` plus a remainder of order `p`
/// (at zero) or `q` (at infinity).
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionSide {
    side: Side,
    terms: Vec<Term>,
    order: f64,
    merged: bool,
}

impl ExpansionSide {
    /// Sorts and validates the terms; coincident exponents are merged and
    /// flagged, zero polynomials dropped.
    pub fn new(side: Side, terms: Vec<Term>, order: f64) -> Result<Self> {
        let s = Self::assemble(side, terms, order)?;
        if let Some(t) = s.terms.iter().find(|t| !s.admissible(t.exponent)) {
            return Err(Error::InvalidExpansion(format!(
                "exponent {} exceeds the remainder order {} at {:?}",
                t.exponent, order, side
            )));
        }
        Ok(s)
    }

    /// Like [`ExpansionSide::new`], but terms beyond the remainder order are
    /// absorbed into the remainder instead of rejected.
    pub fn fitted(side: Side, terms: Vec<Term>, order: f64) -> Result<Self> {
        let mut s = Self::assemble(side, terms, order)?;
        let keep: Vec<Term> = s.terms.iter().filter(|t| s.admissible(t.exponent)).cloned().collect();
        s.terms = keep;
        Ok(s)
    }

    pub fn empty(side: Side, order: f64) -> Self {
        ExpansionSide { side, terms: Vec::new(), order, merged: false }
    }

    fn assemble(side: Side, terms: Vec<Term>, order: f64) -> Result<Self> {
        if !(order > 0.0) || order.is_nan() {
            return Err(Error::InvalidExpansion(format!("remainder order must be positive, got {order}")));
        }
        let mut merged = false;
        let mut out: Vec<Term> = Vec::new();
        for t in terms {
            if !t.exponent.re.is_finite() || !t.exponent.im.is_finite() {
                return Err(Error::InvalidExpansion("non-finite exponent".into()));
            }
            match out.iter_mut().find(|o| same_exponent(o.exponent, t.exponent, EXPONENT_TOL)) {
                Some(o) => {
                    o.poly = &o.poly + &t.poly;
                    merged = true;
                }
                None => out.push(t),
            }
        }
        out.retain(|t| !t.poly.is_zero());
        out.sort_by(|a, b| {
            let ord = a
                .exponent
                .re
                .total_cmp(&b.exponent.re)
                .then(a.exponent.im.total_cmp(&b.exponent.im));
            match side {
                Side::Zero => ord,
                Side::Infinity => ord.reverse(),
            }
        });
        Ok(ExpansionSide { side, terms: out, order, merged })
    }

    fn admissible(&self, e: C64) -> bool {
        match self.side {
            Side::Zero => e.re <= self.order - 1.0 + EXPONENT_TOL,
            Side::Infinity => e.re >= -self.order - 1.0 - EXPONENT_TOL,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    /// True when coincident exponents were merged on construction.
    pub fn merged_coincident(&self) -> bool {
        self.merged
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Polynomial attached to exponent `e`, if declared.
    pub fn poly_at(&self, e: C64) -> Option<&Lp> {
        self.terms
            .iter()
            .find(|t| same_exponent(t.exponent, e, EXPONENT_TOL))
            .map(|t| &t.poly)
    }

    /// Constant coefficient of the exponent-0 term.
    pub fn constant(&self) -> C64 {
        self.poly_at(c64(0.0)).map_or(c64(0.0), |p| p.coeff(0))
    }

    /// `Σ x^α p_α(ln x)`.
    pub fn eval(&self, x: f64) -> C64 {
        let l = x.ln();
        self.terms.iter().map(|t| real_pow(x, t.exponent) * t.poly.eval_real(l)).sum()
    }

    /// `Σ |x^α p_α(ln x)|`, the magnitude scale of the declared terms.
    pub fn magnitude(&self, x: f64) -> f64 {
        let l = x.ln();
        self.terms
            .iter()
            .map(|t| (real_pow(x, t.exponent) * t.poly.eval_real(l)).norm())
            .sum()
    }

    fn is_real(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.exponent.im == 0.0 && t.poly.coeffs().iter().all(|c| c.im == 0.0))
    }

    fn map_terms(&self, side: Side, order: f64, f: impl Fn(&Term) -> Term) -> Result<Self> {
        Self::fitted(side, self.terms.iter().map(f).collect(), order)
    }
}

/// How an [`AsymFunction`] is evaluated.
#[derive(Clone)]
pub enum Evaluator {
    Expr { expr: Expr, var: String, compiled: Arc<Compiled> },
    Native(Arc<dyn Fn(f64) -> C64 + Send + Sync>),
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluator::Expr { expr, var, .. } => write!(f, "Expr({expr} in {var})"),
            Evaluator::Native(_) => write!(f, "Native"),
        }
    }
}

/// A function in `L_{p,q}`: evaluator plus declared expansions at both ends.
#[derive(Debug, Clone)]
pub struct AsymFunction {
    evaluator: Evaluator,
    real: bool,
    zero: ExpansionSide,
    inf: ExpansionSide,
    support: Option<(f64, f64)>,
    breakpoints: Vec<f64>,
    noise_abs: f64,
}

impl AsymFunction {
    /// Real-valued function given by an expression in `var`.
    pub fn from_expr(expr: Expr, var: &str, zero: ExpansionSide, inf: ExpansionSide) -> Result<Self> {
        if let Some(v) = expr.free_vars().into_iter().find(|v| v != var) {
            return Err(Error::UnboundVariable(v));
        }
        let compiled = Arc::new(expr.compile(&[var])?);
        Self::assemble(
            Evaluator::Expr { expr, var: var.to_string(), compiled },
            true,
            zero,
            inf,
        )
    }

    /// Parses `text` as an expression in `x`.
    pub fn parse(text: &str, zero: ExpansionSide, inf: ExpansionSide) -> Result<Self> {
        Self::from_expr(text.parse()?, "x", zero, inf)
    }

    /// Function given by a closure; `real` promises a vanishing imaginary part.
    pub fn native<F>(f: F, real: bool, zero: ExpansionSide, inf: ExpansionSide) -> Result<Self>
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        Self::assemble(Evaluator::Native(Arc::new(f)), real, zero, inf)
    }

    fn assemble(evaluator: Evaluator, real: bool, zero: ExpansionSide, inf: ExpansionSide) -> Result<Self> {
        if zero.side != Side::Zero || inf.side != Side::Infinity {
            return Err(Error::InvalidExpansion("expansion sides are swapped".into()));
        }
        Ok(AsymFunction { evaluator, real, zero, inf, support: None, breakpoints: Vec::new(), noise_abs: 0.0 })
    }

    /// Declares that the function vanishes outside `[a, b]` (`b` may be infinite).
    pub fn with_support(mut self, a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b > a) {
            return Err(Error::InvalidInput(format!("support [{a}, {b}] is not a positive interval")));
        }
        self.support = Some((a, b));
        Ok(self)
    }

    /// Points where the integrand may jump; quadrature splits there.
    pub fn with_breakpoints(mut self, points: &[f64]) -> Self {
        self.breakpoints.extend(points.iter().copied().filter(|p| *p > 0.0 && p.is_finite()));
        self.breakpoints.sort_by(f64::total_cmp);
        self.breakpoints.dedup();
        self
    }

    /// Absolute accuracy of the evaluator itself (0 for closed forms).
    pub fn with_noise_floor(mut self, abs: f64) -> Self {
        self.noise_abs = abs;
        self
    }

    pub fn zero_side(&self) -> &ExpansionSide {
        &self.zero
    }

    pub fn infinity_side(&self) -> &ExpansionSide {
        &self.inf
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    /// True when the evaluator and all declared data are real.
    pub fn is_real(&self) -> bool {
        self.real && self.zero.is_real() && self.inf.is_real()
    }

    /// `f(x)`; zero outside the declared support, NaN on domain errors.
    pub fn eval(&self, x: f64) -> C64 {
        if let Some((a, b)) = self.support {
            if x < a || x > b {
                return c64(0.0);
            }
        }
        match &self.evaluator {
            Evaluator::Expr { compiled, .. } => c64(compiled.eval_or_nan(&[x])),
            Evaluator::Native(f) => f(x),
        }
    }

    /// `f(x) − Σ` zero-side terms.
    pub fn remainder_zero(&self, x: f64) -> C64 {
        self.eval(x) - self.zero.eval(x)
    }

    /// `f(x) − Σ` infinity-side terms.
    pub fn remainder_inf(&self, x: f64) -> C64 {
        self.eval(x) - self.inf.eval(x)
    }

    /// `LIM_{x→0} f = p₀(0)`.
    pub fn lim_zero(&self) -> C64 {
        self.zero.constant()
    }

    /// `LIM_{x→∞} f = q₀(0)`.
    pub fn lim_inf(&self) -> C64 {
        self.inf.constant()
    }

    /// `c·f`.
    pub fn scaled(&self, c: C64) -> Result<Self> {
        Self::linear_combination(&[(c, self)])
    }

    /// `Σ c_i f_i`; orders are the minimum of the inputs.
    pub fn linear_combination(parts: &[(C64, &AsymFunction)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidInput("empty linear combination".into()));
        }
        let p = parts.iter().map(|(_, f)| f.zero.order).fold(f64::INFINITY, f64::min);
        let q = parts.iter().map(|(_, f)| f.inf.order).fold(f64::INFINITY, f64::min);
        let collect = |side: Side| -> Vec<Term> {
            parts
                .iter()
                .flat_map(|(c, f)| {
                    let s = if side == Side::Zero { &f.zero } else { &f.inf };
                    s.terms.iter().map(move |t| Term::new(t.exponent, t.poly.scale(*c)))
                })
                .collect()
        };
        let zero = ExpansionSide::fitted(Side::Zero, collect(Side::Zero), p)?;
        let inf = ExpansionSide::fitted(Side::Infinity, collect(Side::Infinity), q)?;
        let owned: Vec<(C64, AsymFunction)> = parts.iter().map(|(c, f)| (*c, (*f).clone())).collect();
        let real = parts.iter().all(|(c, f)| c.im == 0.0 && f.real);
        let mut out = Self::native(move |x| owned.iter().map(|(c, f)| c * f.eval(x)).sum(), real, zero, inf)?;
        let mut points = Vec::new();
        for (_, f) in parts {
            points.extend(f.breakpoints.iter().copied());
            if let Some((a, b)) = f.support {
                points.push(a);
                points.push(b);
            }
        }
        out = out.with_breakpoints(&points);
        out.noise_abs = parts.iter().map(|(c, f)| c.norm() * f.noise_abs).sum();
        if parts.iter().all(|(_, f)| f.support.is_some()) {
            let a = parts.iter().map(|(_, f)| f.support.unwrap().0).fold(f64::INFINITY, f64::min);
            let b = parts.iter().map(|(_, f)| f.support.unwrap().1).fold(0.0, f64::max);
            out = out.with_support(a, b)?;
        }
        Ok(out)
    }

    /// `x ↦ f(t·x)` with expansions rescaled: `(tx)^α p(ln x + ln t)`.
    pub fn rescale(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidInput(format!("scale factor must be positive, got {t}")));
        }
        let lt = c64(t.ln());
        let map = |term: &Term| Term::new(term.exponent, term.poly.shift(lt).scale(real_pow(t, term.exponent)));
        let zero = self.zero.map_terms(Side::Zero, self.zero.order, map)?;
        let inf = self.inf.map_terms(Side::Infinity, self.inf.order, map)?;
        let f = self.clone();
        let mut out = Self::native(move |x| f.eval(t * x), self.real, zero, inf)?;
        out.breakpoints = self.breakpoints.iter().map(|b| b / t).collect();
        out.support = self.support.map(|(a, b)| (a / t, b / t));
        out.noise_abs = self.noise_abs;
        Ok(out)
    }

    /// `y ↦ f(1/y)·y^{-2}`, which has the same regularized integral; the
    /// roles of the two ends are exchanged.
    pub fn invert(&self) -> Result<Self> {
        let map = |term: &Term| Term::new(-term.exponent - 2.0, term.poly.reflect());
        let zero = self.inf.map_terms(Side::Zero, self.inf.order, map)?;
        let inf = self.zero.map_terms(Side::Infinity, self.zero.order, map)?;
        let f = self.clone();
        let mut out = Self::native(
            move |y| {
                let v = f.eval(1.0 / y);
                if v == c64(0.0) {
                    v
                } else {
                    v / (y * y)
                }
            },
            self.real,
            zero,
            inf,
        )?;
        out.breakpoints = self.breakpoints.iter().map(|b| 1.0 / b).collect();
        out.breakpoints.sort_by(f64::total_cmp);
        out.support = self
            .support
            .map(|(a, b)| (1.0 / b, if a > 0.0 { 1.0 / a } else { f64::INFINITY }));
        out.noise_abs = self.noise_abs;
        Ok(out)
    }

    /// `x ↦ xʲ f(x)`; the remainder orders become `p + j` and `q − j`.
    pub fn times_power(&self, j: usize) -> Result<Self> {
        let jf = j as f64;
        if self.inf.order - jf <= 0.0 {
            return Err(Error::InvalidExpansion(format!(
                "x^{j} f needs an infinity order above {j}, have {}",
                self.inf.order
            )));
        }
        let map = |term: &Term| Term::new(term.exponent + jf, term.poly.clone());
        let zero = self.zero.map_terms(Side::Zero, self.zero.order + jf, map)?;
        let inf = self.inf.map_terms(Side::Infinity, self.inf.order - jf, map)?;
        let f = self.clone();
        let mut out = Self::native(move |x| {
            let v = f.eval(x);
            if v == c64(0.0) { v } else { v * x.powi(j as i32) }
        }, self.real, zero, inf)?;
        out.breakpoints = self.breakpoints.clone();
        out.support = self.support;
        out.noise_abs = self.noise_abs;
        Ok(out)
    }

    /// Breakpoints and support edges strictly inside `(lo, hi)`.
    fn splits(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = self.breakpoints.clone();
        if let Some((a, b)) = self.support {
            pts.push(a);
            pts.push(b);
        }
        pts.retain(|p| *p > lo && *p < hi && p.is_finite());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

#[cfg(test)]
mod tests;
