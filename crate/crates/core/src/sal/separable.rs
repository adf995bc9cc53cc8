//! `⨍ φ(tx) f(x) dx` and `⨍ φ(x) f(x/t) dx` as `t → 0` for rapidly decaying
//! smooth `φ` and `f` with known expansions.

use super::{c64, taylor_weighted, Lp, TAYLOR_EXTRA};
use crate::asymfun::{AsymFunction, Expansion, Term};
use crate::expr::Expr;
use crate::numdiff::DerivTable;
use crate::quadrature::Quadrature;
use crate::scalar::{as_integer, binomial, factorial, EXPONENT_TOL};
use crate::{Error, Result};

fn phi_table(phi: &Expr, order: usize) -> Result<DerivTable> {
    if let Some(v) = phi.free_vars().into_iter().find(|v| v != "x") {
        return Err(Error::UnboundVariable(v));
    }
    DerivTable::new(phi, &["x"], "x", order)
}

/// `φ^{(n)}(0) / n!`.
fn taylor_coefficient(table: &DerivTable, n: usize) -> Result<f64> {
    let fact = factorial(n).ok_or(Error::LogPowerTooLarge(n))?;
    let d = table.deriv(n, &[0.0])?;
    if !d.is_finite() {
        return Err(Error::Domain(format!("φ^({n})(0) is not finite")));
    }
    Ok(d / fact)
}

fn check_order(f: &AsymFunction, q: f64) -> Result<()> {
    if !(q > 0.0) {
        return Err(Error::InvalidInput(format!("remainder order must be positive, got {q}")));
    }
    if q > f.infinity_side().order() + EXPONENT_TOL {
        return Err(Error::MissingExpansion(format!(
            "order {q} needs the expansion of f at infinity to order {q}, have {}",
            f.infinity_side().order()
        )));
    }
    Ok(())
}

/// Terms of `⨍ φ(tx) f(x) dx` in `t`, without remainder bookkeeping.
fn proposition_terms(phi: &Expr, f: &AsymFunction, q: f64, quad: &Quadrature<f64>) -> Result<(DerivTable, Vec<Term>)> {
    check_order(f, q)?;
    let jmax = q.ceil() as usize;
    let table = phi_table(phi, jmax + TAYLOR_EXTRA + 2)?;
    let mut terms = Vec::new();
    // φ^{(j)}(0)/j! · ⨍ xʲ f · tʲ
    for j in 0..jmax {
        let c = taylor_coefficient(&table, j)?;
        if c == 0.0 {
            continue;
        }
        let m = f.times_power(j)?.reg_integral_with(quad)?.value;
        terms.push(Term::new(c64(j as f64), Lp::constant(m * c)));
    }
    // ⨍ φ(y) y^β q_β(ln y − ln t) dy · t^{−β−1}
    for t in f.infinity_side().terms() {
        if t.exponent.re < -q - 1.0 - EXPONENT_TOL {
            continue;
        }
        let b = t.poly.coeffs();
        let mut coeffs = Vec::with_capacity(b.len());
        for m in 0..b.len() {
            let mult = Lp::new((m..b.len()).map(|i| b[i] * binomial(i, m)).collect());
            let h = taylor_weighted(t.exponent, vec![(mult, table.clone())], None)?;
            let v = h.reg_integral_with(quad)?.value;
            coeffs.push(if m % 2 == 0 { v } else { -v });
        }
        terms.push(Term::new(-t.exponent - 1.0, Lp::new(coeffs)));
    }
    // φ^{(n)}(0)/n! · Q_β(−ln t) · t^{−β−1} for integer β ∈ [−q−1, −1]
    for t in f.infinity_side().terms() {
        let Some(beta) = as_integer(t.exponent, EXPONENT_TOL) else { continue };
        if beta > -1 || (beta as f64) < -q - 1.0 - EXPONENT_TOL {
            continue;
        }
        let n = (-beta - 1) as usize;
        let c = taylor_coefficient(&table, n)?;
        terms.push(Term::new(c64(n as f64), t.poly.antiderivative().reflect().scale_real(c)));
    }
    Ok((table, terms))
}

/// Expansion of `⨍ φ(tx) f(x) dx` as `t → 0`, remainder `O(t^q)`.
pub fn separable_expansion(phi: &Expr, f: &AsymFunction, q: f64) -> Result<Expansion> {
    let (_, terms) = proposition_terms(phi, f, q, &Quadrature::default())?;
    Ok(Expansion::new("t", terms, q, 0))
}

/// Expansion of `⨍ φ(x) f(x/t) dx` as `t → 0`, remainder `O(t^{q+1})`.
pub fn corollary_expansion(phi: &Expr, f: &AsymFunction, q: f64) -> Result<Expansion> {
    let (table, base) = proposition_terms(phi, f, q, &Quadrature::default())?;
    let mut terms: Vec<Term> = base.into_iter().map(|t| Term::new(t.exponent + 1.0, t.poly)).collect();
    // −φ^{(n)}(0)/n! · P_α(−ln t) · t^{−α} for integer α ∈ spec₀ ∩ [−q−1, −1]
    for t in f.zero_side().terms() {
        let Some(alpha) = as_integer(t.exponent, EXPONENT_TOL) else { continue };
        if alpha > -1 || (alpha as f64) < -q - 1.0 - EXPONENT_TOL {
            continue;
        }
        let n = (-alpha - 1) as usize;
        let c = taylor_coefficient(&table, n)?;
        terms.push(Term::new(c64(-alpha as f64), t.poly.antiderivative().reflect().scale_real(-c)));
    }
    Ok(Expansion::new("t", terms, q + 1.0, 0))
}
