//! Central finite differences with one Richardson step, and a table of
//! partial derivatives that prefers symbolic differentiation.

use crate::expr::{Compiled, Expr, StepRule};
use crate::scalar::binomial;
use crate::{Error, Result};

/// Highest derivative order served by finite differences.
pub const MAX_FD_ORDER: usize = 6;

fn central(f: &dyn Fn(f64) -> f64, x: f64, n: usize, h: f64) -> f64 {
    let half = n as f64 / 2.0;
    let mut acc = 0.0;
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(n, k) * f(x + (half - k as f64) * h);
    }
    acc / h.powi(n as i32)
}

/// `f^{(n)}(x)` from central differences at `h` and `h/2`, Richardson-combined.
pub fn derivative(f: &dyn Fn(f64) -> f64, x: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(f(x));
    }
    if n > MAX_FD_ORDER {
        return Err(Error::InvalidInput(format!(
            "finite differences support derivative orders up to {MAX_FD_ORDER}, got {n}"
        )));
    }
    let h = 2.0 * f64::EPSILON.powf(1.0 / (n as f64 + 5.0)) * x.abs().max(1.0);
    let coarse = central(f, x, n, h);
    let fine = central(f, x, n, h / 2.0);
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Partial derivatives `∂ʲ/∂vʲ` of an expression up to a fixed order.
///
/// Orders reachable symbolically are compiled; once differentiation hits a
/// `step` depending on `v`, the remaining orders use [`derivative`] on the
/// underlying expression.
#[derive(Debug, Clone)]
pub struct DerivTable {
    slot: usize,
    base: Compiled,
    symbolic: Vec<Compiled>,
    max_order: usize,
}

impl DerivTable {
    pub fn new(expr: &Expr, vars: &[&str], wrt: &str, max_order: usize) -> Result<Self> {
        Self::with_rule(expr, vars, wrt, max_order, StepRule::Error)
    }

    /// Like [`DerivTable::new`]; with [`StepRule::LocallyConstant`] every
    /// order is symbolic and steps contribute one-sided derivatives.
    pub fn with_rule(expr: &Expr, vars: &[&str], wrt: &str, max_order: usize, rule: StepRule) -> Result<Self> {
        let slot = vars
            .iter()
            .position(|v| *v == wrt)
            .ok_or_else(|| Error::UnboundVariable(wrt.to_string()))?;
        let base = expr.compile(vars)?;
        let mut symbolic = vec![base.clone()];
        let mut current = expr.clone();
        for _ in 0..max_order {
            match current.diff_with(wrt, rule) {
                Ok(d) => {
                    symbolic.push(d.compile(vars)?);
                    current = d;
                }
                Err(Error::StepDifferentiation(_)) => break,
                Err(e) => return Err(e),
            }
        }
        Ok(DerivTable { slot, base, symbolic, max_order })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// True when order `j` is served symbolically.
    pub fn is_symbolic(&self, j: usize) -> bool {
        j < self.symbolic.len()
    }

    pub fn eval(&self, args: &[f64]) -> f64 {
        self.base.eval_or_nan(args)
    }

    /// `∂ʲ` at `args`; NaN on domain errors.
    pub fn deriv(&self, j: usize, args: &[f64]) -> Result<f64> {
        if j > self.max_order {
            return Err(Error::InvalidInput(format!("derivative order {j} beyond table size {}", self.max_order)));
        }
        if let Some(c) = self.symbolic.get(j) {
            return Ok(c.eval_or_nan(args));
        }
        let x = args[self.slot];
        let f = |v: f64| {
            let mut local = args.to_vec();
            local[self.slot] = v;
            self.base.eval_or_nan(&local)
        };
        derivative(&f, x, j)
    }
}
