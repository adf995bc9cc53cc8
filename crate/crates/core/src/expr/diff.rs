use super::{BinOp, Expr, Func, Node};
use crate::{Error, Result};

/// How `step(s)` is treated when `s` depends on the differentiation variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// Refuse: step is not differentiable across its jump.
    #[default]
    Error,
    /// Treat step as locally constant (valid away from the jump).
    LocallyConstant,
}

impl Expr {
    /// Symbolic derivative; refuses to differentiate through `step`.
    pub fn diff(&self, var: &str) -> Result<Expr> {
        self.diff_with(var, StepRule::Error)
    }

    pub fn diff_with(&self, var: &str, rule: StepRule) -> Result<Expr> {
        if !self.depends_on(var) {
            return Ok(Expr::num(0.0));
        }
        Ok(match self.node() {
            Node::Num(_) => Expr::num(0.0),
            Node::Var(_) => Expr::num(1.0),
            Node::Neg(a) => Expr::neg(a.diff_with(var, rule)?),
            Node::Bin(op, a, b) => {
                let da = a.diff_with(var, rule)?;
                match op {
                    BinOp::Add => Expr::add(da, b.diff_with(var, rule)?),
                    BinOp::Sub => Expr::sub(da, b.diff_with(var, rule)?),
                    BinOp::Mul => {
                        let db = b.diff_with(var, rule)?;
                        Expr::add(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db))
                    }
                    BinOp::Div => {
                        let db = b.diff_with(var, rule)?;
                        // (a'b - ab') / b^2
                        Expr::div(
                            Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db)),
                            Expr::powi(b.clone(), 2.0),
                        )
                    }
                    BinOp::Pow => power_rule(a, b, da, false),
                }
            }
            Node::PowCall(a, b) => {
                let da = a.diff_with(var, rule)?;
                power_rule(a, b, da, true)
            }
            Node::Call(f, a) => {
                if *f == Func::Step {
                    return match rule {
                        StepRule::Error => Err(Error::StepDifferentiation(var.to_string())),
                        StepRule::LocallyConstant => Ok(Expr::num(0.0)),
                    };
                }
                let da = a.diff_with(var, rule)?;
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Log => Expr::div(Expr::num(1.0), a.clone()),
                    Func::Sin => Expr::call(Func::Cos, a.clone()),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, a.clone())),
                    Func::Sqrt => Expr::div(Expr::num(0.5), self.clone()),
                    Func::Step => unreachable!(),
                };
                Expr::mul(outer, da)
            }
        })
    }

    /// `order`-fold derivative.
    pub fn diff_n(&self, var: &str, order: usize, rule: StepRule) -> Result<Expr> {
        let mut e = self.clone();
        for _ in 0..order {
            e = e.diff_with(var, rule)?;
        }
        Ok(e)
    }
}

fn power_rule(base: &Expr, exponent: &Expr, dbase: Expr, call_form: bool) -> Expr {
    let lowered = Expr::sub(exponent.clone(), Expr::num(1.0));
    let reduced = if call_form {
        Expr::pow_call(base.clone(), lowered)
    } else {
        Expr::bin(BinOp::Pow, base.clone(), lowered)
    };
    Expr::mul(Expr::mul(exponent.clone(), reduced), dbase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Bindings};

    fn d_at(text: &str, var: &str, vars: &[(&str, f64)]) -> f64 {
        let mut b = Bindings::new();
        for (n, v) in vars {
            b.set(n, *v);
        }
        parse(text).unwrap().diff(var).unwrap().eval(&b).unwrap()
    }

    #[test]
    fn calculus_examples() {
        let v = d_at("exp(-x)", "x", &[("x", 1.0)]);
        assert!((v + 0.36787944117144233).abs() < 1e-15);
        assert_eq!(parse("x*y").unwrap().diff("x").unwrap().to_string(), "y");
        assert_eq!(d_at("log(1+x)", "x", &[("x", 1.0)]), 0.5);
    }

    #[test]
    fn power_forms() {
        assert!((d_at("x^3", "x", &[("x", 2.0)]) - 12.0).abs() < 1e-14);
        assert!((d_at("pow(x, 0.5)", "x", &[("x", 4.0)]) - 0.25).abs() < 1e-15);
        assert!((d_at("sqrt(x)", "x", &[("x", 4.0)]) - 0.25).abs() < 1e-15);
        assert!((d_at("1/x", "x", &[("x", 2.0)]) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn step_handling() {
        let e = parse("step(1-x)*y").unwrap();
        assert!(matches!(e.diff("x"), Err(Error::StepDifferentiation(_))));
        assert_eq!(e.diff("y").unwrap().to_string(), "step(1.0-x)");
        let local = e.diff_with("x", StepRule::LocallyConstant).unwrap();
        assert_eq!(local.as_num(), Some(0.0));
    }
}
