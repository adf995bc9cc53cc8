use std::sync::Arc;

use super::{BinOp, Expr, Func, Node};
use crate::{Error, Result};

/// Variable assignment used for evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings {
    vars: Vec<(String, f64)>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        match self.vars.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.vars.push((name.to_string(), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

fn apply(func: Func, v: f64) -> Result<f64> {
    Ok(match func {
        Func::Exp => v.exp(),
        Func::Log => {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("log of non-positive value {v}")));
            }
            v.ln()
        }
        Func::Sin => v.sin(),
        Func::Cos => v.cos(),
        Func::Sqrt => {
            if v < 0.0 {
                return Err(Error::Domain(format!("sqrt of negative value {v}")));
            }
            v.sqrt()
        }
        Func::Step => {
            if v >= 0.0 {
                1.0
            } else {
                0.0
            }
        }
    })
}

fn power(base: f64, exponent: f64) -> Result<f64> {
    if base == 0.0 && exponent < 0.0 {
        return Err(Error::Domain(format!("0 raised to negative power {exponent}")));
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(Error::Domain(format!("negative base {base} with non-integer power {exponent}")));
    }
    if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        return Ok(base.powi(exponent as i32));
    }
    Ok(base.powf(exponent))
}

fn binary(op: BinOp, a: f64, b: f64) -> Result<f64> {
    Ok(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
        BinOp::Pow => return power(a, b),
    })
}

impl Expr {
    /// Evaluates with IEEE double arithmetic.
    pub fn eval(&self, b: &Bindings) -> Result<f64> {
        match self.node() {
            Node::Num(v) => Ok(*v),
            Node::Var(name) => b.get(name).ok_or_else(|| Error::UnboundVariable(name.to_string())),
            Node::Neg(a) => Ok(-a.eval(b)?),
            Node::Bin(op, l, r) => binary(*op, l.eval(b)?, r.eval(b)?),
            Node::Call(f, a) => apply(*f, a.eval(b)?),
            Node::PowCall(l, r) => power(l.eval(b)?, r.eval(b)?),
        }
    }

    /// Evaluates an expression of one variable.
    pub fn eval1(&self, var: &str, value: f64) -> Result<f64> {
        self.eval(&Bindings::new().with(var, value))
    }

    /// Resolves variables to positional slots for fast repeated evaluation.
    pub fn compile(&self, vars: &[&str]) -> Result<Compiled> {
        Ok(Compiled { root: Arc::new(lower(self, vars)?), arity: vars.len() })
    }
}

#[derive(Debug)]
enum CNode {
    Num(f64),
    Slot(usize),
    Neg(Box<CNode>),
    Bin(BinOp, Box<CNode>, Box<CNode>),
    Call(Func, Box<CNode>),
}

fn lower(e: &Expr, vars: &[&str]) -> Result<CNode> {
    Ok(match e.node() {
        Node::Num(v) => CNode::Num(*v),
        Node::Var(name) => CNode::Slot(
            vars.iter()
                .position(|v| *v == &**name)
                .ok_or_else(|| Error::UnboundVariable(name.to_string()))?,
        ),
        Node::Neg(a) => CNode::Neg(Box::new(lower(a, vars)?)),
        Node::Bin(op, a, b) => CNode::Bin(*op, Box::new(lower(a, vars)?), Box::new(lower(b, vars)?)),
        Node::Call(f, a) => CNode::Call(*f, Box::new(lower(a, vars)?)),
        Node::PowCall(a, b) => CNode::Bin(BinOp::Pow, Box::new(lower(a, vars)?), Box::new(lower(b, vars)?)),
    })
}

impl CNode {
    fn eval(&self, args: &[f64]) -> Result<f64> {
        match self {
            CNode::Num(v) => Ok(*v),
            CNode::Slot(i) => Ok(args[*i]),
            CNode::Neg(a) => Ok(-a.eval(args)?),
            CNode::Bin(op, a, b) => binary(*op, a.eval(args)?, b.eval(args)?),
            CNode::Call(f, a) => apply(*f, a.eval(args)?),
        }
    }
}

/// Expression with variables resolved to argument positions.
#[derive(Debug, Clone)]
pub struct Compiled {
    root: Arc<CNode>,
    arity: usize,
}

impl Compiled {
    pub fn eval(&self, args: &[f64]) -> Result<f64> {
        debug_assert_eq!(args.len(), self.arity);
        self.root.eval(args)
    }

    /// Evaluation that maps domain errors to NaN, for use inside integrands.
    pub fn eval_or_nan(&self, args: &[f64]) -> f64 {
        self.root.eval(args).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn at(text: &str, vars: &[(&str, f64)]) -> Result<f64> {
        let mut b = Bindings::new();
        for (n, v) in vars {
            b.set(n, *v);
        }
        parse(text)?.eval(&b)
    }

    #[test]
    fn direct_examples() {
        assert_eq!(at("x*y", &[("x", 2.0), ("y", 3.0)]).unwrap(), 6.0);
        assert_eq!(at("step(1-x)*step(1-y)", &[("x", 0.5), ("y", 0.5)]).unwrap(), 1.0);
        assert_eq!(at("step(1-x)*step(1-y)", &[("x", 2.0), ("y", 0.5)]).unwrap(), 0.0);
        assert_eq!(at("exp(-x)/(1+x)", &[("x", 0.0)]).unwrap(), 1.0);
        assert_eq!(at("log(x)", &[("x", 1.0)]).unwrap(), 0.0);
        assert_eq!(at("x^(-1)", &[("x", 4.0)]).unwrap(), 0.25);
        let v = at("sin(x)^2+cos(x)^2", &[("x", 0.7)]).unwrap();
        assert!((v - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn step_is_right_continuous() {
        assert_eq!(at("step(x)", &[("x", 0.0)]).unwrap(), 1.0);
        assert_eq!(at("step(x)", &[("x", -1e-300)]).unwrap(), 0.0);
    }

    #[test]
    fn evaluation_errors() {
        assert!(matches!(at("x+z", &[("x", 1.0)]), Err(Error::UnboundVariable(v)) if v == "z"));
        assert!(matches!(at("log(x)", &[("x", 0.0)]), Err(Error::Domain(_))));
        assert!(matches!(at("log(x)", &[("x", -1.0)]), Err(Error::Domain(_))));
        assert!(matches!(at("x^(-1)", &[("x", 0.0)]), Err(Error::Domain(_))));
        assert!(matches!(at("pow(x, -2)", &[("x", 0.0)]), Err(Error::Domain(_))));
    }

    #[test]
    fn compiled_matches_tree() {
        let e = parse("exp(-x*y)*sqrt(1+x^2)/(2+sin(y))").unwrap();
        let c = e.compile(&["x", "y"]).unwrap();
        for (x, y) in [(0.1, 0.2), (1.5, -0.3), (3.0, 2.0)] {
            let b = Bindings::new().with("x", x).with("y", y);
            assert_eq!(c.eval(&[x, y]).unwrap(), e.eval(&b).unwrap());
        }
        assert!(matches!(e.compile(&["x"]), Err(Error::UnboundVariable(_))));
    }
}
