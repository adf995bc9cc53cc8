//! A small expression language for input functions.
//!
//! Expressions are immutable trees sharing subtrees through [`Arc`], so
//! cloning and symbolic differentiation stay cheap. The grammar, in EBNF:
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;           (* exponent must be constant *)
//! primary = number | ident | call | "(" expr ")" ;
//! call    = fname "(" expr ")" | "pow" "(" expr "," expr ")" ;
//! fname   = "exp" | "log" | "sin" | "cos" | "sqrt" | "step" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! `step(s)` is the right-continuous Heaviside function: 1 for `s >= 0`.

mod diff;
mod display;
mod eval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use diff::StepRule;
pub use eval::{Bindings, Compiled};
pub use parse::parse;

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    /// `a ^ c` with a constant exponent subtree.
    Pow,
}

/// Unary built-in functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Step,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Step => "step",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "step" => Func::Step,
            _ => return None,
        })
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Arc<str>),
    Neg(Expr),
    Bin(BinOp, Expr, Expr),
    Call(Func, Expr),
    /// `pow(base, exponent)` with a constant exponent subtree.
    PowCall(Expr, Expr),
}

/// Shared handle to an immutable expression tree.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn num(v: f64) -> Expr {
        Expr::wrap(Node::Num(v))
    }

    pub fn var(name: &str) -> Expr {
        Expr::wrap(Node::Var(Arc::from(name)))
    }

    pub fn as_num(&self) -> Option<f64> {
        match self.node() {
            Node::Num(v) => Some(*v),
            _ => None,
        }
    }

    /// Negation, folding literals.
    pub fn neg(a: Expr) -> Expr {
        match a.node() {
            Node::Num(v) => Expr::num(-v),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::wrap(Node::Neg(a)),
        }
    }

    /// Binary node with literal folding and the neutral elements 0 and 1.
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        let (la, lb) = (a.as_num(), b.as_num());
        if let (Some(x), Some(y)) = (la, lb) {
            let v = match op {
                BinOp::Add => Some(x + y),
                BinOp::Sub => Some(x - y),
                BinOp::Mul => Some(x * y),
                BinOp::Div if y != 0.0 => Some(x / y),
                BinOp::Pow if x > 0.0 || y.fract() == 0.0 => Some(x.powf(y)),
                _ => None,
            };
            if let Some(v) = v.filter(|v| v.is_finite()) {
                return Expr::num(v);
            }
        }
        match op {
            BinOp::Add if la == Some(0.0) => return b,
            BinOp::Add | BinOp::Sub if lb == Some(0.0) => return a,
            BinOp::Sub if la == Some(0.0) => return Expr::neg(b),
            BinOp::Mul if la == Some(0.0) || lb == Some(0.0) => return Expr::num(0.0),
            BinOp::Mul if la == Some(1.0) => return b,
            BinOp::Mul | BinOp::Div if lb == Some(1.0) => return a,
            BinOp::Mul if la == Some(-1.0) => return Expr::neg(b),
            BinOp::Div if la == Some(0.0) => return Expr::num(0.0),
            BinOp::Pow if lb == Some(1.0) => return a,
            BinOp::Pow if lb == Some(0.0) => return Expr::num(1.0),
            _ => {}
        }
        Expr::wrap(Node::Bin(op, a, b))
    }

    /// Builds a binary node verbatim (no folding), as the parser does.
    pub fn bin_raw(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::wrap(Node::Bin(op, a, b))
    }

    pub fn neg_raw(a: Expr) -> Expr {
        Expr::wrap(Node::Neg(a))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::wrap(Node::Call(f, a))
    }

    pub fn pow_call(base: Expr, exponent: Expr) -> Expr {
        Expr::wrap(Node::PowCall(base, exponent))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Div, a, b)
    }

    pub fn powi(a: Expr, c: f64) -> Expr {
        Expr::bin(BinOp::Pow, a, Expr::num(c))
    }

    /// Set of free variable names.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Var(v) => {
                out.insert(v.to_string());
            }
            Node::Neg(a) | Node::Call(_, a) => a.collect_vars(out),
            Node::Bin(_, a, b) | Node::PowCall(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Var(v) => &**v == var,
            Node::Neg(a) | Node::Call(_, a) => a.depends_on(var),
            Node::Bin(_, a, b) | Node::PowCall(a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self.node() {
            Node::Num(_) => true,
            Node::Var(_) => false,
            Node::Neg(a) | Node::Call(_, a) => a.is_constant(),
            Node::Bin(_, a, b) | Node::PowCall(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// True when some `step(..)` argument depends on `var`.
    pub fn has_step_in(&self, var: &str) -> bool {
        match self.node() {
            Node::Num(_) | Node::Var(_) => false,
            Node::Call(Func::Step, a) => a.depends_on(var),
            Node::Neg(a) | Node::Call(_, a) => a.has_step_in(var),
            Node::Bin(_, a, b) | Node::PowCall(a, b) => a.has_step_in(var) || b.has_step_in(var),
        }
    }

    pub fn contains_step(&self) -> bool {
        match self.node() {
            Node::Num(_) | Node::Var(_) => false,
            Node::Call(Func::Step, _) => true,
            Node::Neg(a) | Node::Call(_, a) => a.contains_step(),
            Node::Bin(_, a, b) | Node::PowCall(a, b) => a.contains_step() || b.contains_step(),
        }
    }

    /// Replaces every occurrence of `var` by `with`.
    pub fn substitute(&self, var: &str, with: &Expr) -> Expr {
        if !self.depends_on(var) {
            return self.clone();
        }
        match self.node() {
            Node::Num(_) => self.clone(),
            Node::Var(v) if &**v == var => with.clone(),
            Node::Var(_) => self.clone(),
            Node::Neg(a) => Expr::neg_raw(a.substitute(var, with)),
            Node::Bin(op, a, b) => Expr::bin_raw(*op, a.substitute(var, with), b.substitute(var, with)),
            Node::Call(f, a) => Expr::call(*f, a.substitute(var, with)),
            Node::PowCall(a, b) => Expr::pow_call(a.substitute(var, with), b.substitute(var, with)),
        }
    }

    /// Replaces `var` by a numeric value.
    pub fn fix(&self, var: &str, value: f64) -> Expr {
        self.substitute(var, &Expr::num(value))
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Num(_) | Node::Var(_) => 1,
            Node::Neg(a) | Node::Call(_, a) => 1 + a.size(),
            Node::Bin(_, a, b) | Node::PowCall(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}
