use std::fmt;

use super::{BinOp, Expr, Node};

// Binding strength: + - (1) < * / (2) < unary minus (3) < ^ (4) < atoms (5).
fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Neg(_) => 3,
        Node::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
        Node::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var(name) => f.write_str(name),
            Node::Neg(a) => {
                f.write_str("-")?;
                child(f, a, prec(a) < 3)
            }
            Node::Bin(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    child(f, a, prec(a) <= 4)?;
                    f.write_str(sym)?;
                    return child(f, b, prec(b) < 3);
                }
                child(f, a, prec(a) < p)?;
                f.write_str(sym)?;
                child(f, b, prec(b) <= p || prec(b) == 3)
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
            Node::PowCall(a, b) => write!(f, "pow({a}, {b})"),
        }
    }
}
