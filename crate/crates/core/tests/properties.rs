use num_complex::Complex64 as C64;
use proptest::prelude::*;

use sing_asym::asymfun::{AsymFunction, ExpansionSide, Side, Term};
use sing_asym::expr::{parse, BinOp, Expr, Func};
use sing_asym::indexsets::{extended_union, IndexEntry, IndexSet};
use sing_asym::pushforward::{push_xy, Density2D};

fn pure_power(alpha: f64, k: usize) -> AsymFunction {
    let mut coeffs = vec![0.0; k + 1];
    coeffs[k] = 1.0;
    let order = alpha.abs() + 3.0;
    let side = |s| ExpansionSide::new(s, vec![Term::real(alpha, &coeffs)], order).unwrap();
    AsymFunction::parse(&format!("x^({alpha})*log(x)^{k}"), side(Side::Zero), side(Side::Infinity)).unwrap()
}

fn geometric() -> AsymFunction {
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let zero = (0..4).map(|j| Term::real(j as f64, &[sign(j)])).collect();
    let inf = (0..4).map(|j| Term::real(-(j as f64) - 1.0, &[sign(j)])).collect();
    AsymFunction::parse(
        "1/(1+x)",
        ExpansionSide::new(Side::Zero, zero, 4.5).unwrap(),
        ExpansionSide::new(Side::Infinity, inf, 3.5).unwrap(),
    )
    .unwrap()
}

fn exp_neg() -> AsymFunction {
    let terms = vec![Term::real(0.0, &[1.0]), Term::real(1.0, &[-1.0]), Term::real(2.0, &[0.5])];
    AsymFunction::parse(
        "exp(-x)",
        ExpansionSide::new(Side::Zero, terms, 3.5).unwrap(),
        ExpansionSide::empty(Side::Infinity, 20.0),
    )
    .unwrap()
}

fn entries() -> impl Strategy<Value = Vec<IndexEntry>> {
    prop::collection::vec((-4i32..4, 0usize..3), 1..4)
        .prop_map(|v| v.into_iter().map(|(a, k)| IndexEntry::real(a as f64 * 0.5, k)).collect())
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::var("x")),
        (1u32..50).prop_map(|n| Expr::num(n as f64 / 4.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin_raw(BinOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin_raw(BinOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin_raw(BinOp::Mul, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin_raw(BinOp::Div, a, b)),
            (inner.clone(), 1u32..4).prop_map(|(a, n)| Expr::bin_raw(BinOp::Pow, a, Expr::num(n as f64))),
            inner.clone().prop_map(Expr::neg_raw),
            inner.clone().prop_map(|a| Expr::call(Func::Sin, a)),
            inner.prop_map(|a| Expr::call(Func::Exp, a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pure_powers_regularize_to_zero(alpha in -3.0f64..2.0, k in 0usize..3) {
        let v = pure_power(alpha, k).reg_integral().unwrap();
        prop_assert!(v.norm() < 1e-11, "alpha {} k {}: {}", alpha, k, v);
    }

    #[test]
    fn reg_integral_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let f = geometric();
        let g = exp_neg();
        let sum = AsymFunction::linear_combination(&[(C64::new(a, 0.0), &f), (C64::new(b, 0.0), &g)]).unwrap();
        let lhs = sum.reg_integral().unwrap();
        let rhs = f.reg_integral().unwrap() * a + g.reg_integral().unwrap() * b;
        prop_assert!((lhs - rhs).norm() < 1e-9, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn substitution_lemma_matches_rescaling(t in 0.05f64..20.0) {
        let f = geometric();
        let lemma = f.scale_reg_integral(t).unwrap();
        let direct = f.rescale(t).unwrap().reg_integral().unwrap();
        prop_assert!((lemma - direct).norm() < 1e-8);
        prop_assert!((lemma.re - t.ln() / t).abs() < 1e-8);
    }

    #[test]
    fn completion_is_closed_and_idempotent(g in entries()) {
        let s = IndexSet::complete(&g, 3.0).unwrap();
        prop_assert!(s.is_closed());
        let again = IndexSet::complete(s.entries(), 3.0).unwrap();
        prop_assert!(again.same_entries(&s));
        prop_assert!(g.iter().filter(|e| e.alpha.re < 3.0).all(|e| s.contains(e.alpha, e.k)));
    }

    #[test]
    fn extended_union_is_commutative_and_contains_both(a in entries(), b in entries()) {
        let sa = IndexSet::complete(&a, 3.0).unwrap();
        let sb = IndexSet::complete(&b, 3.0).unwrap();
        let ab = extended_union(&sa, &sb).unwrap();
        let ba = extended_union(&sb, &sa).unwrap();
        prop_assert!(ab.same_entries(&ba));
        prop_assert!(sa.entries().iter().chain(sb.entries()).all(|e| ab.contains(e.alpha, e.k)));
        prop_assert!(ab.is_closed());
    }

    #[test]
    fn expressions_round_trip(e in expr()) {
        let again = parse(&e.to_string()).unwrap();
        prop_assert_eq!(again.to_string(), e.to_string());
        let x = 0.37;
        let (u, v) = (e.eval1("x", x), again.eval1("x", x));
        if let (Ok(u), Ok(v)) = (u, v) {
            prop_assert!(u == v || (u.is_nan() && v.is_nan()), "{} vs {}", u, v);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn push_forward_is_symmetric(a in 0.2f64..3.0, b in 0.2f64..3.0, t in 1e-3f64..0.5) {
        let u = Density2D::parse(&format!("exp(-{a}*x - {b}*y) * (1 + x)"), 1.0, 1.3, true).unwrap();
        let w = u.swapped().unwrap();
        let p = push_xy(&u, t).unwrap().value;
        let q = push_xy(&w, t).unwrap().value;
        prop_assert!((p - q).abs() < 1e-9, "{} vs {}", p, q);
    }
}

#[test]
fn single_precision_aliases() {
    use sing_asym::{IndexSet32, LogPoly32, Quadrature32};
    let p = LogPoly32::from_real(&[1.0, 2.0]);
    assert_eq!(p.antiderivative().derivative(), p);
    let s = IndexSet32::complete(&[IndexEntry::real(0.5f32, 1)], 2.0).unwrap();
    assert_eq!(s.len(), 4);
    let q = Quadrature32::new(1e-5, 1e-5);
    let r = q.integrate(|x: f32| x * x, 0.0, 1.0);
    assert!((r.value - 1.0 / 3.0).abs() < 1e-5);
}
