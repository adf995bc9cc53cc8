use std::f64::consts::{LN_2, PI};

use super::*;
use crate::quadrature::Quadrature;

fn side(s: Side, terms: &[(f64, &[f64])], order: f64) -> ExpansionSide {
    ExpansionSide::new(s, terms.iter().map(|(e, c)| Term::real(*e, c)).collect(), order).unwrap()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `e^{-x}` with its Taylor terms below `x^n`.
fn exp_neg(n: usize) -> AsymFunction {
    exp_neg_q(n, 20.0)
}

fn exp_neg_q(n: usize, q: f64) -> AsymFunction {
    let terms: Vec<Term> = (0..n)
        .map(|j| Term::real(j as f64, &[(-1f64).powi(j as i32) / factorial(j)]))
        .collect();
    let zero = ExpansionSide::new(Side::Zero, terms, n as f64 + 0.5).unwrap();
    AsymFunction::parse("exp(-x)", zero, ExpansionSide::empty(Side::Infinity, q)).unwrap()
}

/// `1/(1+x)` with `n` geometric terms at each end.
fn geometric(n: usize) -> AsymFunction {
    let zero: Vec<Term> = (0..n).map(|j| Term::real(j as f64, &[(-1f64).powi(j as i32)])).collect();
    let inf: Vec<Term> = (0..n).map(|j| Term::real(-(j as f64) - 1.0, &[(-1f64).powi(j as i32)])).collect();
    AsymFunction::parse(
        "1/(1+x)",
        ExpansionSide::new(Side::Zero, zero, n as f64 + 0.5).unwrap(),
        ExpansionSide::new(Side::Infinity, inf, n as f64 - 0.5).unwrap(),
    )
    .unwrap()
}

/// `x^α ln^k x` declared exactly at both ends.
fn pure_power(alpha: f64, k: usize) -> AsymFunction {
    let mut coeffs = vec![0.0; k + 1];
    coeffs[k] = 1.0;
    let p = alpha.abs() + 3.0;
    AsymFunction::parse(
        &format!("x^({alpha})*log(x)^{k}"),
        side(Side::Zero, &[(alpha, &coeffs)], p),
        side(Side::Infinity, &[(alpha, &coeffs)], p),
    )
    .unwrap()
}

fn close(a: C64, b: f64, tol: f64) -> bool {
    (a - c64(b)).norm() <= tol
}

#[test]
fn expansion_side_validation() {
    let s = side(Side::Zero, &[(1.0, &[1.0]), (-0.5, &[2.0])], 2.5);
    assert_eq!(s.terms()[0].exponent.re, -0.5);
    assert!(ExpansionSide::new(Side::Zero, vec![Term::real(2.0, &[1.0])], 2.5).is_err());
    assert!(ExpansionSide::new(Side::Infinity, vec![Term::real(-4.0, &[1.0])], 2.0).is_err());
    let s = side(Side::Infinity, &[(-3.0, &[1.0]), (-1.0, &[1.0])], 2.5);
    assert_eq!(s.terms()[0].exponent.re, -1.0);
    let merged = ExpansionSide::new(Side::Zero, vec![Term::real(0.0, &[1.0]), Term::real(1e-12, &[2.0])], 2.0).unwrap();
    assert!(merged.merged_coincident());
    assert_eq!(merged.terms().len(), 1);
    assert!(ExpansionSide::new(Side::Zero, vec![], 0.0).is_err());
}

#[test]
fn limits_in_the_mean() {
    let f = AsymFunction::parse(
        "2 + log(x) + x",
        side(Side::Zero, &[(0.0, &[2.0, 1.0]), (1.0, &[1.0])], 2.5),
        ExpansionSide::empty(Side::Infinity, 1.0),
    )
    .unwrap();
    assert_eq!(f.lim_zero(), c64(2.0));
    let f = AsymFunction::parse(
        "sqrt(x)",
        side(Side::Zero, &[(0.5, &[1.0])], 2.0),
        side(Side::Infinity, &[(0.5, &[1.0])], 2.0),
    )
    .unwrap();
    assert_eq!(f.lim_zero(), c64(0.0));
    let g = geometric(4);
    assert_eq!(g.lim_zero(), c64(1.0));
    assert_eq!(g.lim_inf(), c64(0.0));
}

#[test]
fn primitive_examples() {
    let f = AsymFunction::parse(
        "1/x",
        side(Side::Zero, &[(-1.0, &[1.0])], 3.0),
        side(Side::Infinity, &[(-1.0, &[1.0])], 3.0),
    )
    .unwrap();
    let big_f = f.primitive().unwrap();
    assert!(close(big_f.lim_zero(), 0.0, 1e-14) && close(big_f.lim_inf(), 0.0, 1e-14));
    assert_eq!(big_f.zero_side().poly_at(c64(0.0)).unwrap().coeff(1), c64(1.0));
    assert!(close(big_f.eval(2.0), LN_2, 1e-12));

    let e = (-1f64).exp();
    let big_f = exp_neg(5).primitive().unwrap();
    assert!(close(big_f.lim_inf(), e, 1e-11), "{}", big_f.lim_inf());
    assert!(close(big_f.lim_zero(), e - 1.0, 1e-11), "{}", big_f.lim_zero());

    let big_f = geometric(5).primitive().unwrap();
    assert!(close(big_f.lim_inf(), -LN_2, 1e-11), "{}", big_f.lim_inf());
    assert!(close(big_f.lim_zero(), -LN_2, 1e-11), "{}", big_f.lim_zero());
}

#[test]
fn primitive_passes_consistency() {
    for f in [exp_neg_q(4, 2.0), geometric(4)] {
        let big_f = f.primitive().unwrap();
        assert!((big_f.zero_side().order() - (f.zero_side().order() + 1.0 - PRIMITIVE_EPS)).abs() < 1e-15);
        let report = big_f.check_consistency(0.5, 1e3);
        assert!(report.ok(), "{report:?}");
        assert!(report.samples >= 5, "{report:?}");
    }
}

#[test]
fn reg_integral_examples() {
    for alpha in [-2.5, -1.3, -1.0, -0.4, 0.7] {
        for k in 0..3 {
            let v = pure_power(alpha, k).reg_integral().unwrap();
            assert!(v.norm() < 1e-12, "alpha {alpha} k {k}: {v}");
        }
    }
    assert!(close(exp_neg(4).reg_integral().unwrap(), 1.0, 1e-10));
    assert!(close(geometric(4).reg_integral().unwrap(), 0.0, 1e-10));
}

#[test]
fn sampled_primitive_agrees() {
    let quad = Quadrature::default();
    for alpha in [-2.5, -1.0, 0.7] {
        let v = pure_power(alpha, 2).reg_integral_sampled(&quad, 0.25, 4.0).unwrap();
        assert!(v.value.norm() < 1e-9, "{alpha}: {v:?}");
    }
    // e^{-x}: F(x₀) = e^{-1} − e^{-x₀}, exactly the Taylor terms plus LIM₀
    let v = exp_neg(12).reg_integral_sampled(&quad, 0.1, 60.0).unwrap();
    assert!(close(v.value, 1.0, 1e-9), "{v:?}");
}

#[test]
fn mellin_examples() {
    let m = exp_neg(3).mellin(c64(1.0)).unwrap();
    assert!(close(m.value, 1.0, 1e-10));
    let g = geometric(3);
    // oracle: direct quadrature of the convergent Beta integral
    let quad = Quadrature::new(1e-12, 1e-12);
    let direct = quad.integrate_from_zero(|x: f64| x.powf(-0.5) / (1.0 + x), 1.0).value
        + quad.integrate_log_to_infinity(|x: f64| x.powf(-0.5) / (1.0 + x), 1.0).value;
    let m = g.mellin(c64(0.5)).unwrap();
    assert!(close(m.value, direct, 1e-9) && close(m.value, PI, 1e-9), "{m:?}");

    let f = AsymFunction::parse(
        "1/x",
        side(Side::Zero, &[(-1.0, &[1.0])], 3.0),
        ExpansionSide::empty(Side::Infinity, 3.0),
    )
    .unwrap()
    .with_support(0.0, 1.0)
    .unwrap();
    let poles = f.mellin_poles();
    assert_eq!(poles.len(), 1);
    assert_eq!((poles[0].location, poles[0].order), (c64(1.0), 1));
    assert!(matches!(f.mellin(c64(1.0)), Err(Error::Pole { order: 1, .. })));
    for z in [1.5, 0.5, -0.7] {
        assert!(close(f.mellin(c64(z)).unwrap().value, 1.0 / (z - 1.0), 1e-10));
    }
    assert!(matches!(f.mellin(c64(-2.5)), Err(Error::StripViolation { .. })));
    assert_eq!(f.fit_pole_order(c64(1.0)).unwrap().fitted_order, 1);
}

#[test]
fn mellin_complex_argument() {
    // M e^{-x}(z) = Γ(z); Γ(1+i) = i·Γ(i); check Γ(2+i) = (1+i)Γ(1+i)
    let f = exp_neg(3);
    let a = f.mellin(C64::new(1.0, 1.0)).unwrap().value;
    let b = f.mellin(C64::new(2.0, 1.0)).unwrap().value;
    assert!((b - a * C64::new(1.0, 1.0)).norm() < 1e-9);
    // continuation below the convergence strip: Γ(z+1) = zΓ(z) at z = -0.5
    let c = f.mellin(c64(-0.5)).unwrap().value;
    let d = f.mellin(c64(0.5)).unwrap().value;
    assert!((d - c * -0.5).norm() < 1e-9, "{c} {d}");
    assert!(close(d, PI.sqrt(), 1e-9));
}

#[test]
fn mellin_finite_part_matches_reg_integral() {
    let log_exp = AsymFunction::parse(
        "log(x)*exp(-x)",
        side(Side::Zero, &[(0.0, &[0.0, 1.0]), (1.0, &[0.0, -1.0]), (2.0, &[0.0, 0.5])], 3.5),
        ExpansionSide::empty(Side::Infinity, 10.0),
    )
    .unwrap();
    let double_pole = AsymFunction::parse(
        "log(x)/x",
        side(Side::Zero, &[(-1.0, &[0.0, 1.0])], 3.0),
        ExpansionSide::empty(Side::Infinity, 3.0),
    )
    .unwrap()
    .with_support(0.0, 1.0)
    .unwrap();
    for f in [exp_neg(4), geometric(4), log_exp, double_pole] {
        let fp = f.mellin_finite_part().unwrap();
        let reg = f.reg_integral().unwrap();
        assert!((fp.value - reg).norm() < 1e-6, "{} vs {}", fp.value, reg);
    }
}

#[test]
fn pole_orders_from_growth() {
    let f = AsymFunction::parse(
        "log(x)*exp(-x)",
        side(Side::Zero, &[(0.0, &[0.0, 1.0]), (1.0, &[0.0, -1.0])], 2.5),
        ExpansionSide::empty(Side::Infinity, 10.0),
    )
    .unwrap();
    for pole in f.mellin_poles() {
        let fit = f.fit_pole_order(pole.location).unwrap();
        assert_eq!(fit.fitted_order, fit.declared_order, "{fit:?}");
    }
}

#[test]
fn substitution_examples() {
    let g = geometric(4);
    let v = g.scale_reg_integral(0.5).unwrap();
    assert!(close(v, 0.5f64.ln() / 0.5, 1e-9), "{v}");
    for t in [0.3, 2.0] {
        assert!(close(exp_neg(4).scale_reg_integral(t).unwrap(), 1.0 / t, 1e-9));
    }
    assert_eq!(g.scale_reg_integral(1.0).unwrap(), g.reg_integral().unwrap());
    assert!(g.scale_reg_integral(0.0).is_err());
}

#[test]
fn substitution_matches_rescaled_function() {
    let g = geometric(5);
    for t in [0.1, 0.5, 2.0, 10.0] {
        let lemma = g.scale_reg_integral(t).unwrap();
        let direct = g.rescale(t).unwrap().reg_integral().unwrap();
        assert!((lemma - direct).norm() < 1e-8, "t={t}: {lemma} vs {direct}");
        assert!(close(lemma, t.ln() / t, 1e-8));
    }
}

#[test]
fn inversion_invariance() {
    for f in [exp_neg(5), geometric(4), pure_power(-2.5, 1)] {
        let a = f.reg_integral().unwrap();
        let b = f.invert().unwrap().reg_integral().unwrap();
        assert!((a - b).norm() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn linearity() {
    let f = exp_neg(4);
    let g = geometric(4);
    let h = pure_power(-1.3, 1);
    let (a, b) = (c64(2.5), C64::new(-1.0, 0.5));
    let combo = AsymFunction::linear_combination(&[(a, &f), (b, &g), (c64(3.0), &h)]).unwrap();
    let lhs = combo.reg_integral().unwrap();
    let rhs = a * f.reg_integral().unwrap() + b * g.reg_integral().unwrap();
    assert!((lhs - rhs).norm() < 1e-9, "{lhs} vs {rhs}");
}

#[test]
fn absolutely_integrable_regime_is_ordinary_quadrature() {
    // x^{-1/2} e^{-x}: Γ(1/2) = √π
    let f = AsymFunction::parse(
        "x^(-0.5)*exp(-x)",
        side(Side::Zero, &[(-0.5, &[1.0]), (0.5, &[-1.0]), (1.5, &[0.5])], 2.6),
        ExpansionSide::empty(Side::Infinity, 10.0),
    )
    .unwrap();
    assert!(close(f.reg_integral().unwrap(), PI.sqrt(), 1e-9));
    let undeclared = AsymFunction::parse("x^(-0.5)*exp(-x)", ExpansionSide::empty(Side::Zero, 0.4), ExpansionSide::empty(Side::Infinity, 10.0)).unwrap();
    assert!(close(undeclared.reg_integral().unwrap(), PI.sqrt(), 1e-8));
}

#[test]
fn complex_exponents() {
    // x^{i} on (0,1] with the term declared: ⨍ = 0 by cancellation;
    // adding e^{-x} shows the imaginary part is carried through.
    let zero = ExpansionSide::new(
        Side::Zero,
        vec![Term::new(C64::new(0.0, 1.0), Lp::constant(c64(1.0)))],
        2.0,
    )
    .unwrap();
    let inf = ExpansionSide::new(Side::Infinity, vec![Term::new(C64::new(0.0, 1.0), Lp::constant(c64(1.0)))], 2.0)
        .unwrap();
    let f = AsymFunction::native(|x| crate::scalar::real_pow(x, C64::new(0.0, 1.0)), false, zero, inf).unwrap();
    assert!(f.reg_integral().unwrap().norm() < 1e-12);
    // x^{-1/2+i} on (0,1] only: ∫₀¹ = 1/(1/2+i)
    let a = C64::new(-0.5, 1.0);
    let zero = ExpansionSide::new(Side::Zero, vec![Term::new(a, Lp::constant(c64(1.0)))], 1.0).unwrap();
    let f = AsymFunction::native(move |x| crate::scalar::real_pow(x, a), false, zero, ExpansionSide::empty(Side::Infinity, 1.0))
        .unwrap()
        .with_support(0.0, 1.0)
        .unwrap();
    let expect = c64(1.0) / (a + 1.0);
    assert!((f.reg_integral().unwrap() - expect).norm() < 1e-12);
}

#[test]
fn unbound_variable_rejected() {
    assert!(matches!(
        AsymFunction::parse("x*y", ExpansionSide::empty(Side::Zero, 1.0), ExpansionSide::empty(Side::Infinity, 1.0)),
        Err(Error::UnboundVariable(_))
    ));
}
