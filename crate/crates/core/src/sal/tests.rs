use super::*;
use crate::asymfun::{AsymFunction, ExpansionSide, Side, Term};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn u0_sigma() -> SigmaFunction {
    SigmaFunction::parse(
        "step(1 - x) * step(zeta - 1) / zeta",
        1,
        0,
        vec![SigmaTerm::parse(-1.0, &["step(1 - x)"]).unwrap()],
    )
    .unwrap()
    .with_x_support(0.0, 1.0)
}

fn exp_sigma(p: usize) -> SigmaFunction {
    SigmaFunction::parse("exp(-x) * exp(-zeta)", p, 0, Vec::new()).unwrap()
}

#[test]
fn u0_expansion_is_log_over_z() {
    let report = sal_expansion(&u0_sigma()).unwrap();
    let e = &report.expansion;
    assert!((e.coefficient(-1.0, 1) - c64(1.0)).norm() < 1e-12, "{e:?}");
    assert!(e.coefficient(-1.0, 0).norm() < 1e-10, "{e:?}");
    for z in [2.0, 10.0, 100.0] {
        assert!((e.eval(z).re - z.ln() / z).abs() < 1e-10);
    }
}

#[test]
fn u0_residuals_vanish() {
    let sigma = u0_sigma();
    let (_, v) = sal_expansion_verified(&sigma, &SalOptions::default(), &[2.0, 5.0, 20.0, 100.0, 1000.0]).unwrap();
    for p in &v.points {
        assert!(p.residual <= 1e-10, "{p:?}");
    }
}

#[test]
fn geometric_series_coefficients() {
    // ∫ e^{-x} e^{-xz} dx = 1/(1+z) = Σ (-1)^j z^{-j-1}
    let report = sal_expansion(&exp_sigma(7)).unwrap();
    for j in 0..=6 {
        let c = report.expansion.coefficient(-(j as f64) - 1.0, 0);
        let expect = if j % 2 == 0 { 1.0 } else { -1.0 };
        assert!((c.re - expect).abs() < 1e-10, "j = {j}: {c}");
    }
}

#[test]
fn geometric_series_residual_decay() {
    let sigma = exp_sigma(3);
    let grid: Vec<f64> = (0..8).map(|i| 10.0 * 1.6f64.powi(i)).collect();
    let (_, v) = sal_expansion_verified(&sigma, &SalOptions::default(), &grid).unwrap();
    let a = v.exponent.unwrap();
    assert!((a + 4.0).abs() <= 0.3, "{a} {v:?}");
}

#[test]
fn diagnostics_pass_for_smooth_decay() {
    let d = check_sal_hypotheses(&exp_sigma(2));
    assert!(d.ok, "{}", d.summary());
    assert!(d.boundary_integrals.iter().all(|b| b.finite));
    assert_eq!(d.fp.as_ref().unwrap().model, FpModel::Constant);
}

#[test]
fn diagnostics_u0_boundary_integral_is_zero() {
    let d = check_sal_hypotheses(&u0_sigma());
    assert_eq!(d.boundary_integrals[0].value, 0.0);
    assert!(d.ok, "{}", d.summary());
}

#[test]
fn non_integrable_sigma_is_flagged() {
    let sigma = SigmaFunction::parse("1 / (x * zeta)", 0, 0, Vec::new())
        .unwrap()
        .with_x_support(0.0, 1.0)
        .with_zeta_support(0.0, 1.0);
    let d = check_sal_hypotheses(&sigma);
    assert!(!d.ok);
    assert_eq!(d.fp.as_ref().unwrap().model, FpModel::Divergent);
    match sal_expansion(&sigma) {
        Err(crate::Error::Hypothesis(r)) => assert!(r.summary().contains("diverges")),
        other => panic!("expected a hypothesis failure, got {other:?}"),
    }
}

#[test]
fn truncation_matches_lower_order() {
    let opts = SalOptions { skip_diagnostics: true, ..Default::default() };
    let hi = sal_expansion_with(&exp_sigma(5), &opts).unwrap().expansion;
    let lo = sal_expansion_with(&exp_sigma(3), &opts).unwrap().expansion;
    let cut = hi.filtered(|t| t.exponent.re > -4.0 + 1e-9);
    assert!(cut.max_coefficient_gap(&lo) < 1e-9);
}

#[test]
fn scaling_is_exact() {
    let opts = SalOptions { skip_diagnostics: true, ..Default::default() };
    let sigma = u0_sigma();
    let a = sal_expansion_with(&sigma, &opts).unwrap().expansion;
    let b = sal_expansion_with(&sigma.scaled(-2.5).unwrap(), &opts).unwrap().expansion;
    assert!(a.scaled(c64(-2.5)).max_coefficient_gap(&b) < 1e-12);
}

#[test]
fn zero_sigma_has_zero_residuals() {
    let sigma = SigmaFunction::parse("0", 2, 0, Vec::new()).unwrap();
    let (r, v) = sal_expansion_verified(&sigma, &SalOptions::default(), &[2.0, 4.0]).unwrap();
    assert!(r.expansion.terms().iter().all(|t| t.poly.max_abs() == 0.0));
    assert!(v.points.iter().all(|p| p.residual == 0.0));
}

#[test]
fn smooth_term_group_with_power_data() {
    // σ = e^{-x} ζ^{-1/2}·step(ζ-1) + smooth part handled by group (ii):
    // ∫ e^{-x}(xz)^{-1/2} over xz ≥ 1 ≈ Γ(1/2) z^{-1/2} − 2 z^{-1} + …
    let sigma = SigmaFunction::parse(
        "exp(-x) * step(zeta - 1) * zeta^(-0.5)",
        1,
        0,
        vec![SigmaTerm::parse(-0.5, &["exp(-x)"]).unwrap()],
    )
    .unwrap();
    let r = sal_expansion_with(&sigma, &SalOptions { skip_diagnostics: true, ..Default::default() }).unwrap();
    let sqrt_pi = std::f64::consts::PI.sqrt();
    assert!((r.expansion.coefficient(-0.5, 0).re - sqrt_pi).abs() < 1e-9, "{:?}", r.expansion);
    // ⨍ ζ^{-1/2} step(ζ-1) dζ = −(−2) = −2
    assert!((r.expansion.coefficient(-1.0, 0).re + 2.0).abs() < 1e-9, "{:?}", r.expansion);
}

fn harmonic_tail() -> AsymFunction {
    // x^{-1} on [1, ∞)
    let zero = ExpansionSide::empty(Side::Zero, 30.0);
    let inf = ExpansionSide::new(Side::Infinity, vec![Term::real(-1.0, &[1.0])], 30.0).unwrap();
    AsymFunction::parse("step(x - 1) / x", zero, inf).unwrap().with_breakpoints(&[1.0])
}

#[test]
fn separable_exponential_integral() {
    // ∫₁^∞ e^{-tx}/x dx = −ln t − γ + t − t²/4 + …
    let phi: Expr = "exp(-x)".parse().unwrap();
    let e = separable_expansion(&phi, &harmonic_tail(), 3.0).unwrap();
    assert!((e.coefficient(0.0, 1).re + 1.0).abs() < 1e-12, "{e:?}");
    assert!((e.coefficient(0.0, 0).re + EULER_GAMMA).abs() < 1e-9, "{e:?}");
    assert!((e.coefficient(1.0, 0).re - 1.0).abs() < 1e-9, "{e:?}");
    assert!((e.coefficient(2.0, 0).re + 0.25).abs() < 1e-9, "{e:?}");
}

#[test]
fn separable_against_quadrature() {
    // φ = e^{-x²}, f = e^{-x}: ordinary moments, checked against direct quadrature
    let phi: Expr = "exp(-x^2)".parse().unwrap();
    let zero = ExpansionSide::new(Side::Zero, vec![Term::real(0.0, &[1.0]), Term::real(1.0, &[-1.0])], 2.5).unwrap();
    let f = AsymFunction::parse("exp(-x)", zero, ExpansionSide::empty(Side::Infinity, 30.0)).unwrap();
    let e = separable_expansion(&phi, &f, 4.0).unwrap();
    let quad = crate::quadrature::Quadrature::new(1e-14, 1e-13);
    for t in [0.05f64, 0.1] {
        let direct = quad.integrate_to_infinity(|x: f64| (-(t * x) * (t * x)).exp() * (-x).exp(), 0.0).value;
        let err = (direct - e.eval(t).re).abs();
        assert!(err < 30.0 * t.powi(4), "t = {t}: {err}");
    }
}

#[test]
fn corollary_log_term() {
    // ⨍ e^{-x} (t/x) 1_{x ≤ t} dx = t ln t − t² + …
    let zero = ExpansionSide::new(Side::Zero, vec![Term::real(-1.0, &[1.0])], 30.0).unwrap();
    let f = AsymFunction::parse("step(1 - x) / x", zero, ExpansionSide::empty(Side::Infinity, 30.0))
        .unwrap()
        .with_support(0.0, 1.0)
        .unwrap();
    let phi: Expr = "exp(-x)".parse().unwrap();
    let e = corollary_expansion(&phi, &f, 2.0).unwrap();
    assert!((e.coefficient(1.0, 1).re - 1.0).abs() < 1e-12, "{e:?}");
    assert!(e.coefficient(1.0, 0).norm() < 1e-9, "{e:?}");
    assert!((e.coefficient(2.0, 0).re + 1.0).abs() < 1e-9, "{e:?}");
}

#[test]
fn corollary_is_linear() {
    let phi: Expr = "exp(-x)".parse().unwrap();
    let f = harmonic_tail();
    let g = AsymFunction::parse(
        "exp(-x)",
        ExpansionSide::new(Side::Zero, vec![Term::real(0.0, &[1.0])], 1.5).unwrap(),
        ExpansionSide::empty(Side::Infinity, 30.0),
    )
    .unwrap();
    let sum = AsymFunction::linear_combination(&[(c64(1.0), &f), (c64(1.0), &g)]).unwrap();
    let a = corollary_expansion(&phi, &f, 1.0).unwrap();
    let b = corollary_expansion(&phi, &g, 1.0).unwrap();
    let s = corollary_expansion(&phi, &sum, 1.0).unwrap();
    assert!(a.sum(&b, true).max_coefficient_gap(&s) < 1e-9);
}
