//! The acceptance criteria as runnable checks, shared by the `acceptance`
//! test target and the command-line `selftest`.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::asymfun::{AsymFunction, ExpansionSide, Side, Term};
use crate::expr::{parse, Expr, StepRule};
use crate::indexsets::{
    check_integrability, nullfaces, push_index_family, ExponentMatrix, IndexEntry, IndexFamily,
    IndexSet,
};
use crate::numdiff::derivative;
use crate::pushforward::{condition_c_check, push_xy, sal_prediction_smooth, BlowupDensity, Density2D};
use crate::quadrature::Quadrature;
use crate::sal::{sal_expansion, sal_expansion_verified, SalOptions, SigmaFunction};
use crate::Result;

type C64 = num_complex::Complex64;

/// Outcome of one criterion.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionResult {
    /// One line: `[PASS] 3 substitution (0.012 s / 2 s): detail`.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.3} s / {} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

struct Criterion {
    id: usize,
    name: &'static str,
    budget: f64,
    run: fn() -> Result<(bool, String)>,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, name: "reginteg-pure-power", budget: 1.0, run: pure_power_cancellation },
    Criterion { id: 2, name: "pushforward-u0", budget: 5.0, run: u0_push_forward },
    Criterion { id: 3, name: "substitution", budget: 2.0, run: substitution },
    Criterion { id: 4, name: "mellin", budget: 10.0, run: mellin_consistency },
    Criterion { id: 5, name: "sal-geometric", budget: 30.0, run: sal_geometric },
    Criterion { id: 6, name: "pushforward-smooth", budget: 60.0, run: smooth_density },
    Criterion { id: 7, name: "indexset-push", budget: 0.1, run: index_algebra },
    Criterion { id: 8, name: "blowup", budget: 10.0, run: blowup_model },
    Criterion { id: 9, name: "parser", budget: 1.0, run: parser_corpus },
    Criterion { id: 10, name: "pushforward-linear", budget: 2.0, run: linear_density },
];

/// Names of all criteria, in order.
pub fn criterion_names() -> Vec<&'static str> {
    CRITERIA.iter().map(|c| c.name).collect()
}

/// Runs every criterion whose name contains `filter`; a criterion passes
/// only if its check passes inside its time budget.
pub fn run(filter: Option<&str>) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter(|c| filter.map_or(true, |f| c.name.contains(f)))
        .map(|c| {
            let start = Instant::now();
            let outcome = (c.run)();
            let elapsed = start.elapsed();
            let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
            let in_time = elapsed <= Duration::from_secs_f64(c.budget);
            let detail = if ok && !in_time { format!("{detail}; over the time budget") } else { detail };
            CriterionResult {
                id: c.id,
                name: c.name,
                passed: ok && in_time,
                detail,
                seconds: elapsed.as_secs_f64(),
                budget_seconds: c.budget,
            }
        })
        .collect()
}

fn side(s: Side, terms: &[(f64, &[f64])], order: f64) -> Result<ExpansionSide> {
    ExpansionSide::new(s, terms.iter().map(|(e, c)| Term::real(*e, c)).collect(), order)
}

fn c64(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn geometric_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

fn pure_power_cancellation() -> Result<(bool, String)> {
    let quad = Quadrature::default();
    let mut worst_closed: f64 = 0.0;
    let mut worst_quad: f64 = 0.0;
    for alpha in [-2.5f64, -1.3, -1.0, -0.4, 0.7] {
        for k in 0..3 {
            let mut coeffs = vec![0.0; k + 1];
            coeffs[k] = 1.0;
            let order = alpha.abs() + 3.0;
            let f = AsymFunction::parse(
                &format!("x^({alpha})*log(x)^{k}"),
                side(Side::Zero, &[(alpha, &coeffs)], order)?,
                side(Side::Infinity, &[(alpha, &coeffs)], order)?,
            )?;
            worst_closed = worst_closed.max(f.reg_integral()?.norm());
            worst_quad = worst_quad.max(f.reg_integral_sampled(&quad, 0.25, 4.0)?.value.norm());
        }
    }
    Ok((
        worst_closed <= 1e-12 && worst_quad <= 1e-8,
        format!("max |closed form| {worst_closed:.2e}, max |quadrature path| {worst_quad:.2e}"),
    ))
}

fn u0_push_forward() -> Result<(bool, String)> {
    let u = Density2D::parse("1", 1.0, 1.0, true)?;
    let mut worst: f64 = 0.0;
    for t in geometric_grid(1e-4, 0.5, 20) {
        worst = worst.max((push_xy(&u, t)?.value + t.ln()).abs());
    }
    Ok((worst <= 1e-8, format!("max |push + ln t| {worst:.2e}")))
}

fn geometric_function(n: usize) -> Result<AsymFunction> {
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let zero: Vec<Term> = (0..n).map(|j| Term::real(j as f64, &[sign(j)])).collect();
    let inf: Vec<Term> = (0..n).map(|j| Term::real(-(j as f64) - 1.0, &[sign(j)])).collect();
    AsymFunction::parse(
        "1/(1+x)",
        ExpansionSide::new(Side::Zero, zero, n as f64 + 0.5)?,
        ExpansionSide::new(Side::Infinity, inf, n as f64 - 0.5)?,
    )
}

fn substitution() -> Result<(bool, String)> {
    let g = geometric_function(5)?;
    let mut closed: f64 = 0.0;
    let mut direct: f64 = 0.0;
    for t in [0.1, 0.5, 2.0, 10.0] {
        let lemma = g.scale_reg_integral(t)?;
        closed = closed.max((lemma - c64(t.ln() / t)).norm());
        direct = direct.max((lemma - g.rescale(t)?.reg_integral()?).norm());
    }
    Ok((
        closed <= 1e-8 && direct <= 1e-8,
        format!("max |lemma − ln t/t| {closed:.2e}, max |lemma − rescaled| {direct:.2e}"),
    ))
}

fn exp_taylor(n: usize) -> Vec<Term> {
    let mut fact = 1.0;
    (0..n)
        .map(|j| {
            if j > 0 {
                fact *= j as f64;
            }
            Term::real(j as f64, &[if j % 2 == 0 { 1.0 } else { -1.0 } / fact])
        })
        .collect()
}

fn mellin_suite() -> Result<Vec<(&'static str, AsymFunction)>> {
    let none = |q| ExpansionSide::empty(Side::Infinity, q);
    let exp = AsymFunction::parse("exp(-x)", ExpansionSide::new(Side::Zero, exp_taylor(4), 4.5)?, none(20.0))?;
    let split = AsymFunction::parse(
        "step(1 - x)/x + (1 - step(1 - x))*exp(-x)",
        side(Side::Zero, &[(-1.0, &[1.0])], 20.0)?,
        none(20.0),
    )?
    .with_breakpoints(&[1.0]);
    let half: Vec<Term> = exp_taylor(3).into_iter().map(|t| Term::new(t.exponent - 0.5, t.poly)).collect();
    let root = AsymFunction::parse("exp(-x)/sqrt(x)", ExpansionSide::new(Side::Zero, half, 2.5)?, none(20.0))?;
    let log_exp = AsymFunction::parse(
        "log(x)*exp(-x)",
        side(Side::Zero, &[(0.0, &[0.0, 1.0]), (1.0, &[0.0, -1.0]), (2.0, &[0.0, 0.5])], 3.5)?,
        none(20.0),
    )?;
    Ok(vec![
        ("exp(-x)", exp),
        ("1/(1+x)", geometric_function(4)?),
        ("split", split),
        ("exp(-x)/sqrt(x)", root),
        ("log(x)exp(-x)", log_exp),
    ])
}

fn mellin_consistency() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut poles = 0;
    let mut mismatches = Vec::new();
    for (name, f) in mellin_suite()? {
        let fp = f.mellin_finite_part()?.value;
        worst = worst.max((fp - f.reg_integral()?).norm());
        for pole in f.mellin_poles() {
            let fit = f.fit_pole_order(pole.location)?;
            poles += 1;
            if fit.fitted_order != fit.declared_order {
                mismatches.push(format!("{name} at {}: {} vs {}", pole.location, fit.fitted_order, fit.declared_order));
            }
        }
    }
    Ok((
        worst <= 1e-6 && mismatches.is_empty(),
        format!("max |finite part − reg| {worst:.2e}; {poles} poles, mismatched orders {mismatches:?}"),
    ))
}

fn sal_geometric() -> Result<(bool, String)> {
    let sigma = |p| SigmaFunction::parse("exp(-x) * exp(-zeta)", p, 0, Vec::new());
    let r = sal_expansion(&sigma(7)?)?;
    let mut worst: f64 = 0.0;
    for j in 0..=6 {
        let expect = if j % 2 == 0 { 1.0 } else { -1.0 };
        worst = worst.max((r.expansion.coefficient(-(j as f64) - 1.0, 0) - c64(expect)).norm());
    }
    let grid: Vec<f64> = (0..8).map(|i| 10.0 * 1.6f64.powi(i)).collect();
    let (_, v) = sal_expansion_verified(&sigma(3)?, &SalOptions::default(), &grid)?;
    let slope = v.exponent.unwrap_or(f64::NAN);
    Ok((
        worst <= 1e-10 && (slope + 4.0).abs() <= 0.3,
        format!("max coefficient error {worst:.2e}, residual exponent {slope:.3} (p = 3)"),
    ))
}

/// Fitted `a` in `ln|r| = c + a ln t + b ln ln(1/t)`.
fn decay_exponent(points: &[(f64, f64)]) -> Result<f64> {
    let rows: Vec<Vec<f64>> = points.iter().map(|(t, _)| vec![1.0, t.ln(), (-t.ln()).ln()]).collect();
    let rhs: Vec<f64> = points.iter().map(|(_, r)| r.ln()).collect();
    Ok(crate::fit::least_squares(&rows, &rhs)?.coefficients[1])
}

fn smooth_density() -> Result<(bool, String)> {
    let u = Density2D::parse(
        "exp(-x - y) * exp(1 - 1/(1 - x^2)) * exp(1 - 1/(1 - y^2))",
        1.0,
        1.0,
        true,
    )?;
    let order = 3;
    let e = sal_prediction_smooth(&u, order)?;
    let mut pts = Vec::new();
    for t in geometric_grid(1e-3, 1e-1, 10) {
        let r = (push_xy(&u, t)?.value - e.eval(t).re).abs();
        if r > 0.0 {
            pts.push((t, r));
        }
    }
    let a = decay_exponent(&pts)?;
    Ok((a >= order as f64 + 0.7, format!("residual decay exponent {a:.3} for J = {order}")))
}

fn r(alpha: f64, k: usize) -> IndexEntry {
    IndexEntry::real(alpha, k)
}

fn index_algebra() -> Result<(bool, String)> {
    let n = 5.0;
    let e = ExponentMatrix::new(vec!["xaxis".into(), "yaxis".into()], vec!["0".into()], vec![vec![1], vec![1]])?;
    let smooth = IndexSet::complete(&[r(0.0, 0)], n)?;
    let fam = IndexFamily::from([("xaxis".to_string(), smooth.clone()), ("yaxis".to_string(), smooth)]);
    let (out, _) = push_index_family(&e, &fam, n)?;
    let got = &out["0"];
    let expect: Vec<IndexEntry> = (0..5).flat_map(|j| [r(j as f64, 0), r(j as f64, 1)]).collect();
    let same = got.len() == expect.len() && expect.iter().all(|en| got.contains(en.alpha, en.k));
    let listed: Vec<String> = got.entries().iter().map(|en| format!("({},{})", en.alpha.re, en.k)).collect();
    Ok((same, format!("pushed set {{{}}}", listed.join(", "))))
}

fn blowup_family(k2: Option<IndexEntry>) -> Result<IndexFamily> {
    let n = 5.0;
    let k2 = match k2 {
        Some(g) => IndexSet::complete(&[g], n)?,
        None => IndexSet::empty(n),
    };
    Ok(IndexFamily::from([
        ("G1".to_string(), IndexSet::complete(&[r(0.0, 0)], n)?),
        ("G2".to_string(), k2),
        ("G3".to_string(), IndexSet::complete(&[r(1.0, 0)], n)?),
    ]))
}

fn blowup_model() -> Result<(bool, String)> {
    let e = ExponentMatrix::new(
        vec!["G1".into(), "G2".into(), "G3".into()],
        vec!["H".into()],
        vec![vec![1], vec![0], vec![1]],
    )?;
    let null = nullfaces(&e);
    let null_ok = null == ["G2"];

    let mut rule_ok = true;
    for g2 in [r(1.0, 0), r(0.5, 2), r(0.25, 0), r(0.0, 0), r(-0.5, 1), r(-2.0, 0), IndexEntry::new(C64::new(0.3, 2.0), 0)] {
        let fam = blowup_family(Some(g2))?;
        let min_re = fam["G2"].min_re().unwrap_or(f64::INFINITY);
        rule_ok &= check_integrability(&fam, &e)?.integrable == (min_re > 0.0);
    }

    let grid = [0.5, 0.1, 0.01];
    let good = BlowupDensity::parse("x", blowup_family(Some(r(1.0, 0)))?)?.with_x_support(0.0, 1.0);
    let bad = BlowupDensity::parse("x * y", blowup_family(Some(r(0.0, 0)))?)?.with_x_support(0.0, 1.0);
    let g = condition_c_check(&good, 2, &grid);
    let b = condition_c_check(&bad, 2, &grid);
    let pair_ok = g.bounded && !b.bounded && g.agree == Some(true) && b.agree == Some(true);
    Ok((
        null_ok && rule_ok && pair_ok,
        format!(
            "nullfaces {null:?}; integrability rule {}; condition (C) ζt bounded = {}, t bounded = {}, verdicts agree = {}",
            if rule_ok { "holds" } else { "violated" },
            g.bounded,
            b.bounded,
            g.agree == Some(true) && b.agree == Some(true)
        ),
    ))
}

/// Expressions in `x` checked for round trips and derivatives.
pub const PARSER_CORPUS: [&str; 20] = [
    "x",
    "2*x + 1",
    "x^2 - 3*x + 2",
    "1/(1 + x)",
    "exp(-x)",
    "log(x)",
    "x*log(x)^2",
    "sin(x)*cos(x)",
    "sqrt(x + 1)",
    "x^(-0.5)",
    "exp(-x^2/2)",
    "pow(x, 1.5)",
    "(x - 1)/(x + 1)",
    "-x^3 + x",
    "log(1 + x^2)",
    "exp(sin(x))",
    "1e-3*x^4 - 2.5E+1",
    "x/(1 + exp(-x))",
    "cos(2*x)^2",
    "sqrt(x)*log(x)*exp(-x)",
];

fn parser_corpus() -> Result<(bool, String)> {
    let points: Vec<f64> = (0..10).map(|i| 0.3 + 0.25 * i as f64).collect();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for text in PARSER_CORPUS {
        let e: Expr = parse(text)?;
        let again = parse(&e.to_string())?;
        if again != e {
            failures.push(format!("round trip of `{text}` gave `{again}`"));
        }
        let d = e.diff_with("x", StepRule::Error)?.compile(&["x"])?;
        let f = e.compile(&["x"])?;
        for &x in &points {
            let symbolic = d.eval(&[x])?;
            let fd = derivative(&|v| f.eval_or_nan(&[v]), x, 1)?;
            let rel = (symbolic - fd).abs() / symbolic.abs().max(1.0);
            worst = worst.max(rel);
            if !(rel <= 1e-6) {
                failures.push(format!("d/dx `{text}` at {x}: {symbolic} vs {fd}"));
            }
        }
    }
    Ok((
        failures.is_empty(),
        format!("{} expressions, max relative derivative gap {worst:.2e}; failures {failures:?}", PARSER_CORPUS.len()),
    ))
}

fn linear_density() -> Result<(bool, String)> {
    let u = Density2D::parse("x", 1.0, 1.0, true)?;
    let mut worst: f64 = 0.0;
    for t in [1e-3, 0.01, 0.1, 0.3, 0.5, 0.9] {
        worst = worst.max((push_xy(&u, t)?.value - (1.0 - t)).abs());
    }
    let e = sal_prediction_smooth(&u, 3)?;
    let c0 = e.coefficient(0.0, 0).re;
    let c1 = e.coefficient(1.0, 0).re;
    let logs: f64 = (0..=3).map(|j| e.coefficient(j as f64, 1).norm()).fold(0.0, f64::max);
    let coeff_ok = (c0 - 1.0).abs() < 1e-9 && (c1 + 1.0).abs() < 1e-9 && logs == 0.0;
    Ok((
        worst <= 1e-9 && coeff_ok,
        format!("max |push − (1 − t)| {worst:.2e}; coefficients ({c0:.12}, {c1:.12}), max log coefficient {logs:.1e}"),
    ))
}
