//! The corner `(0,0)` of the quadrant blown up, with `F = π₂ ∘ β`: b-density
//! coefficients in the charts `(x, y = t/x)` near `A` and `(ζ = x/t, t)` near
//! `B`, the induced `σ`, the `dt/t` coefficient of `F_*u` and the front-face
//! integrability check.

use serde::Serialize;

use super::{Density2D, PushValue};
use crate::expr::{BinOp, Bindings, Expr, Node, StepRule};
use crate::indexsets::{check_integrability, ExponentMatrix, IndexFamily, IndexSet, IntegrabilityReport};
use crate::quadrature::{dyadic_growth, GrowthModel, Quadrature};
use crate::sal::{SigmaFunction, SigmaTerm};
use crate::scalar::{factorial, same_exponent, EXPONENT_TOL};
use crate::{Error, Result};

type C64 = num_complex::Complex64;

/// Face labels of the blown-up quadrant: `y = 0`, `ζ = 0` (front face side
/// of `B`), and `x = 0`/`t = 0` (the front face).
pub const FACES: [&str; 3] = ["G1", "G2", "G3"];

/// Largest derivative order accepted by [`condition_c_check`].
pub const MAX_CONDITION_ORDER: usize = 4;

const DYADIC_LEVELS: usize = 30;

/// `x·rest ↦ rest` when `x` is a top-level factor, else `e / x`.
fn divide_by_var(e: &Expr, var: &str) -> Expr {
    fn strip(e: &Expr, var: &str) -> Option<Expr> {
        match e.node() {
            Node::Var(v) if &**v == var => Some(Expr::num(1.0)),
            Node::Bin(BinOp::Mul, a, b) => strip(a, var)
                .map(|a2| Expr::mul(a2, b.clone()))
                .or_else(|| strip(b, var).map(|b2| Expr::mul(a.clone(), b2))),
            Node::Neg(a) => strip(a, var).map(Expr::neg),
            _ => None,
        }
    }
    strip(e, var).unwrap_or_else(|| Expr::div(e.clone(), Expr::var(var)))
}

/// A b-density `u_A(x, y) dx/x dy/y` on the blown-up quadrant with declared
/// index sets at the faces `G1`, `G2`, `G3`.
#[derive(Debug, Clone)]
pub struct BlowupDensity {
    u_a: Expr,
    index: IndexFamily,
    sigma_expr: Expr,
    sigma_terms: Vec<SigmaTerm>,
    x_support: Option<(f64, f64)>,
    y_max: Option<f64>,
    /// `u` when the b-density came from a density `u dx dy`.
    density: Option<Expr>,
    sal_order: usize,
}

impl BlowupDensity {
    pub fn new(u_a: Expr, index: IndexFamily) -> Result<Self> {
        if let Some(v) = u_a.free_vars().into_iter().find(|v| v != "x" && v != "y") {
            return Err(Error::UnboundVariable(v));
        }
        if let Some(f) = FACES.iter().find(|f| !index.contains_key(**f)) {
            return Err(Error::FaceMismatch(format!("index family lacks face {f}")));
        }
        let sigma_expr = divide_by_var(&u_a.substitute("y", &Expr::div(Expr::num(1.0), Expr::var("zeta"))), "x");
        Ok(BlowupDensity { u_a, index, sigma_expr, sigma_terms: Vec::new(), x_support: None, y_max: None, density: None, sal_order: 0 })
    }

    pub fn parse(text: &str, index: IndexFamily) -> Result<Self> {
        Self::new(text.parse()?, index)
    }

    /// `u_A = x·y·u` for a density `u dx dy`; `σ(x, ζ) = u(x, 1/ζ)/ζ` with the
    /// Taylor data `∂₂ʲu(x, 0)/j!` at `ζ^{-j-1}`, and smooth index sets with
    /// `K₁ = K₃ = {(n, 0) : n ≥ 1}`, `K₂ = ∅`.
    pub fn from_density(u: &Density2D, truncation: f64) -> Result<Self> {
        let e = u.gated_expr();
        let u_a = Expr::mul(Expr::mul(Expr::var("x"), Expr::var("y")), e.clone());
        let vanishing = IndexSet::complete(&[crate::indexsets::IndexEntry::real(1.0, 0)], truncation)?;
        let index: IndexFamily = [
            ("G1".to_string(), vanishing.clone()),
            ("G2".to_string(), IndexSet::empty(truncation)),
            ("G3".to_string(), vanishing),
        ]
        .into_iter()
        .collect();
        let mut d = Self::new(u_a, index)?;
        let inv = Expr::div(Expr::num(1.0), Expr::var("zeta"));
        d.sigma_expr = Expr::mul(e.substitute("y", &inv), inv);
        d.x_support = Some((0.0, u.x_max()));
        d.y_max = Some(u.y_max());
        d.density = Some(e.clone());
        Ok(d)
    }

    /// Declares `σ ~ Σ ζ^{-α} lnᵏζ σ_{αk}(x)` as `ζ → ∞`; each `(α, k)` must lie in `K₁`.
    pub fn with_sigma_terms(mut self, terms: &[(C64, usize, Expr)]) -> Result<Self> {
        let k1 = &self.index["G1"];
        let mut out: Vec<SigmaTerm> = Vec::new();
        for (alpha, k, coeff) in terms {
            if alpha.re < k1.truncation() && !k1.contains(*alpha, *k) {
                return Err(Error::InvalidExpansion(format!("({alpha}, {k}) is not in the index set at G1")));
            }
            let e = -*alpha;
            let slot = match out.iter().position(|t| same_exponent(t.alpha, e, EXPONENT_TOL)) {
                Some(i) => i,
                None => {
                    out.push(SigmaTerm::new(e, Vec::new()));
                    out.len() - 1
                }
            };
            let coeffs = &mut out[slot].coeffs;
            while coeffs.len() <= *k {
                coeffs.push(Expr::num(0.0));
            }
            coeffs[*k] = Expr::add(coeffs[*k].clone(), coeff.clone());
        }
        self.sigma_terms = out;
        Ok(self)
    }

    pub fn with_x_support(mut self, a: f64, b: f64) -> Self {
        self.x_support = Some((a, b));
        self
    }

    /// SAL order `p` used by [`sigma_from_density`].
    pub fn with_sal_order(mut self, p: usize) -> Self {
        self.sal_order = p;
        self
    }

    pub fn u_a_expr(&self) -> &Expr {
        &self.u_a
    }

    pub fn index(&self) -> &IndexFamily {
        &self.index
    }

    pub fn sigma_expr(&self) -> &Expr {
        &self.sigma_expr
    }

    pub fn u_a(&self, x: f64, y: f64) -> Result<f64> {
        self.u_a.eval(&Bindings::new().with("x", x).with("y", y))
    }

    /// `u_B(ζ, t) = u_A(ζt, 1/ζ)` as an expression in `zeta`, `t`.
    pub fn u_b_expr(&self) -> Expr {
        let x = Expr::mul(Expr::var("zeta"), Expr::var("t"));
        let y = Expr::div(Expr::num(1.0), Expr::var("zeta"));
        let tmp = "__y";
        self.u_a.substitute("y", &Expr::var(tmp)).substitute("x", &x).substitute(tmp, &y)
    }

    pub fn u_b(&self, zeta: f64, t: f64) -> Result<f64> {
        self.u_b_expr().eval(&Bindings::new().with("zeta", zeta).with("t", t))
    }

    /// Checks `K₃ ⊆ {(n, 0) : n ≥ 1}`, the smooth-vanishing model at the front face.
    pub fn check_smooth_vanishing(&self) -> Result<()> {
        let k3 = &self.index["G3"];
        for e in k3.entries() {
            let n = e.alpha.re.round();
            if e.k != 0 || e.alpha.im.abs() > EXPONENT_TOL || (e.alpha.re - n).abs() > EXPONENT_TOL || n < 1.0 {
                return Err(Error::InvalidExpansion(format!(
                    "({}, {}) at G3 is outside the smooth functions vanishing at the front face",
                    e.alpha, e.k
                )));
            }
        }
        Ok(())
    }

    fn exponent_matrix() -> Result<ExponentMatrix> {
        ExponentMatrix::new(FACES.iter().map(|s| s.to_string()).collect(), vec!["H".into()], vec![vec![1], vec![0], vec![1]])
    }
}

/// `σ(x, ζ) = u_A(x, 1/ζ)/x` with the declared (or Taylor-derived) large-`ζ` data.
pub fn sigma_from_density(d: &BlowupDensity) -> Result<SigmaFunction> {
    let p = d.sal_order;
    let mut terms = d.sigma_terms.clone();
    if let (true, Some(u)) = (terms.is_empty(), &d.density) {
        // σ = u(x, 1/ζ)/ζ ~ Σ ∂₂ʲu(x, 0)/j! ζ^{-j-1}
        for j in 0..p {
            let fact = factorial(j).ok_or(Error::LogPowerTooLarge(j))?;
            let c = u.diff_n("y", j, StepRule::LocallyConstant)?.fix("y", 0.0);
            terms.push(SigmaTerm::new(C64::new(-(j as f64) - 1.0, 0.0), vec![Expr::mul(Expr::num(1.0 / fact), c)]));
        }
    }
    let max = -(p as f64) - 1.0 + EXPONENT_TOL;
    terms.retain(|t| t.alpha.re > max);
    let mut s = SigmaFunction::new(d.sigma_expr.clone(), p, 0, terms)?;
    if let Some((a, b)) = d.x_support {
        s = s.with_x_support(a, b);
    }
    Ok(s)
}

/// The coefficient of `dt/t` in `F_*u`: `∫₀^∞ σ(x, x/t) dx`, split at `x = t`.
pub fn f_pushforward(d: &BlowupDensity, t: f64) -> Result<PushValue> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
    }
    let sigma = sigma_from_density(d)?;
    let quad = Quadrature::new(1e-14, 1e-12);
    let f = |x: f64| sigma.eval(x, x / t);
    let probe = dyadic_growth(&quad, f, t, DYADIC_LEVELS);
    if probe.divergent() {
        return Err(Error::Divergence(format!(
            "∫σ(x, x/t) dx diverges at x = 0 for t = {t} ({:?} growth): u is not integrable at the front face G2",
            probe.model
        )));
    }
    let mut r = quad.integrate_from_zero(f, t);
    let mut pts = vec![t];
    if let Some(y) = d.y_max {
        pts.push(t / y);
    }
    let hi = d.x_support.map(|s| s.1);
    if let Some(b) = hi {
        pts.push(b);
    }
    pts.retain(|p| *p >= t && hi.is_none_or(|b| *p <= b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    r = r.join(quad.integrate_points(f, &pts));
    if hi.is_none() {
        r = r.join(quad.integrate_log_to_infinity(f, *pts.last().unwrap_or(&t)));
    }
    let accept = 1e4 * quad.abs_tol.max(quad.rel_tol * r.value.abs());
    let value = r.checked(accept)?;
    Ok(PushValue { value, error: r.error, note: None })
}

/// `∫₀¹ ζᵖ |∂₁ᵖσ(ζt, ζ)| dζ` at one `(p, t)`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionSample {
    pub p: usize,
    pub t: f64,
    pub value: f64,
    pub model: GrowthModel,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionCReport {
    pub samples: Vec<ConditionSample>,
    /// All sampled integrals finite.
    pub bounded: bool,
    pub integrability: Option<IntegrabilityReport>,
    pub agree: Option<bool>,
    pub notes: Vec<String>,
}

/// Samples the front-face integrals for `p ≤ p_max` on `t_grid` and compares
/// the verdict with the index-set integrability check for `e = (1, 0, 1)`.
pub fn condition_c_check(d: &BlowupDensity, p_max: usize, t_grid: &[f64]) -> ConditionCReport {
    let mut notes = Vec::new();
    let p_max = if p_max > MAX_CONDITION_ORDER {
        notes.push(format!("derivative order clamped to {MAX_CONDITION_ORDER}"));
        MAX_CONDITION_ORDER
    } else {
        p_max
    };
    let quad = Quadrature::new(1e-12, 1e-9);
    let mut samples = Vec::new();
    match SigmaFunction::new(d.sigma_expr.clone(), p_max, 0, Vec::new()) {
        Ok(mut sigma) => {
            if let Some((a, b)) = d.x_support {
                sigma = sigma.with_x_support(a, b);
            }
            for p in 0..=p_max {
                for &t in t_grid {
                    let g = |z: f64| z.powi(p as i32) * sigma.dx(p, z * t, z).unwrap_or(f64::NAN);
                    let fit = dyadic_growth(&quad, g, 1.0, DYADIC_LEVELS);
                    samples.push(ConditionSample { p, t, value: fit.estimate, model: fit.model });
                }
            }
        }
        Err(e) => notes.push(format!("σ could not be differentiated: {e}")),
    }
    let bounded = !samples.is_empty() && samples.iter().all(|s| s.model == GrowthModel::Bounded && s.value.is_finite());
    let integrability = match BlowupDensity::exponent_matrix().and_then(|e| check_integrability(&d.index, &e)) {
        Ok(r) => Some(r),
        Err(e) => {
            notes.push(format!("integrability check failed: {e}"));
            None
        }
    };
    let agree = integrability.as_ref().map(|r| r.integrable == bounded);
    ConditionCReport { samples, bounded, integrability, agree, notes }
}
