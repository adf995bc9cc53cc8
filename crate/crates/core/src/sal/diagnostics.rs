//! Sampled checks of the SAL assumptions: the remainder bound with its
//! constants `C_JK`, integrability of the boundary data, and the growth of
//! `f_p(θ)` as `θ → 0`.

use serde::Serialize;

use super::SigmaFunction;
use crate::fit::slope;
use crate::numdiff::MAX_FD_ORDER;
use crate::quadrature::{dyadic_growth, GrowthModel, Quadrature, DIVERGENCE_RATE};

/// Largest `J` sampled for `x^J ∂₁^K` of the remainder.
pub const MAX_J: usize = 2;
/// Grid in `ζ` for the remainder bound.
pub const ZETA_RANGE: (f64, f64) = (2.0, 1e4);
pub const ZETA_POINTS: usize = 10;
/// Points per `ζ` in `x ∈ [X_MIN, ζ]`.
pub const X_POINTS: usize = 24;
pub const X_MIN: f64 = 1e-3;
/// Growth of the normalized remainder tolerated before the bound is rejected.
pub const BOUND_SLOPE_TOL: f64 = 0.1;
/// `θ = 2^{-k}` for `k = 0..=FP_LEVELS`.
pub const FP_LEVELS: usize = 8;
const DYADIC_LEVELS: usize = 16;

/// Sampled `C_JK` for one `(J, K)`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RemainderBound {
    pub j: usize,
    pub k: usize,
    /// `max |x^J ∂₁^K r| ζ^{p+1} / |ln ζ|^r` over the grid.
    pub constant: f64,
    /// Slope of the normalized remainder in `ln ζ`; `None` when it vanishes.
    pub slope: Option<f64>,
    pub passed: bool,
    pub finite_difference: bool,
}

/// `∫₀¹ |ζʲ ∂₁ʲσ(0,ζ)| dζ`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundaryIntegral {
    pub j: usize,
    pub value: f64,
    pub model: GrowthModel,
    pub finite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum FpModel {
    Constant,
    Logarithmic,
    Power,
    Divergent,
    Unavailable,
}

/// `f_p(θ)` sampled at `θ = 2^{-k}` with the best of the growth models.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FpFit {
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub model: FpModel,
    /// Mean `log₂` of successive increment ratios; `T` of `θ^{-T}` when positive.
    pub exponent: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HypothesisReport {
    pub ok: bool,
    pub skipped: bool,
    pub remainder_bounds: Vec<RemainderBound>,
    pub boundary_integrals: Vec<BoundaryIntegral>,
    pub fp: Option<FpFit>,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub fn skipped() -> Self {
        HypothesisReport {
            ok: true,
            skipped: true,
            remainder_bounds: Vec::new(),
            boundary_integrals: Vec::new(),
            fp: None,
            notes: vec!["diagnostics skipped".into()],
        }
    }

    /// One line naming every failed check.
    pub fn summary(&self) -> String {
        if self.skipped {
            return "diagnostics skipped".into();
        }
        let mut fails = Vec::new();
        for b in self.remainder_bounds.iter().filter(|b| !b.passed) {
            let s = b.slope.map_or("nan".into(), |s| format!("{s:.3}"));
            fails.push(format!("remainder bound (J={}, K={}) grows with slope {s}", b.j, b.k));
        }
        for b in self.boundary_integrals.iter().filter(|b| !b.finite) {
            fails.push(format!("boundary integral j={} diverges", b.j));
        }
        if let Some(fp) = &self.fp {
            match fp.model {
                FpModel::Divergent => fails.push("f_p integral diverges".into()),
                FpModel::Unavailable => fails.push("f_p could not be evaluated".into()),
                _ => {}
            }
        }
        if fails.is_empty() {
            "all sampled hypotheses hold".into()
        } else {
            fails.join("; ")
        }
    }
}

fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn remainder_bounds(sigma: &SigmaFunction) -> Vec<RemainderBound> {
    let p = sigma.order();
    let r = sigma.log_bound() as i32;
    let zetas = geometric(ZETA_RANGE.0, ZETA_RANGE.1, ZETA_POINTS);
    let mut out = Vec::new();
    for k in 0..=p {
        let fd = !sigma.symbolic_dx(k);
        // maxima[j][i]: max over x of |x^J ∂^K r| at zetas[i]
        let mut maxima = vec![vec![0.0f64; zetas.len()]; MAX_J + 1];
        let mut broken = false;
        for (i, &zeta) in zetas.iter().enumerate() {
            for &x in &geometric(X_MIN, zeta, X_POINTS) {
                let (d, a) = match (sigma.dx(k, x, zeta), sigma.asym_dx(k, x, zeta)) {
                    (Ok(d), Ok(a)) => (d, a.re),
                    _ => {
                        broken = true;
                        continue;
                    }
                };
                let diff = (d - a).abs();
                let floor = if fd { 1e-6 } else { 64.0 * f64::EPSILON } * (d.abs() + a.abs());
                if !diff.is_finite() {
                    broken = true;
                    continue;
                }
                if diff <= floor {
                    continue;
                }
                for (j, row) in maxima.iter_mut().enumerate() {
                    row[i] = row[i].max(x.powi(j as i32) * diff);
                }
            }
        }
        for (j, row) in maxima.iter().enumerate() {
            let normalized: Vec<f64> = zetas
                .iter()
                .zip(row)
                .map(|(&z, &m)| m * z.powi(p as i32 + 1) / z.ln().abs().powi(r))
                .collect();
            let constant = normalized.iter().cloned().fold(0.0, f64::max);
            let pts: Vec<(f64, f64)> = zetas
                .iter()
                .zip(&normalized)
                .filter(|(_, &c)| c > 0.0)
                .map(|(&z, &c)| (z.ln(), c.ln()))
                .collect();
            let s = if pts.len() >= 3 { slope(&pts) } else { None };
            let passed = !broken && s.is_none_or(|s| s <= BOUND_SLOPE_TOL);
            out.push(RemainderBound { j, k, constant, slope: s, passed, finite_difference: fd });
        }
    }
    out
}

fn boundary_integrals(sigma: &SigmaFunction, quad: &Quadrature<f64>) -> Vec<BoundaryIntegral> {
    (0..sigma.order())
        .map(|j| {
            let g = |z: f64| z.powi(j as i32) * sigma.dx(j, 0.0, z).unwrap_or(f64::NAN);
            let fit = dyadic_growth(quad, g, 1.0, DYADIC_LEVELS);
            BoundaryIntegral { j, value: fit.estimate, model: fit.model, finite: !fit.divergent() }
        })
        .collect()
}

/// `s ↦ s^p ∫₀¹ |∂₁^pσ(θst, s)| dt`, or `|σ(θs, s)|` when `p = 0`.
fn fp_integrand(sigma: &SigmaFunction, quad: &Quadrature<f64>, theta: f64, s: f64) -> f64 {
    let p = sigma.order();
    if p == 0 {
        return sigma.eval(theta * s, s).abs();
    }
    let inner = quad.integrate(|t| sigma.dx(p, theta * s * t, s).unwrap_or(f64::NAN).abs(), 0.0, 1.0);
    s.powi(p as i32) * inner.value
}

fn fp_fit(sigma: &SigmaFunction, quad: &Quadrature<f64>) -> FpFit {
    let thetas: Vec<f64> = (0..=FP_LEVELS).map(|k| 0.5f64.powi(k as i32)).collect();
    let p = sigma.order();
    if p > MAX_FD_ORDER && !sigma.symbolic_dx(p) {
        return FpFit { thetas, values: Vec::new(), model: FpModel::Unavailable, exponent: f64::NAN };
    }
    let mut values = Vec::with_capacity(thetas.len());
    let mut model = None;
    for &theta in &thetas {
        let fit = dyadic_growth(quad, |s| fp_integrand(sigma, quad, theta, s), 1.0, DYADIC_LEVELS);
        if !fit.estimate.is_finite() && !fit.divergent() {
            model = Some(FpModel::Unavailable);
        }
        if fit.divergent() {
            model = Some(FpModel::Divergent);
        }
        values.push(fit.estimate);
    }
    if let Some(model) = model {
        return FpFit { thetas, values, model, exponent: f64::NAN };
    }
    // successive increments V(θ/2) − V(θ) shrink geometrically when f_p is
    // bounded, stay level for ln θ growth and grow like 2^T for θ^{-T}
    let scale = values.iter().cloned().fold(0.0, f64::max);
    let incs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let tail = &incs[incs.len() - 4..];
    if tail.iter().all(|&d| d <= 1e-9 * scale) {
        return FpFit { thetas, values, model: FpModel::Constant, exponent: 0.0 };
    }
    let ratios: Vec<f64> = tail.windows(2).filter(|w| w[0] > 0.0).map(|w| (w[1] / w[0]).max(1e-300)).collect();
    let exponent = if ratios.is_empty() {
        f64::NEG_INFINITY
    } else {
        ratios.iter().map(|r| r.log2()).sum::<f64>() / ratios.len() as f64
    };
    let model = if exponent < -DIVERGENCE_RATE {
        FpModel::Constant
    } else if exponent <= DIVERGENCE_RATE {
        FpModel::Logarithmic
    } else {
        FpModel::Power
    };
    FpFit { thetas, values, model, exponent }
}

/// Runs every sampled check; never fails, the verdict is in the report.
pub fn check_sal_hypotheses(sigma: &SigmaFunction) -> HypothesisReport {
    let quad = Quadrature::new(1e-11, 1e-8);
    let remainder_bounds = remainder_bounds(sigma);
    let boundary_integrals = boundary_integrals(sigma, &quad);
    let fp = fp_fit(sigma, &quad);
    let mut notes = vec![format!(
        "remainder sampled on {ZETA_POINTS} points ζ ∈ [{}, {}] × {X_POINTS} points x ∈ [{X_MIN}, ζ], J ≤ {MAX_J}",
        ZETA_RANGE.0, ZETA_RANGE.1
    )];
    if remainder_bounds.iter().any(|b| b.finite_difference) {
        notes.push("some x-derivatives use finite differences (relative noise floor 1e-6)".into());
    }
    let ok = remainder_bounds.iter().all(|b| b.passed)
        && boundary_integrals.iter().all(|b| b.finite)
        && !matches!(fp.model, FpModel::Divergent | FpModel::Unavailable);
    HypothesisReport { ok, skipped: false, remainder_bounds, boundary_integrals, fp: Some(fp), notes }
}
