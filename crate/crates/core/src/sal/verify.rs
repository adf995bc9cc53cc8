//! Comparison of an expansion in `z` with direct quadrature of
//! `∫₀^∞ σ(x, xz) dx`.

use serde::Serialize;

use super::SigmaFunction;
use crate::asymfun::Expansion;
use crate::fit::least_squares;
use crate::quadrature::Quadrature;
use crate::{Error, Result};

/// Residuals below this (relative to the direct value) are not used in fits.
const RESIDUAL_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResidualPoint {
    pub z: f64,
    pub direct: f64,
    pub truncated: f64,
    pub residual: f64,
    pub quadrature_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub points: Vec<ResidualPoint>,
    /// Slope of `ln|residual|` against `ln z`.
    pub exponent: Option<f64>,
    /// Exponent and log power from `ln|res| = c + a ln z + b ln ln z`.
    pub exponent_with_log: Option<f64>,
    pub log_power: Option<f64>,
}

fn quad() -> Quadrature<f64> {
    Quadrature::new(1e-14, 1e-13)
}

/// `∫₀^∞ σ(x, xz) dx` split at `x = 1/z` and at the support edges.
pub fn direct_integral(sigma: &SigmaFunction, z: f64) -> (f64, f64, bool) {
    let q = quad();
    let f = |x: f64| sigma.eval(x, x * z);
    let mut pts = vec![1.0 / z, 1.0];
    let mut hi = f64::INFINITY;
    if let Some((a, b)) = sigma.x_support() {
        pts.push(a);
        pts.push(b);
        hi = hi.min(b);
    }
    if let Some((a, b)) = sigma.zeta_support() {
        pts.push(a / z);
        pts.push(b / z);
        hi = hi.min(b / z);
    }
    pts.retain(|p| *p > 0.0 && p.is_finite() && *p <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let first = pts[0];
    let mut r = q.integrate_from_zero(&f, first);
    r = r.join(q.integrate_points(&f, &pts));
    let last = *pts.last().unwrap_or(&first);
    if hi.is_infinite() {
        r = r.join(q.integrate_log_to_infinity(&f, last));
    }
    let tol = q.abs_tol.max(q.rel_tol * r.value.abs());
    (r.value, r.error, r.converged || r.error <= 1e4 * tol)
}

/// Residuals of `expansion` against direct quadrature on `z_grid`, with
/// decay fits.
pub fn verify_expansion(expansion: &Expansion, sigma: &SigmaFunction, z_grid: &[f64]) -> Result<VerifyReport> {
    if z_grid.is_empty() {
        return Err(Error::InvalidInput("empty z grid".into()));
    }
    if z_grid.iter().any(|&z| !(z >= 2.0) || !z.is_finite()) {
        return Err(Error::InvalidInput("z grid must lie in [2, ∞)".into()));
    }
    if z_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("z grid must be increasing".into()));
    }
    let points: Vec<ResidualPoint> = z_grid
        .iter()
        .map(|&z| {
            let (direct, error, ok) = direct_integral(sigma, z);
            let truncated = expansion.eval(z).re;
            let failure = (!ok || !direct.is_finite())
                .then(|| format!("quadrature did not converge (estimate {error:e})"));
            ResidualPoint { z, direct, truncated, residual: (direct - truncated).abs(), quadrature_error: error, failure }
        })
        .collect();
    let usable: Vec<&ResidualPoint> = points
        .iter()
        .filter(|p| p.failure.is_none() && p.residual > RESIDUAL_FLOOR * p.direct.abs().max(1e-300) && p.residual > 0.0)
        .collect();
    let mut exponent = None;
    let mut exponent_with_log = None;
    let mut log_power = None;
    if usable.len() >= 2 {
        let rows: Vec<Vec<f64>> = usable.iter().map(|p| vec![1.0, p.z.ln()]).collect();
        let rhs: Vec<f64> = usable.iter().map(|p| p.residual.ln()).collect();
        exponent = least_squares(&rows, &rhs).ok().map(|f| f.coefficients[1]);
        if usable.len() >= 4 {
            let rows: Vec<Vec<f64>> = usable.iter().map(|p| vec![1.0, p.z.ln(), p.z.ln().ln()]).collect();
            if let Ok(f) = least_squares(&rows, &rhs) {
                exponent_with_log = Some(f.coefficients[1]);
                log_power = Some(f.coefficients[2]);
            }
        }
    }
    Ok(VerifyReport { points, exponent, exponent_with_log, log_power })
}
