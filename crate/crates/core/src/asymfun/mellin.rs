use serde::Serialize;

use super::regint::{ser_c64, Estimate};
use super::{c64, AsymFunction, Side, C64};
use crate::logpoly::{moment_of_poly, moment_tail, moment_unit_interval, LogPoly};
use crate::quadrature::Quadrature;
use crate::scalar::{same_exponent, EXPONENT_TOL};
use crate::{Error, Result};

/// A pole of the continued Mellin transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleInfo {
    #[serde(serialize_with = "ser_c64")]
    pub location: C64,
    pub order: usize,
    pub side: Side,
}

/// Value of the continued Mellin transform with the poles inside the strip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MellinValue {
    #[serde(serialize_with = "ser_c64")]
    pub value: C64,
    pub error: f64,
    pub poles: Vec<PoleInfo>,
}

/// Pole order read off the growth of `|M(z)|` near a pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PoleFit {
    #[serde(serialize_with = "ser_c64")]
    pub location: C64,
    pub declared_order: usize,
    pub fitted_order: usize,
    pub slope: f64,
}

const FINITE_PART_EPS: [f64; 2] = [1e-2, 1e-3];
const POLE_DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

impl AsymFunction {
    /// `(1 − p, 1 + q)`.
    pub fn mellin_strip(&self) -> (f64, f64) {
        (1.0 - self.zero.order(), 1.0 + self.inf.order())
    }

    /// Poles `−α` (order `deg p_α + 1`) and `−β` inside the strip, sorted by real part.
    pub fn mellin_poles(&self) -> Vec<PoleInfo> {
        let (lo, hi) = self.mellin_strip();
        let mut poles: Vec<PoleInfo> = self
            .zero
            .terms()
            .iter()
            .map(|t| (t, Side::Zero))
            .chain(self.inf.terms().iter().map(|t| (t, Side::Infinity)))
            .map(|(t, side)| PoleInfo { location: -t.exponent, order: t.poly.degree().unwrap_or(0) + 1, side })
            .filter(|p| p.location.re > lo && p.location.re < hi)
            .collect();
        poles.sort_by(|a, b| a.location.re.total_cmp(&b.location.re).then(a.location.im.total_cmp(&b.location.im)));
        poles
    }

    /// `Mf(z)` continued to the strip.
    pub fn mellin(&self, z: C64) -> Result<MellinValue> {
        self.mellin_with(&Quadrature::default(), z)
    }

    pub fn mellin_with(&self, quad: &Quadrature<f64>, z: C64) -> Result<MellinValue> {
        let (lo, hi) = self.mellin_strip();
        if !(z.re > lo && z.re < hi) {
            return Err(Error::StripViolation { re: z.re, im: z.im, lo, hi });
        }
        let poles = self.mellin_poles();
        if let Some(p) = poles.iter().find(|p| same_exponent(p.location, z, EXPONENT_TOL)) {
            return Err(Error::Pole { re: p.location.re, im: p.location.im, order: p.order });
        }
        let w = z - 1.0;
        let a = self.zero_remainder_integral(quad, w)?;
        let b = self.inf_remainder_integral(quad, w)?;
        let mut value = a.value + b.value;
        for t in self.zero.terms() {
            value += moment_of_poly(t.exponent + w, &t.poly, moment_unit_interval)?;
        }
        for t in self.inf.terms() {
            value += moment_of_poly(t.exponent + w, &t.poly, moment_tail)?;
        }
        Ok(MellinValue { value, error: a.error + b.error, poles })
    }

    /// Zeroth Laurent coefficient of `Mf` at `z = 1`.
    ///
    /// Averages `Mf(1 ± ε)` for `ε ∈ {1e-2, 1e-3}` and removes the `ε²` term
    /// by Richardson extrapolation; the averaging cancels a simple pole,
    /// higher-order principal parts at `1` are subtracted in closed form.
    pub fn mellin_finite_part(&self) -> Result<Estimate> {
        self.mellin_finite_part_with(&Quadrature::default())
    }

    pub fn mellin_finite_part_with(&self, quad: &Quadrature<f64>) -> Result<Estimate> {
        let higher = |z: C64| -> Result<C64> {
            let w = z - 1.0;
            let mut acc = c64(0.0);
            let strip = |p: &LogPoly<f64>| {
                let mut c = p.coeffs().to_vec();
                if let Some(first) = c.first_mut() {
                    *first = c64(0.0);
                }
                LogPoly::new(c)
            };
            if let Some(p) = self.zero.poly_at(c64(-1.0)) {
                acc += moment_of_poly(c64(-1.0) + w, &strip(p), moment_unit_interval)?;
            }
            if let Some(p) = self.inf.poly_at(c64(-1.0)) {
                acc += moment_of_poly(c64(-1.0) + w, &strip(p), moment_tail)?;
            }
            Ok(acc)
        };
        let mut avg = [c64(0.0); 2];
        let mut error = 0.0;
        for (i, &eps) in FINITE_PART_EPS.iter().enumerate() {
            let mut s = c64(0.0);
            for z in [c64(1.0 + eps), c64(1.0 - eps)] {
                let m = self.mellin_with(quad, z)?;
                s += m.value - higher(z)?;
                error += m.error;
            }
            avg[i] = s * 0.5;
        }
        let value = (avg[1] * 100.0 - avg[0]) / 99.0;
        error += (avg[1] - value).norm() * 0.01;
        Ok(Estimate { value, error })
    }

    /// Fits the slope of `ln|Mf(z₀ ± δ)|` against `ln δ` for
    /// `δ ∈ {1e-2, 1e-3, 1e-4}`; the pole order is the rounded negative slope.
    pub fn fit_pole_order(&self, pole: C64) -> Result<PoleFit> {
        let poles = self.mellin_poles();
        let info = poles
            .iter()
            .filter(|p| same_exponent(p.location, pole, EXPONENT_TOL))
            .max_by_key(|p| p.order)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("{pole} is not a declared pole")))?;
        let (lo, hi) = self.mellin_strip();
        let clear = |sign: f64| {
            let far = pole.re + sign * 2.0 * POLE_DELTAS[0];
            far > lo
                && far < hi
                && poles.iter().all(|p| {
                    same_exponent(p.location, pole, EXPONENT_TOL) || (p.location - (pole + sign * 0.02)).norm() > 0.02
                })
        };
        let sign = if clear(1.0) {
            1.0
        } else if clear(-1.0) {
            -1.0
        } else {
            return Err(Error::InvalidInput(format!("no room around the pole at {pole} inside the strip")));
        };
        let mut pts = Vec::new();
        for d in POLE_DELTAS {
            let m = self.mellin(pole + sign * d)?;
            pts.push((d.ln(), m.value.norm().ln()));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        Ok(PoleFit {
            location: info.location,
            declared_order: info.order,
            fitted_order: (-slope).round().max(0.0) as usize,
            slope,
        })
    }
}
