use serde::Serialize;

use super::{c64, AsymFunction, ExpansionSide, Lp, Side, Term, C64, PRIMITIVE_EPS};
use crate::logpoly::{moment_of_poly, moment_tail, moment_unit_interval, power_antiderivative};
use crate::quadrature::{QuadResult, Quadrature};
use crate::scalar::{real_pow, same_exponent, EXPONENT_TOL};
use crate::{Error, Result};

/// A computed value with its accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    #[serde(serialize_with = "ser_c64")]
    pub value: C64,
    pub error: f64,
}

pub(crate) fn ser_c64<S: serde::Serializer>(c: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    (c.re, c.im).serialize(s)
}

/// Relative rounding level of `f − Σ terms` against the size of its parts.
const NOISE_REL: f64 = 64.0 * f64::EPSILON;
const NOISE_LEVELS: i32 = 60;

fn empty_result() -> QuadResult<f64> {
    QuadResult { value: 0.0, error: 0.0, evaluations: 0, converged: true }
}

/// Accepts an unconverged result whose error estimate is still small.
pub(crate) fn settle(quad: &Quadrature<f64>, value: C64, r: QuadResult<f64>, extra: f64) -> Result<Estimate> {
    let accept = 1e4 * quad.abs_tol.max(quad.rel_tol * value.norm());
    if !value.re.is_finite() || !value.im.is_finite() || !r.error.is_finite() {
        return Err(Error::Quadrature { value: value.re, estimate: f64::INFINITY });
    }
    if !r.converged && r.error > accept {
        return Err(Error::Quadrature { value: value.re, estimate: r.error });
    }
    Ok(Estimate { value, error: r.error + extra })
}

fn is_minus_one(e: C64) -> bool {
    same_exponent(e, c64(-1.0), EXPONENT_TOL)
}

impl AsymFunction {
    fn noise(&self, x: f64, side: Side) -> f64 {
        let s = if side == Side::Zero { &self.zero } else { &self.inf };
        self.noise_abs + NOISE_REL * (self.eval(x).norm() + s.magnitude(x))
    }

    fn is_noisy(&self, x: f64, side: Side) -> bool {
        let r = match side {
            Side::Zero => self.remainder_zero(x),
            Side::Infinity => self.remainder_inf(x),
        }
        .norm();
        !r.is_finite() || r <= 4.0 * self.noise(x, side)
    }

    /// Below this point `f − Σ terms` is rounding noise; 0 when it never is.
    ///
    /// Found by scanning `x = 2^{-k}` for two consecutive noisy samples.
    pub(crate) fn zero_cutoff(&self) -> f64 {
        if self.zero.is_empty() {
            return 0.0;
        }
        let mut prev = false;
        for k in 1..=NOISE_LEVELS {
            let x = 0.5f64.powi(k);
            let noisy = self.is_noisy(x, Side::Zero);
            if noisy && prev {
                return 2.0 * x;
            }
            prev = noisy;
        }
        0.0
    }

    /// Mirror of [`AsymFunction::zero_cutoff`] towards infinity.
    pub(crate) fn inf_cutoff(&self) -> f64 {
        if self.inf.is_empty() {
            return f64::INFINITY;
        }
        let mut prev = false;
        for k in 1..=NOISE_LEVELS {
            let x = 2.0f64.powi(k);
            let noisy = self.is_noisy(x, Side::Infinity);
            if noisy && prev {
                return 0.5 * x;
            }
            prev = noisy;
        }
        f64::INFINITY
    }

    fn integrate_c<G, R>(&self, g: G, real: bool, rule: R) -> (C64, QuadResult<f64>)
    where
        G: Fn(f64) -> C64,
        R: Fn(&dyn Fn(f64) -> f64) -> QuadResult<f64>,
    {
        if real {
            let r = rule(&|x| g(x).re);
            (c64(r.value), r)
        } else {
            let re = rule(&|x| g(x).re);
            let im = rule(&|x| g(x).im);
            (C64::new(re.value, im.value), re.join(im))
        }
    }

    /// `∫₀¹ (f − Σ zero-terms)(x) · x^w dx`.
    pub(crate) fn zero_remainder_integral(&self, quad: &Quadrature<f64>, w: C64) -> Result<Estimate> {
        let cut = self.zero_cutoff();
        let real = self.is_real() && w.im == 0.0;
        let g = |x: f64| {
            let r = self.remainder_zero(x);
            if w == c64(0.0) {
                r
            } else {
                r * real_pow(x, w)
            }
        };
        let mut pts = vec![cut];
        pts.extend(self.splits(cut, 1.0));
        pts.push(1.0);
        let mut value = c64(0.0);
        let mut res = empty_result();
        for win in pts.windows(2) {
            let (a, b) = (win[0], win[1]);
            let (v, r) = if a == 0.0 {
                self.integrate_c(g, real, |h| quad.integrate_from_zero(h, b))
            } else {
                self.integrate_c(g, real, |h| quad.integrate_log(h, a, b))
            };
            value += v;
            res = res.join(r);
        }
        let discarded = if cut > 0.0 { cut * g(cut).norm() } else { 0.0 };
        settle(quad, value, res, discarded)
    }

    /// `∫₁^∞ (f − Σ infinity-terms)(x) · x^w dx`.
    pub(crate) fn inf_remainder_integral(&self, quad: &Quadrature<f64>, w: C64) -> Result<Estimate> {
        let cut = self.inf_cutoff();
        let real = self.is_real() && w.im == 0.0;
        let g = |x: f64| {
            let r = self.remainder_inf(x);
            if w == c64(0.0) {
                r
            } else {
                r * real_pow(x, w)
            }
        };
        let mut pts = vec![1.0];
        pts.extend(self.splits(1.0, cut));
        pts.push(cut);
        let mut value = c64(0.0);
        let mut res = empty_result();
        for win in pts.windows(2) {
            let (a, b) = (win[0], win[1]);
            let (v, r) = if b.is_infinite() {
                self.integrate_c(g, real, |h| quad.integrate_log_to_infinity(h, a))
            } else {
                self.integrate_c(g, real, |h| quad.integrate_log(h, a, b))
            };
            value += v;
            res = res.join(r);
        }
        let discarded = if cut.is_finite() { cut * g(cut).norm() } else { 0.0 };
        settle(quad, value, res, discarded)
    }

    /// `∫_a^b f` for `0 < a, b < ∞` (signed).
    pub fn integral(&self, quad: &Quadrature<f64>, a: f64, b: f64) -> Result<Estimate> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidInput(format!("integration bounds {a}, {b} must be positive and finite")));
        }
        let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut pts = vec![lo];
        pts.extend(self.splits(lo, hi));
        pts.push(hi);
        let mut value = c64(0.0);
        let mut res = empty_result();
        for win in pts.windows(2) {
            let (v, r) = self.integrate_c(|x| self.eval(x), self.real, |h| quad.integrate_log(h, win[0], win[1]));
            value += v;
            res = res.join(r);
        }
        settle(quad, value * sign, res, 0.0)
    }

    /// `LIM_{x→0} F` for `F(x) = ∫₁ˣ f`: `−∫₀¹(f − Σ terms) − Σ` unit-interval moments.
    fn primitive_constant_zero(&self, quad: &Quadrature<f64>) -> Result<Estimate> {
        let rem = self.zero_remainder_integral(quad, c64(0.0))?;
        let mut moments = c64(0.0);
        for t in self.zero.terms() {
            if !is_minus_one(t.exponent) {
                moments += moment_of_poly(t.exponent, &t.poly, moment_unit_interval)?;
            }
        }
        Ok(Estimate { value: -rem.value - moments, error: rem.error })
    }

    /// `LIM_{x→∞} F`: `∫₁^∞(f − Σ terms) + Σ` tail moments.
    fn primitive_constant_inf(&self, quad: &Quadrature<f64>) -> Result<Estimate> {
        let rem = self.inf_remainder_integral(quad, c64(0.0))?;
        let mut moments = c64(0.0);
        for t in self.inf.terms() {
            if !is_minus_one(t.exponent) {
                moments += moment_of_poly(t.exponent, &t.poly, moment_tail)?;
            }
        }
        Ok(Estimate { value: rem.value + moments, error: rem.error })
    }

    /// `F(x) = ∫₁ˣ f` with expansions from termwise antidifferentiation;
    /// the constants of integration are fixed by quadrature.
    pub fn primitive(&self) -> Result<AsymFunction> {
        self.primitive_with(&Quadrature::default())
    }

    pub fn primitive_with(&self, quad: &Quadrature<f64>) -> Result<AsymFunction> {
        let c0 = self.primitive_constant_zero(quad)?;
        let cinf = self.primitive_constant_inf(quad)?;
        let lift = |s: &ExpansionSide, c: C64| -> Vec<Term> {
            let mut terms: Vec<Term> = s
                .terms()
                .iter()
                .map(|t| {
                    let (e, r) = power_antiderivative(t.exponent, &t.poly);
                    Term::new(e, r)
                })
                .collect();
            terms.push(Term::new(c64(0.0), Lp::constant(c)));
            terms
        };
        let zero = ExpansionSide::fitted(Side::Zero, lift(&self.zero, c0.value), self.zero.order() + 1.0 - PRIMITIVE_EPS)?;
        let inf =
            ExpansionSide::fitted(Side::Infinity, lift(&self.inf, cinf.value), self.inf.order() + 1.0 - PRIMITIVE_EPS)?;
        let f = self.clone();
        let fine = Quadrature::new(1e-13, 1e-13);
        let noise = 1e-11 + c0.error + cinf.error;
        let out = AsymFunction::native(
            move |x| {
                if x == 1.0 {
                    return c64(0.0);
                }
                f.integral(&fine, 1.0, x).map_or(C64::new(f64::NAN, 0.0), |e| e.value)
            },
            self.real,
            zero,
            inf,
        )?;
        Ok(out.with_breakpoints(&self.splits(0.0, f64::INFINITY)).with_noise_floor(noise))
    }

    /// `⨍₀^∞ f = LIM_{x→∞}F − LIM_{x→0}F`.
    pub fn reg_integral(&self) -> Result<C64> {
        Ok(self.reg_integral_with(&Quadrature::default())?.value)
    }

    pub fn reg_integral_with(&self, quad: &Quadrature<f64>) -> Result<Estimate> {
        let c0 = self.primitive_constant_zero(quad)?;
        let cinf = self.primitive_constant_inf(quad)?;
        Ok(Estimate { value: cinf.value - c0.value, error: c0.error + cinf.error })
    }

    /// Regularized integral read off from the sampled primitive: `F(x₀)` and
    /// `F(x₁)` by quadrature, minus the non-constant terms of `F`'s
    /// expansions at those points. Exact when the remainders vanish on
    /// `(0,x₀]` and `[x₁,∞)`, otherwise off by their integrals there.
    pub fn reg_integral_sampled(&self, quad: &Quadrature<f64>, x0: f64, x1: f64) -> Result<Estimate> {
        if !(0.0 < x0 && x0 <= 1.0 && 1.0 <= x1 && x1.is_finite()) {
            return Err(Error::InvalidInput(format!("sampling points need 0 < {x0} <= 1 <= {x1}")));
        }
        let moving = |s: &ExpansionSide, x: f64| -> C64 {
            s.terms()
                .iter()
                .map(|t| {
                    let (e, r) = power_antiderivative(t.exponent, &t.poly);
                    Term::new(e, r).eval(x)
                })
                .sum()
        };
        let f0 = if x0 < 1.0 { self.integral(quad, 1.0, x0)? } else { Estimate { value: c64(0.0), error: 0.0 } };
        let f1 = if x1 > 1.0 { self.integral(quad, 1.0, x1)? } else { Estimate { value: c64(0.0), error: 0.0 } };
        let lim0 = f0.value - moving(&self.zero, x0);
        let lim1 = f1.value - moving(&self.inf, x1);
        Ok(Estimate { value: lim1 - lim0, error: f0.error + f1.error })
    }

    /// `⨍ f(tx) dx = (⨍ f + Q_{-1}(ln t) − P_{-1}(ln t)) / t`.
    pub fn scale_reg_integral(&self, t: f64) -> Result<C64> {
        Ok(self.scale_reg_integral_with(&Quadrature::default(), t)?.value)
    }

    pub fn scale_reg_integral_with(&self, quad: &Quadrature<f64>, t: f64) -> Result<Estimate> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidInput(format!("scale factor must be positive, got {t}")));
        }
        let reg = self.reg_integral_with(quad)?;
        let lt = t.ln();
        let big_p = self.zero.poly_at(c64(-1.0)).map_or_else(Lp::zero, Lp::antiderivative);
        let big_q = self.inf.poly_at(c64(-1.0)).map_or_else(Lp::zero, Lp::antiderivative);
        let value = (reg.value + big_q.eval_real(lt) - big_p.eval_real(lt)) / t;
        Ok(Estimate { value, error: reg.error / t })
    }

    /// Samples `|f − Σ terms|` against `C·x^{p−δ}` on `x = 2^{-k}` and the
    /// mirrored bound `C·x^{−q+δ}` on `x = 2^k`; samples at rounding-noise
    /// level are skipped.
    pub fn check_consistency(&self, delta: f64, c: f64) -> ConsistencyReport {
        let mut report = ConsistencyReport::default();
        let p = self.zero.order();
        let q = self.inf.order();
        for k in 1..=40 {
            let x = 0.5f64.powi(k);
            if self.is_noisy(x, Side::Zero) {
                report.noise_limited += 1;
            } else {
                let ratio = self.remainder_zero(x).norm() / x.powf(p - delta);
                report.zero_worst = report.zero_worst.max(ratio);
                report.samples += 1;
            }
            let y = 2.0f64.powi(k);
            if self.is_noisy(y, Side::Infinity) {
                report.noise_limited += 1;
            } else {
                let ratio = self.remainder_inf(y).norm() / y.powf(-q + delta);
                report.inf_worst = report.inf_worst.max(ratio);
                report.samples += 1;
            }
        }
        report.zero_ok = report.zero_worst <= c;
        report.inf_ok = report.inf_worst <= c;
        report
    }
}

/// Outcome of [`AsymFunction::check_consistency`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConsistencyReport {
    pub zero_ok: bool,
    pub inf_ok: bool,
    pub zero_worst: f64,
    pub inf_worst: f64,
    pub samples: usize,
    pub noise_limited: usize,
}

impl ConsistencyReport {
    pub fn ok(&self) -> bool {
        self.zero_ok && self.inf_ok
    }
}
