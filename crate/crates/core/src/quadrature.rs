//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature, the endpoint
//! substitutions used for singular integrands, and a dyadic divergence probe.

use crate::scalar::{Cplx, Real};
use crate::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980005469,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Outcome of one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Real> QuadResult<T> {
    fn zero() -> Self {
        QuadResult { value: T::zero(), error: T::zero(), evaluations: 0, converged: true }
    }

    /// Sum of two independent pieces.
    pub fn join(self, other: Self) -> Self {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    /// Fails on non-finite values, or when unconverged with an error estimate
    /// above `accept`.
    pub fn checked(self, accept: T) -> Result<T> {
        if !self.value.is_finite() || !self.error.is_finite() {
            return Err(Error::Quadrature { value: self.value.to_f64_lossy(), estimate: f64::INFINITY });
        }
        if !self.converged && self.error > accept {
            return Err(Error::Quadrature {
                value: self.value.to_f64_lossy(),
                estimate: self.error.to_f64_lossy(),
            });
        }
        Ok(self.value)
    }
}

/// Adaptive quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl Default for Quadrature<f64> {
    fn default() -> Self {
        Quadrature { abs_tol: 1e-10, rel_tol: 1e-12, max_intervals: 2000 }
    }
}

impl Default for Quadrature<f32> {
    fn default() -> Self {
        Quadrature { abs_tol: 1e-5, rel_tol: 1e-5, max_intervals: 500 }
    }
}

struct Piece<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut err = err.abs();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let floor = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) && floor > err {
        err = floor;
    }
    err
}

fn kronrod21<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut res_k = fc * T::lit(WGK[10]);
    let mut res_g = T::zero();
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        res_k = res_k + w * (f1 + f2);
        res_abs = res_abs + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[10]) * (fc - mean).abs();
    for j in 0..10 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half_len.abs();
    let err = rescale_error((res_k - res_g) * half_len, res_abs * scale, res_asc * scale);
    (res_k * half_len, err)
}

impl<T: Real> Quadrature<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Quadrature { abs_tol, rel_tol, max_intervals: 2000 }
    }

    /// Same settings with a different absolute tolerance.
    pub fn with_abs_tol(self, abs_tol: T) -> Self {
        Quadrature { abs_tol, ..self }
    }

    /// `∫_a^b f` on a finite interval.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F, a: T, b: T) -> QuadResult<T> {
        if a == b {
            return QuadResult::zero();
        }
        let (v, e) = kronrod21(&f, a, b);
        let mut pieces = vec![Piece { a, b, value: v, error: e }];
        let mut evals = 21;
        let target = |pieces: &[Piece<T>]| {
            let total: T = pieces.iter().fold(T::zero(), |s, p| s + p.value);
            self.abs_tol.max(self.rel_tol * total.abs())
        };
        loop {
            let err: T = pieces.iter().fold(T::zero(), |s, p| s + p.error);
            if err <= target(&pieces) {
                return self.finish(&pieces, evals, true);
            }
            if pieces.len() >= self.max_intervals {
                return self.finish(&pieces, evals, false);
            }
            let (worst, _) = pieces
                .iter()
                .enumerate()
                .fold((0, -T::one()), |(bi, be), (i, p)| if p.error > be { (i, p.error) } else { (bi, be) });
            let p = pieces.swap_remove(worst);
            let mid = T::lit(0.5) * (p.a + p.b);
            if !(mid > p.a.min(p.b) && mid < p.a.max(p.b)) {
                // interval can no longer be split
                pieces.push(p);
                return self.finish(&pieces, evals, false);
            }
            let (v1, e1) = kronrod21(&f, p.a, mid);
            let (v2, e2) = kronrod21(&f, mid, p.b);
            evals += 42;
            pieces.push(Piece { a: p.a, b: mid, value: v1, error: e1 });
            pieces.push(Piece { a: mid, b: p.b, value: v2, error: e2 });
        }
    }

    fn finish(&self, pieces: &[Piece<T>], evaluations: usize, converged: bool) -> QuadResult<T> {
        // ordered summation keeps results reproducible
        let mut sorted: Vec<&Piece<T>> = pieces.iter().collect();
        sorted.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(std::cmp::Ordering::Equal));
        let value = sorted.iter().fold(T::zero(), |s, p| s + p.value);
        let error = sorted.iter().fold(T::zero(), |s, p| s + p.error);
        QuadResult { value, error, evaluations, converged }
    }

    /// `∫` over consecutive breakpoints.
    pub fn integrate_points<F: Fn(T) -> T>(&self, f: F, points: &[T]) -> QuadResult<T> {
        points
            .windows(2)
            .map(|w| self.integrate(&f, w[0], w[1]))
            .fold(QuadResult::zero(), QuadResult::join)
    }

    /// `∫_a^∞ f` through `x = a + s/(1-s)`.
    pub fn integrate_to_infinity<F: Fn(T) -> T>(&self, f: F, a: T) -> QuadResult<T> {
        let g = |s: T| {
            let one_minus = T::one() - s;
            let x = a + s / one_minus;
            if !x.is_finite() {
                return T::zero();
            }
            let v = f(x);
            if v == T::zero() {
                return T::zero();
            }
            v / (one_minus * one_minus)
        };
        self.integrate(g, T::zero(), T::one())
    }

    /// `∫₀^c f` through `x = c·e^{-u}`, resolving endpoint singularities at 0.
    pub fn integrate_from_zero<F: Fn(T) -> T>(&self, f: F, c: T) -> QuadResult<T> {
        let g = |u: T| {
            let x = c * (-u).exp();
            if x == T::zero() {
                return T::zero();
            }
            let v = f(x);
            if v == T::zero() {
                return T::zero();
            }
            v * x
        };
        self.integrate_to_infinity(g, T::zero())
    }

    /// `∫_c^∞ f` through `x = c·e^{u}`.
    pub fn integrate_log_to_infinity<F: Fn(T) -> T>(&self, f: F, c: T) -> QuadResult<T> {
        let g = |u: T| {
            let x = c * u.exp();
            if !x.is_finite() {
                return T::zero();
            }
            let v = f(x);
            if v == T::zero() {
                return T::zero();
            }
            v * x
        };
        self.integrate_to_infinity(g, T::zero())
    }

    /// `∫_a^b f` for `0 < a < b < ∞` through `x = e^s`.
    pub fn integrate_log<F: Fn(T) -> T>(&self, f: F, a: T, b: T) -> QuadResult<T> {
        let g = |s: T| {
            let x = s.exp();
            f(x) * x
        };
        self.integrate(g, a.ln(), b.ln())
    }

    /// Real and imaginary parts integrated separately by `integrate`-like `rule`.
    pub fn complex<F, R>(&self, f: F, rule: R) -> (Cplx<T>, QuadResult<T>)
    where
        F: Fn(T) -> Cplx<T>,
        R: Fn(&dyn Fn(T) -> T) -> QuadResult<T>,
    {
        let re = rule(&|x| f(x).re);
        let im = rule(&|x| f(x).im);
        (Cplx::new(re.value, im.value), re.join(im))
    }
}

/// Growth model of `I(ε) = ∫_ε^c |g|` as `ε → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub enum GrowthModel {
    /// Converges.
    Bounded,
    /// Grows like `ln(1/ε)`.
    Logarithmic,
    /// Grows like a negative power of `ε`.
    Power,
}

/// Result of the dyadic divergence probe.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthFit {
    pub model: GrowthModel,
    /// Decay rate `γ` of the dyadic increments, `d_k ∝ 2^{-γk}`.
    pub decay_rate: f64,
    /// Partial integral down to the finest level.
    pub partial: f64,
    /// Extrapolated integral when bounded, else the finest partial integral.
    pub estimate: f64,
    pub levels: usize,
}

impl GrowthFit {
    pub fn divergent(&self) -> bool {
        self.model != GrowthModel::Bounded
    }
}

/// Decay-rate threshold separating convergent from divergent increments.
pub const DIVERGENCE_RATE: f64 = 0.1;

/// Integrates `g` over `[c·2^{-k}, c·2^{-k+1}]` for `k = 1..=levels` and fits
/// the tail of the increments: increments decaying faster than `2^{-0.1 k}`
/// are declared convergent, flat ones logarithmic, growing ones power-like.
pub fn dyadic_growth<F: Fn(f64) -> f64>(quad: &Quadrature<f64>, g: F, c: f64, levels: usize) -> GrowthFit {
    let levels = levels.max(12);
    let mut increments = Vec::with_capacity(levels);
    let mut partial = 0.0;
    for k in 1..=levels {
        let hi = c * 0.5f64.powi(k as i32 - 1);
        let lo = hi * 0.5;
        let d = quad.integrate(|x| g(x).abs(), lo, hi).value;
        partial += d;
        increments.push(d);
    }
    let tail = &increments[levels - 10..];
    let floor = tail.iter().cloned().fold(0.0f64, f64::max) * 1e-300;
    if tail.iter().all(|&d| d == 0.0) || !tail.iter().all(|d| d.is_finite()) {
        let model = if tail.iter().all(|&d| d == 0.0) { GrowthModel::Bounded } else { GrowthModel::Power };
        let estimate = if model == GrowthModel::Bounded { partial } else { f64::INFINITY };
        return GrowthFit { model, decay_rate: f64::INFINITY, partial, estimate, levels };
    }
    // least-squares slope of ln d_k against k ln 2
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .map(|(i, &d)| ((levels - 10 + i + 1) as f64 * std::f64::consts::LN_2, (d.max(floor).max(1e-300)).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let rate = -sxy / sxx;
    let model = if rate > DIVERGENCE_RATE {
        GrowthModel::Bounded
    } else if rate >= -DIVERGENCE_RATE {
        GrowthModel::Logarithmic
    } else {
        GrowthModel::Power
    };
    let estimate = if model == GrowthModel::Bounded {
        let r = 0.5f64.powf(rate);
        partial + increments[levels - 1] * r / (1.0 - r)
    } else {
        partial
    };
    GrowthFit { model, decay_rate: rate, partial, estimate, levels }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Quadrature<f64> {
        Quadrature::new(1e-13, 1e-13)
    }

    #[test]
    fn polynomials_are_exact() {
        let r = q().integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0);
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn endpoint_singularity_via_substitution() {
        // ∫₀¹ x^{-1/2} = 2 ; ∫₀¹ ln x = -1
        let r = q().integrate_from_zero(|x| x.powf(-0.5), 1.0);
        assert!((r.value - 2.0).abs() < 1e-11, "{r:?}");
        let r = q().integrate_from_zero(|x| x.ln(), 1.0);
        assert!((r.value + 1.0).abs() < 1e-11, "{r:?}");
    }

    #[test]
    fn semi_infinite() {
        let r = q().integrate_to_infinity(|x| (-x).exp(), 0.0);
        assert!((r.value - 1.0).abs() < 1e-12);
        // ∫₁^∞ x^{-2} ln x = 1
        let r = q().integrate_log_to_infinity(|x| x.ln() / (x * x), 1.0);
        assert!((r.value - 1.0).abs() < 1e-11, "{r:?}");
    }

    #[test]
    fn breakpoints_handle_jumps() {
        let r = q().integrate_points(|x| if x < 0.3 { 1.0 } else { 2.0 }, &[0.0, 0.3, 1.0]);
        assert!((r.value - 1.7).abs() < 1e-14);
    }

    #[test]
    fn single_precision_rule() {
        let quad = Quadrature::<f32>::default();
        let r = quad.integrate(|x: f32| x.sin(), 0.0, std::f32::consts::PI);
        assert!((r.value - 2.0).abs() < 1e-5);
    }

    #[test]
    fn unconverged_result_is_reported() {
        let quad = Quadrature { abs_tol: 1e-15, rel_tol: 0.0, max_intervals: 3 };
        let r = quad.integrate(|x: f64| x.sqrt().sin() / x.sqrt(), 1e-9, 50.0);
        assert!(!r.converged);
        assert!(matches!(r.checked(0.0), Err(Error::Quadrature { .. })));
    }

    #[test]
    fn divergence_probe_models() {
        let quad = Quadrature::new(1e-14, 1e-12);
        let ok = dyadic_growth(&quad, |_| 1.0, 1.0, 30);
        assert_eq!(ok.model, GrowthModel::Bounded);
        assert!((ok.estimate - 1.0).abs() < 1e-9);
        let harmonic = dyadic_growth(&quad, |x| 1.0 / x, 1.0, 30);
        assert_eq!(harmonic.model, GrowthModel::Logarithmic);
        assert!(harmonic.decay_rate.abs() < 1e-6);
        let power = dyadic_growth(&quad, |x| x.powi(-2), 1.0, 30);
        assert_eq!(power.model, GrowthModel::Power);
        assert!((power.decay_rate + 1.0).abs() < 1e-6);
        let sqrt = dyadic_growth(&quad, |x| x.powf(-0.5), 1.0, 30);
        assert_eq!(sqrt.model, GrowthModel::Bounded);
        assert!((sqrt.estimate - 2.0).abs() < 1e-6);
    }
}
