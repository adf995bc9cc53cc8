//! Polynomials in a logarithm variable with complex coefficients, and the
//! closed-form singular moments of `x^a ln^k x`.

use std::ops::{Add, Neg, Sub};

use crate::scalar::{factorial, same_exponent, Cplx, Real, EXPONENT_TOL, MAX_FACTORIAL};
use crate::{Error, Result};

/// `Σ c_i L^i`; the coefficient list never ends in an exact zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogPoly<T: Real> {
    coeffs: Vec<Cplx<T>>,
}

impl<T: Real> LogPoly<T> {
    pub fn zero() -> Self {
        LogPoly { coeffs: Vec::new() }
    }

    pub fn new(mut coeffs: Vec<Cplx<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.re == T::zero() && c.im == T::zero()) {
            coeffs.pop();
        }
        LogPoly { coeffs }
    }

    pub fn from_real(coeffs: &[T]) -> Self {
        LogPoly::new(coeffs.iter().map(|&c| Cplx::new(c, T::zero())).collect())
    }

    pub fn constant(c: Cplx<T>) -> Self {
        LogPoly::new(vec![c])
    }

    /// `c · L^k`.
    pub fn monomial(c: Cplx<T>, k: usize) -> Self {
        let mut v = vec![Cplx::new(T::zero(), T::zero()); k + 1];
        v[k] = c;
        LogPoly::new(v)
    }

    pub fn coeffs(&self) -> &[Cplx<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Cplx<T> {
        self.coeffs.get(i).copied().unwrap_or_else(|| Cplx::new(T::zero(), T::zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, l: Cplx<T>) -> Cplx<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Cplx::new(T::zero(), T::zero()), |acc, &c| acc * l + c)
    }

    pub fn eval_real(&self, l: T) -> Cplx<T> {
        self.eval(Cplx::new(l, T::zero()))
    }

    /// `P(ξ) = ∫₀^ξ p(s) ds`.
    pub fn antiderivative(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = Vec::with_capacity(self.coeffs.len() + 1);
        v.push(Cplx::new(T::zero(), T::zero()));
        for (i, &c) in self.coeffs.iter().enumerate() {
            v.push(c / T::of_usize(i + 1));
        }
        LogPoly::new(v)
    }

    pub fn derivative(&self) -> Self {
        LogPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * T::of_usize(i))
                .collect(),
        )
    }

    pub fn scale(&self, s: Cplx<T>) -> Self {
        LogPoly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(Cplx::new(s, T::zero()))
    }

    /// `q(L) = p(L + c)`, expanded exactly by Taylor's formula.
    pub fn shift(&self, c: Cplx<T>) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut d = self.clone();
        let mut fact = T::one();
        for m in 0..self.coeffs.len() {
            if m > 0 {
                fact = fact * T::of_usize(m);
            }
            out.push(d.eval(c) / fact);
            d = d.derivative();
        }
        LogPoly::new(out)
    }

    /// `q(L) = p(-L)`.
    pub fn reflect(&self) -> Self {
        LogPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| if i % 2 == 1 { -c } else { c })
                .collect(),
        )
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// Coefficientwise comparison within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|i| (self.coeff(i) - other.coeff(i)).norm() <= tol)
    }
}

impl<T: Real> Add for &LogPoly<T> {
    type Output = LogPoly<T>;

    fn add(self, rhs: Self) -> LogPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        LogPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Real> Sub for &LogPoly<T> {
    type Output = LogPoly<T>;

    fn sub(self, rhs: Self) -> LogPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        LogPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Real> Neg for &LogPoly<T> {
    type Output = LogPoly<T>;

    fn neg(self) -> LogPoly<T> {
        LogPoly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

fn check_pole<T: Real>(alpha: Cplx<T>, k: usize) -> Result<()> {
    if k > MAX_FACTORIAL {
        return Err(Error::LogPowerTooLarge(k));
    }
    if same_exponent(alpha, Cplx::new(-T::one(), T::zero()), T::lit(EXPONENT_TOL)) {
        return Err(Error::Pole { re: -1.0, im: 0.0, order: k + 1 });
    }
    Ok(())
}

/// Continuation of `∫₀¹ x^a ln^k x dx = (-1)^k k! / (a+1)^(k+1)`.
pub fn moment_unit_interval<T: Real>(alpha: Cplx<T>, k: usize) -> Result<Cplx<T>> {
    check_pole(alpha, k)?;
    let fact = T::lit(factorial(k).expect("checked"));
    let sign = if k % 2 == 0 { T::one() } else { -T::one() };
    let base = alpha + T::one();
    Ok(Cplx::new(sign * fact, T::zero()) / base.powi(k as i32 + 1))
}

/// Continuation of `∫₁^∞ x^a ln^k x dx = k! / (-(a+1))^(k+1)`.
pub fn moment_tail<T: Real>(alpha: Cplx<T>, k: usize) -> Result<Cplx<T>> {
    check_pole(alpha, k)?;
    let fact = T::lit(factorial(k).expect("checked"));
    let base = -(alpha + T::one());
    Ok(Cplx::new(fact, T::zero()) / base.powi(k as i32 + 1))
}

/// `Σ_i c_i · m(α, i)` for a log-polynomial coefficient list.
pub fn moment_of_poly<T: Real>(
    alpha: Cplx<T>,
    p: &LogPoly<T>,
    moment: fn(Cplx<T>, usize) -> Result<Cplx<T>>,
) -> Result<Cplx<T>> {
    let mut acc = Cplx::new(T::zero(), T::zero());
    for (i, &c) in p.coeffs().iter().enumerate() {
        acc = acc + c * moment(alpha, i)?;
    }
    Ok(acc)
}

/// Antiderivative of `x^a p(ln x)`, returned as `x^e q(ln x)`.
///
/// For `a = -1` this is `(0, ∫p)`; otherwise `e = a+1` and
/// `q = Σ_i (-1)^i p^(i) / e^(i+1)`, which solves `e·q + q' = p`.
pub fn power_antiderivative<T: Real>(alpha: Cplx<T>, p: &LogPoly<T>) -> (Cplx<T>, LogPoly<T>) {
    let minus_one = Cplx::new(-T::one(), T::zero());
    if same_exponent(alpha, minus_one, T::lit(EXPONENT_TOL)) {
        return (Cplx::new(T::zero(), T::zero()), p.antiderivative());
    }
    let e = alpha + T::one();
    let mut acc = LogPoly::zero();
    let mut d = p.clone();
    let mut denom = e;
    let mut sign = T::one();
    while !d.is_zero() {
        acc = &acc + &d.scale(Cplx::new(sign, T::zero()) / denom);
        d = d.derivative();
        denom = denom * e;
        sign = -sign;
    }
    (e, acc)
}

impl serde::Serialize for LogPoly<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&(c.re, c.im))?;
        }
        seq.end()
    }
}

impl<'de> serde::Deserialize<'de> for LogPoly<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<(f64, f64)>::deserialize(d)?;
        Ok(LogPoly::new(pairs.into_iter().map(|(re, im)| Cplx::new(re, im)).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Cplx<f64>;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn horner_examples() {
        assert_eq!(LogPoly::from_real(&[2.0, 1.0]).eval(c(0.0)), c(2.0));
        assert_eq!(LogPoly::from_real(&[0.0, 0.0, 1.0]).eval(c(3.0)), c(9.0));
        assert_eq!(LogPoly::<f64>::zero().eval(c(7.0)), c(0.0));
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(LogPoly::from_real(&[1.0]).antiderivative(), LogPoly::from_real(&[0.0, 1.0]));
        assert_eq!(LogPoly::from_real(&[0.0, 1.0]).antiderivative(), LogPoly::from_real(&[0.0, 0.0, 0.5]));
        assert!(LogPoly::<f64>::zero().antiderivative().is_zero());
        let p = LogPoly::from_real(&[1.0, -2.0, 3.0]);
        assert_eq!(p.antiderivative().degree(), Some(3));
        assert_eq!(p.antiderivative().coeff(0), c(0.0));
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = LogPoly::from_real(&[1.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(0));
        assert!(LogPoly::from_real(&[0.0]).is_zero());
    }

    #[test]
    fn shift_and_reflect() {
        // (L + 2)^2 = L^2 + 4L + 4
        let p = LogPoly::from_real(&[0.0, 0.0, 1.0]);
        assert!(p.shift(c(2.0)).approx_eq(&LogPoly::from_real(&[4.0, 4.0, 1.0]), 1e-15));
        assert_eq!(LogPoly::from_real(&[1.0, 2.0, 3.0]).reflect(), LogPoly::from_real(&[1.0, -2.0, 3.0]));
    }

    #[test]
    fn moment_examples() {
        assert_eq!(moment_unit_interval(c(0.0), 0).unwrap(), c(1.0));
        assert_eq!(moment_unit_interval(c(0.0), 1).unwrap(), c(-1.0));
        assert_eq!(moment_unit_interval(c(-0.5), 0).unwrap(), c(2.0));
        assert_eq!(moment_tail(c(-2.0), 0).unwrap(), c(1.0));
        assert_eq!(moment_tail(c(-2.0), 1).unwrap(), c(1.0));
        assert_eq!(moment_tail(c(-3.0), 0).unwrap(), c(0.5));
    }

    #[test]
    fn moment_errors() {
        assert!(matches!(moment_unit_interval(c(-1.0), 2), Err(Error::Pole { order: 3, .. })));
        assert!(matches!(moment_tail(c(-1.0 + 1e-12), 0), Err(Error::Pole { .. })));
        assert!(matches!(moment_tail(c(0.5), 21), Err(Error::LogPowerTooLarge(21))));
    }

    #[test]
    fn power_antiderivative_matches_moments() {
        // ∫₀¹ x^a L^k = R(0) for Re a > -1.
        for &a in &[-0.5, 0.3, 2.0] {
            for k in 0..4 {
                let (_, r) = power_antiderivative(c(a), &LogPoly::monomial(c(1.0), k));
                let m = moment_unit_interval(c(a), k).unwrap();
                assert!((r.eval(c(0.0)) - m).norm() < 1e-13);
            }
        }
        let (e, q) = power_antiderivative(c(-1.0), &LogPoly::from_real(&[0.0, 1.0]));
        assert_eq!(e, c(0.0));
        assert_eq!(q, LogPoly::from_real(&[0.0, 0.0, 0.5]));
    }

    #[test]
    fn works_in_single_precision() {
        let m = moment_unit_interval(Cplx::new(0.0f32, 0.0), 2).unwrap();
        assert!((m.re - 2.0).abs() < 1e-6);
        let p = LogPoly::<f32>::from_real(&[1.0, 1.0]);
        assert!((p.eval_real(2.0).re - 3.0).abs() < 1e-6);
    }
}
