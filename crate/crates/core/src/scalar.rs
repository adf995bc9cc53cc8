//! Scalar abstraction shared by the generic numerical kernels.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst};

/// Real floating-point scalar usable by the generic kernels (`f32`, `f64`).
pub trait Real: Float + FloatConst + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn of_usize(n: usize) -> Self {
        <Self as num_traits::NumCast>::from(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where T: Float + FloatConst + Debug + Display + Default + Send + Sync + 'static {}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

/// Exponent equality tolerance used when matching powers (absolute, per component).
pub const EXPONENT_TOL: f64 = 1e-9;

/// True when two exponents coincide within `tol` on both components.
#[inline]
pub fn same_exponent<T: Real>(a: Cplx<T>, b: Cplx<T>, tol: T) -> bool {
    (a.re - b.re).abs() <= tol && (a.im - b.im).abs() <= tol
}

/// Nearest integer to `z` if `z` is an integer within `tol`.
pub fn as_integer<T: Real>(z: Cplx<T>, tol: T) -> Option<i64> {
    let r = z.re.round();
    if (z.re - r).abs() <= tol && z.im.abs() <= tol {
        r.to_i64()
    } else {
        None
    }
}

/// `x^a` for real `x > 0` and complex `a`.
#[inline]
pub fn real_pow<T: Real>(x: T, a: Cplx<T>) -> Cplx<T> {
    if a.im == T::zero() {
        Cplx::new(x.powf(a.re), T::zero())
    } else {
        let lx = x.ln();
        Cplx::from_polar(T::one(), a.im * lx) * x.powf(a.re)
    }
}

/// Precomputed factorials; depth is capped at [`MAX_FACTORIAL`].
pub const MAX_FACTORIAL: usize = 20;

const FACTORIALS: [f64; MAX_FACTORIAL + 1] = {
    let mut t = [1.0f64; MAX_FACTORIAL + 1];
    let mut i = 1;
    while i <= MAX_FACTORIAL {
        t[i] = t[i - 1] * i as f64;
        i += 1;
    }
    t
};

/// `k!` for `k <= 20`, `None` beyond.
#[inline]
pub fn factorial(k: usize) -> Option<f64> {
    FACTORIALS.get(k).copied()
}

/// Binomial coefficient `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}
