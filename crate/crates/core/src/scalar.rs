//! Scalar abstraction shared by the numerical core.
//!
//! Everything in `problem`, `adjoint`, `perturbation`, `quadrature` and
//! `oracle` is written against [`Real`], so the same code runs in `f32` and
//! `f64`. The closed-form models are `f64` only.

use nalgebra::{ComplexField, DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::FromPrimitive;

/// Real scalar usable by the core: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive {}

impl<T> Real for T where T: RealField + Copy + FromPrimitive {}

/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex column vector.
pub type CVector<T> = DVector<Complex<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Unit roundoff of `T`: the smallest power of two `e` with `1 + e != 1`.
pub fn machine_epsilon<T: Real>() -> T {
    let two = real::<T>(2.0);
    let mut e = T::one();
    while T::one() + e / two > T::one() {
        e /= two;
    }
    e
}

/// A tolerance given for `f64`, rescaled by the precision of `T`. Exact
/// for `f64`; `x * eps_T / eps_f64` otherwise.
pub fn precision_tol<T: Real>(x: f64) -> T {
    real::<T>(x) * (machine_epsilon::<T>() / real::<T>(f64::EPSILON))
}

/// Like [`precision_tol`] but scaled by the square root of the precision
/// ratio, for quantities that lose half the digits.
pub fn precision_tol_sqrt<T: Real>(x: f64) -> T {
    real::<T>(x) * (machine_epsilon::<T>() / real::<T>(f64::EPSILON)).sqrt()
}

/// Real number as a complex scalar.
#[inline]
pub fn cplx<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn cre<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(real(re), real(im))
}

#[inline]
pub fn abs<T: Real>(x: T) -> T {
    ComplexField::abs(x)
}

#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    ComplexField::modulus(z)
}

#[inline]
pub fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    ComplexField::sqrt(z)
}

#[inline]
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    ComplexField::exp(z)
}

/// `exp(i theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(ComplexField::cos(theta), ComplexField::sin(theta))
}

/// Largest entry modulus of a complex matrix (0 for an empty matrix).
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| RealField::max(acc, modulus(*z)))
}

/// Euclidean norm of a complex vector.
pub fn vnorm<T: Real>(v: &CVector<T>) -> T {
    v.iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
        .sqrt()
}

/// Frobenius norm of a complex matrix.
pub fn fnorm<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
        .sqrt()
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k as u64).fold(1, |acc, i| acc * (n as u64 - i) / (i + 1))
}
