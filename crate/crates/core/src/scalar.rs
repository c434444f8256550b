//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the library is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
}

/// Converts an `f64` literal into the working precision.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in target float")
}

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `i · z`
#[inline]
pub(crate) fn times_i<T: Real>(z: Complex<T>) -> Complex<T> {
    Complex::new(-z.im, z.re)
}

/// Table of `ln k!` for `k = 0..=n`, accumulated as sums of logarithms.
pub(crate) fn ln_factorials<T: Real>(n: usize) -> Vec<T> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    table.push(acc);
    for k in 1..=n {
        acc = acc + lit::<T>(k as f64).ln();
        table.push(acc);
    }
    table
}

/// Integer power of a complex number with the convention `0^0 = 1`.
pub(crate) fn cpow<T: Real>(z: Complex<T>, k: usize) -> Complex<T> {
    if k == 0 {
        return real(T::one());
    }
    let mut acc = real(T::one());
    let mut base = z;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}
