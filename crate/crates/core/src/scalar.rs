//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the library is generic over.
///
/// Everything is written against this trait; `f64` is the type the
/// tolerances in the test-suite are calibrated for, `f32` works with
/// correspondingly looser accuracy.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `ln(exp(x) + exp(y))` without overflow.
pub fn ln_add_exp<T: Scalar>(x: T, y: T) -> T {
    if x == T::neg_infinity() {
        return y;
    }
    if y == T::neg_infinity() {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == T::infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ exp(x_i)`; returns `-inf` for an empty iterator.
pub fn ln_sum_exp<T: Scalar, I: IntoIterator<Item = T>>(xs: I) -> T {
    let xs: Vec<T> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() || m == T::infinity() {
        return m;
    }
    let s: T = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Natural logarithm of the Gamma function for positive arguments.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    T::lit(statrs::function::gamma::ln_gamma(x.as_f64()))
}

/// Relative difference `|x - y| / max(|x|, |y|)`, zero when both vanish.
pub fn rel_diff<T: Scalar>(x: T, y: T) -> T {
    let scale = x.abs().max(y.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (x - y).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_sum_exp_handles_large_arguments() {
        let v = ln_sum_exp([1000.0_f64, 1000.0]);
        assert!((v - (1000.0 + 2.0_f64.ln())).abs() < 1e-12);
        assert_eq!(ln_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
        assert_eq!(ln_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        assert!((ln_gamma(5.0_f64) - 24.0_f64.ln()).abs() < 1e-12);
        assert!(ln_gamma(1.0_f64).abs() < 1e-14);
        assert!((ln_gamma(0.5_f32) - 0.5 * std::f32::consts::PI.ln()).abs() < 1e-6);
    }
}
