//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All algorithms are written against [`Real`], which is implemented for
//! `f32` and `f64`. Tolerances scale with the precision of the type: the
//! documented 1e-12 root tolerance applies to `f64`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;
use serde::Serialize;

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Serialize
    + Send
    + Sync
    + 'static
{
    /// Tolerance in x used by the periodic-point root finder.
    const ROOT_TOL: f64;
    /// Convergence tolerance of the power iterations.
    const EIGEN_TOL: f64;
    /// Threshold below which a spectral coefficient counts as resolved.
    const TAIL_TOL: f64;

    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer representable in scalar type")
    }
}

impl Real for f64 {
    const ROOT_TOL: f64 = 1e-12;
    const EIGEN_TOL: f64 = 1e-13;
    const TAIL_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const ROOT_TOL: f64 = 1e-5;
    const EIGEN_TOL: f64 = 1e-6;
    const TAIL_TOL: f64 = 1e-4;
}

/// Neumaier-compensated accumulator. Results depend only on the order of
/// the inputs, never on how work was scheduled.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.carry
    }

    /// `x − value` without first rounding the running total.
    #[inline]
    pub fn deviation(&self, x: T) -> T {
        (x - self.sum) - self.carry
    }
}

/// Compensated sum of a sequence, in iteration order.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(values: I) -> T {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Splits `x` into `(floor(x), x - floor(x))` with the fractional part in `[0, 1)`.
#[inline]
pub(crate) fn split_unit<T: Real>(x: T) -> (i64, T) {
    let fl = x.floor();
    let mut frac = x - fl;
    let mut int = fl.to_i64().expect("lift value fits in i64");
    // x slightly below an integer can round frac up to exactly 1
    if frac >= T::one() {
        frac = T::zero();
        int += 1;
    }
    (int, frac)
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    assert_eq!(xs.len(), ys.len(), "slope fit needs paired samples");
    assert!(xs.len() >= 2, "slope fit needs at least two samples");
    let n = T::from_count(xs.len());
    let mx = compensated_sum(xs.iter().copied()) / n;
    let my = compensated_sum(ys.iter().copied()) / n;
    let sxy = compensated_sum(xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)));
    let sxx = compensated_sum(xs.iter().map(|&x| (x - mx) * (x - mx)));
    sxy / sxx
}
