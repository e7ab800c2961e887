//! Standard normal distribution function.
//!
//! `erfc` uses the positive-term series `erf(x) = 2/√π · e^{−x²} Σ 2ⁿx^{2n+1}/(2n+1)!!`
//! below `x = 1` and the Laplace continued fraction above it. Both are
//! accurate to a few ulps in `f64`, well inside an absolute error of 1e-12.

use crate::scalar::Real;

const SERIES_LIMIT: f64 = 1.0;
const CONTINUED_FRACTION_TERMS: usize = 300;

/// Complementary error function.
pub fn erfc<T: Real>(x: T) -> T {
    if x < T::zero() {
        return T::lit(2.0) - erfc(-x);
    }
    if x < T::lit(SERIES_LIMIT) {
        return T::one() - erf_series(x);
    }
    // x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))
    let mut f = x;
    for k in (1..=CONTINUED_FRACTION_TERMS).rev() {
        f = x + T::from_count(k) * T::lit(0.5) / f;
    }
    (-x * x).exp() / (T::PI().sqrt() * f)
}

fn erf_series<T: Real>(x: T) -> T {
    let two_x2 = T::lit(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0usize;
    while term > T::epsilon() * sum * T::lit(0.01) {
        n += 1;
        term = term * two_x2 / T::from_count(2 * n + 1);
        sum = sum + term;
    }
    T::lit(2.0) * T::FRAC_2_SQRT_PI() * T::lit(0.5) * (-x * x).exp() * sum
}

/// `Φ(z) = P(Z ≤ z)` for a standard normal `Z`.
pub fn normal_cdf<T: Real>(z: T) -> T {
    if z.is_infinite() {
        return if z > T::zero() { T::one() } else { T::zero() };
    }
    let u = -z * T::FRAC_1_SQRT_2();
    if z <= T::zero() {
        T::lit(0.5) * erfc(u)
    } else {
        T::one() - T::lit(0.5) * erfc(-u)
    }
}

/// `Φ(b) − Φ(a)`, evaluated on the tail side where that is more accurate.
pub fn normal_interval<T: Real>(a: T, b: T) -> T {
    if a >= T::zero() {
        normal_cdf(-a) - normal_cdf(-b)
    } else {
        normal_cdf(b) - normal_cdf(a)
    }
}

/// Standard normal density.
pub fn normal_pdf<T: Real>(z: T) -> T {
    (-(z * z) * T::lit(0.5)).exp() / (T::TAU()).sqrt()
}
