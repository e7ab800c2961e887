//! The empirical law of periodic exponents and its distance to the normal law.

mod histogram;
mod normal;
mod report;

use std::ops::{Bound, RangeBounds};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, CompensatedSum, Real};

pub use histogram::{Histogram, DEFAULT_BINS};
pub use normal::{erfc, normal_cdf, normal_interval, normal_pdf};
pub use report::{
    clt_report, clt_study, CharFnDiscrepancy, CltParameters, CltReport, CltStudy,
    IntervalDiscrepancy, DEFAULT_INTERVALS, DEFAULT_LAMBDAS,
};

/// Below this the normalization scale is treated as zero.
pub const SIGMA_FLOOR: f64 = 1e-9;

/// A sorted multiset of exponents (or normalized exponents) for period `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution<T> {
    values: Vec<T>,
    period: u32,
}

impl<T: Real> EmpiricalDistribution<T> {
    /// Sorts `values` ascending.
    pub fn from_exponents(mut values: Vec<T>, period: u32) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).expect("exponents are finite"));
        Self { values, period }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn min(&self) -> Option<T> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<T> {
        self.values.last().copied()
    }

    /// Arithmetic mean.
    pub fn mean(&self) -> Result<T> {
        if self.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        Ok(compensated_sum(self.values.iter().copied()) / T::from_count(self.len()))
    }

    /// Population variance, two-pass.
    pub fn variance(&self) -> Result<T> {
        let mean = self.mean()?;
        let ss = compensated_sum(self.values.iter().map(|&v| (v - mean) * (v - mean)));
        Ok(ss / T::from_count(self.len()))
    }

    /// Population variance by Welford's streaming update, with the running
    /// mean and the sum of squares both carried in compensated form.
    pub fn variance_streaming(&self) -> Result<T> {
        if self.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let mut mean = CompensatedSum::new();
        let mut m2 = CompensatedSum::new();
        for (i, &v) in self.values.iter().enumerate() {
            let delta = mean.deviation(v);
            mean.add(delta / T::from_count(i + 1));
            m2.add(delta * mean.deviation(v));
        }
        Ok(m2.value() / T::from_count(self.len()))
    }

    /// Number of values inside `range`, by binary search.
    pub fn count_in<R: RangeBounds<T>>(&self, range: R) -> usize {
        let lo = match range.start_bound() {
            Bound::Included(&a) => self.values.partition_point(|&v| v < a),
            Bound::Excluded(&a) => self.values.partition_point(|&v| v <= a),
            Bound::Unbounded => 0,
        };
        let hi = match range.end_bound() {
            Bound::Included(&b) => self.values.partition_point(|&v| v <= b),
            Bound::Excluded(&b) => self.values.partition_point(|&v| v < b),
            Bound::Unbounded => self.values.len(),
        };
        hi.saturating_sub(lo)
    }

    /// Fraction of values in the closed interval `[a, b]`; `b` may be `+∞`
    /// and `a` may be `−∞`.
    pub fn interval_probability(&self, a: T, b: T) -> Result<T> {
        if self.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if a.is_nan() || b.is_nan() || a > b {
            return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
        }
        Ok(T::from_count(self.count_in(a..=b)) / T::from_count(self.len()))
    }

    /// Maps each value `v` to `(v − χ̄)√n / σ`.
    pub fn normalize(&self, chi_bar: T, sigma: T) -> Result<Self> {
        if !(sigma > T::lit(SIGMA_FLOOR)) || !sigma.is_finite() {
            return Err(Error::DegenerateSigma {
                sigma: sigma.to_f64().unwrap_or(f64::NAN),
            });
        }
        let scale = T::from_u32(self.period).unwrap().sqrt() / sigma;
        Ok(Self {
            values: self.values.iter().map(|&v| (v - chi_bar) * scale).collect(),
            period: self.period,
        })
    }

    /// Inverse of [`normalize`](Self::normalize).
    pub fn denormalize(&self, chi_bar: T, sigma: T) -> Self {
        let scale = sigma / T::from_u32(self.period).unwrap().sqrt();
        Self {
            values: self.values.iter().map(|&v| v * scale + chi_bar).collect(),
            period: self.period,
        }
    }

    /// Exact sup distance between the empirical step CDF and `Φ`.
    pub fn ks_distance(&self) -> T {
        let n = T::from_count(self.len());
        self.values
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &v)| {
                let phi = normal_cdf(v);
                let above = (T::from_count(i + 1) / n - phi).abs();
                let below = (T::from_count(i) / n - phi).abs();
                acc.max(above).max(below)
            })
    }

    /// `Ψ(λ) = (1/N) Σ e^{iλvⱼ}`.
    pub fn characteristic_fn(&self, lambda: T) -> Complex<T> {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for &v in &self.values {
            let (s, c) = (lambda * v).sin_cos();
            re.add(c);
            im.add(s);
        }
        let n = T::from_count(self.len());
        Complex::new(re.value() / n, im.value() / n)
    }

    /// Equal-width histogram over `[min, max]`.
    pub fn histogram(&self, bins: usize) -> Result<Histogram<T>> {
        Histogram::from_sorted(&self.values, bins)
    }
}
