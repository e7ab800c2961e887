use num_complex::Complex;
use serde::Serialize;

use super::model::{dot, SpectralModel};
use crate::circle_map::CircleMap;
use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Real};

/// Asymptotic variances below this are reported as degenerate.
pub const DEGENERATE_VARIANCE: f64 = 1e-9;
/// Target for the extrapolated tail of the Green–Kubo sum.
pub const TAIL_TARGET: f64 = 1e-10;
pub const MAX_LAG: usize = 2000;
/// Twists beyond this are outside the perturbative regime.
pub const MAX_TWIST: f64 = 0.5;

/// Green–Kubo sum `σ² = μ(ĥ²) + 2 Σ_{j≥1} μ(ĥ · ĥ∘fʲ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceEstimate<T> {
    /// `σ²`, clipped at zero.
    pub sigma_squared: T,
    /// Largest lag `J` included in the sum.
    pub truncation: usize,
    /// Estimated magnitude of the dropped lags.
    pub tail_bound: T,
    /// Autocorrelations `μ(ĥ · ĥ∘fʲ)` for `j = 0..=J`.
    pub terms: Vec<T>,
    /// Geometric decay ratio fitted to the last terms.
    pub decay_ratio: T,
    /// Set when `σ² < 1e-9`.
    pub degenerate: bool,
}

/// `χ̄ = μ(ln f')` together with the untwisted model it came from.
#[derive(Clone, Debug)]
pub struct MeanExponent<T: Real> {
    pub chi_bar: T,
    pub model: SpectralModel<T>,
}

impl<T: Real> MeanExponent<T> {
    /// `ĥ(x) = ln f'(x) − χ̄`.
    pub fn centered(&self, x: T) -> T {
        self.model.map().log_derivative().value(x) - self.chi_bar
    }
}

/// `χ̄` for `map`, with the resolution chosen automatically.
pub fn mean_exponent<T: Real>(map: &CircleMap<T>) -> Result<MeanExponent<T>> {
    let model = SpectralModel::untwisted_auto(map)?;
    Ok(MeanExponent {
        chi_bar: model.chi_bar(),
        model,
    })
}

/// `μ(ĥ · ĥ∘fʲ)`.
pub fn autocorrelation<T: Real>(map: &CircleMap<T>, lag: usize) -> Result<T> {
    SpectralModel::untwisted_auto(map)?.autocorrelation(lag)
}

/// Green–Kubo variance; fails with [`Error::DegenerateVariance`] when the
/// sum is numerically zero.
pub fn asymptotic_variance<T: Real>(map: &CircleMap<T>) -> Result<VarianceEstimate<T>> {
    let estimate = SpectralModel::untwisted_auto(map)?.variance_estimate()?;
    if estimate.degenerate {
        return Err(Error::DegenerateVariance {
            sigma_squared: estimate.sigma_squared.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(estimate)
}

/// Leading eigenvalue `κ(t)` of the twisted operator.
pub fn twisted_eigenvalue<T: Real>(map: &CircleMap<T>, twist: T) -> Result<Complex<T>> {
    SpectralModel::untwisted_auto(map)?.twisted_eigenvalue(twist)
}

impl<T: Real> SpectralModel<T> {
    fn require_untwisted(&self) -> Result<()> {
        if self.twist() != T::zero() {
            return Err(Error::InvalidArgument(
                "correlations are defined on the untwisted model".into(),
            ));
        }
        Ok(())
    }

    /// Row vector `w` with `w·c = μ(ĥ φ)` for `φ` with coefficients `c`.
    fn centered_product_functional(&self) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let n = self.modes() as i64;
        let wide = self.centered_coefficients_wide();
        let m = self.leading_eigenmeasure();
        let w = (-n..=n)
            .map(|l| {
                (-n..=n).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                    acc + m[(k + n) as usize] * wide[(k - l + 2 * n) as usize]
                })
            })
            .collect();
        let centered = wide[n as usize..=(3 * n) as usize].to_vec();
        (w, centered)
    }

    /// `μ(ĥ · ĥ∘fʲ) = μ(ĥ · Pʲĥ)` with `P` the normalized operator.
    pub fn autocorrelation(&self, lag: usize) -> Result<T> {
        self.require_untwisted()?;
        let (w, mut v) = self.centered_product_functional();
        for _ in 0..lag {
            v = self.apply(&v);
        }
        Ok(dot(&w, &v).re)
    }

    /// Sums autocorrelations until the fitted geometric tail drops below
    /// `1e-10 · max(1, σ²)` or the terms reach rounding level.
    pub fn variance_estimate(&self) -> Result<VarianceEstimate<T>> {
        self.require_untwisted()?;
        let (w, mut v) = self.centered_product_functional();
        let c0 = dot(&w, &v).re;
        let floor = T::lit(64.0) * T::epsilon() * c0.abs().max(T::min_positive_value());
        let mut terms = vec![c0];
        let mut tail_bound = T::zero();
        let mut decay_ratio = T::zero();
        let mut settled = c0.abs() <= floor;
        let mut lag = 0;
        while !settled && lag < MAX_LAG {
            lag += 1;
            v = self.apply(&v);
            let c = dot(&w, &v).re;
            terms.push(c);
            if c.abs() <= floor && terms[lag - 1].abs() <= floor {
                tail_bound = c.abs();
                settled = true;
            } else if lag >= 5 {
                let ratio = terms[lag - 4..=lag]
                    .windows(2)
                    .map(|p| p[1].abs() / p[0].abs().max(T::min_positive_value()))
                    .fold(T::zero(), T::max);
                decay_ratio = ratio;
                let partial = c0 + T::lit(2.0) * compensated_sum(terms[1..].iter().copied());
                let target = T::lit(TAIL_TARGET) * partial.abs().max(T::one());
                if ratio < T::one() {
                    let tail = T::lit(2.0) * c.abs() * ratio / (T::one() - ratio);
                    if tail <= target {
                        tail_bound = tail;
                        settled = true;
                    }
                }
            }
        }
        if !settled {
            return Err(Error::Resolution {
                modes: self.modes(),
                reason: format!("autocorrelations did not decay within {MAX_LAG} lags"),
            });
        }
        let raw = c0 + T::lit(2.0) * compensated_sum(terms[1..].iter().copied());
        let degenerate = raw < T::lit(DEGENERATE_VARIANCE);
        Ok(VarianceEstimate {
            sigma_squared: raw.max(T::zero()),
            truncation: terms.len() - 1,
            tail_bound,
            terms,
            decay_ratio,
            degenerate,
        })
    }

    /// Leading eigenvalue of the model twisted by `t`, at the same resolution.
    pub fn twisted_eigenvalue(&self, twist: T) -> Result<Complex<T>> {
        if !(twist.abs() <= T::lit(MAX_TWIST)) {
            return Err(Error::InvalidArgument(format!(
                "twist {twist} outside the perturbative range |t| <= {MAX_TWIST}"
            )));
        }
        if twist == T::zero() && self.twist() == T::zero() {
            return Ok(self.leading_eigenvalue());
        }
        Ok(self.twisted(twist)?.leading_eigenvalue())
    }
}
