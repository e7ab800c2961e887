use serde::Serialize;

use super::{normal_interval, EmpiricalDistribution};
use crate::circle_map::CircleMap;
use crate::error::{Error, Result};
use crate::periodic_points::{check_cap, exponent_multiset_capped};
use crate::scalar::{least_squares_slope, Real};
use crate::spectral::SpectralModel;

/// Test intervals `[a, b]` for normalized exponents; `+∞` is allowed.
pub const DEFAULT_INTERVALS: [(f64, f64); 4] = [
    (-1.0, 1.0),
    (-2.0, 2.0),
    (0.0, f64::INFINITY),
    (1.0, f64::INFINITY),
];
/// Arguments at which the characteristic function is compared with `e^{−λ²/2}`.
pub const DEFAULT_LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

/// Limit parameters of the central limit theorem, from the spectral side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CltParameters<T> {
    pub chi_bar: T,
    pub sigma_squared: T,
}

impl<T: Real> CltParameters<T> {
    /// `χ̄` and `σ²` from the transfer operator of `map`. A degenerate
    /// variance is passed through as zero; normalization rejects it later.
    pub fn from_spectral(map: &CircleMap<T>) -> Result<Self> {
        let model = SpectralModel::untwisted_auto(map)?;
        let variance = model.variance_estimate()?;
        Ok(Self {
            chi_bar: model.chi_bar(),
            sigma_squared: variance.sigma_squared,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalDiscrepancy<T> {
    /// Lower end; `None` is `−∞`.
    pub lower: Option<T>,
    /// Upper end; `None` is `+∞`.
    pub upper: Option<T>,
    pub empirical: T,
    pub normal: T,
    pub discrepancy: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharFnDiscrepancy<T> {
    pub lambda: T,
    pub re: T,
    pub im: T,
    /// `|Ψₙ(λ) − e^{−λ²/2}|`.
    pub discrepancy: T,
}

/// Per-period comparison of the exponent law with its normal limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltReport<T> {
    pub period: u32,
    pub count: usize,
    pub chi_bar: T,
    pub sigma_squared: T,
    pub sigma: T,
    /// `E(χₙ)`.
    pub sample_mean: T,
    /// `n · Var(χₙ)`.
    pub scaled_variance: T,
    /// `|E(χₙ) − χ̄|`.
    pub mean_error: T,
    /// `|n · Var(χₙ) − σ²|`.
    pub variance_error: T,
    pub ks_distance: T,
    pub interval_discrepancies: Vec<IntervalDiscrepancy<T>>,
    pub char_fn_discrepancies: Vec<CharFnDiscrepancy<T>>,
}

impl<T: Real> CltReport<T> {
    /// Builds the report from an already enumerated exponent multiset.
    pub fn from_distribution(dist: &EmpiricalDistribution<T>, params: &CltParameters<T>) -> Result<Self> {
        let sigma = params.sigma_squared.max(T::zero()).sqrt();
        let normalized = dist.normalize(params.chi_bar, sigma)?;
        let n = T::from_u32(dist.period()).unwrap();
        let sample_mean = dist.mean()?;
        let scaled_variance = n * dist.variance()?;

        let interval_discrepancies = DEFAULT_INTERVALS
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (T::lit(a), T::lit(b));
                let empirical = normalized.interval_probability(a, b)?;
                let normal = normal_interval(a, b);
                Ok(IntervalDiscrepancy {
                    lower: Some(a).filter(|v| v.is_finite()),
                    upper: Some(b).filter(|v| v.is_finite()),
                    empirical,
                    normal,
                    discrepancy: (empirical - normal).abs(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let char_fn_discrepancies = DEFAULT_LAMBDAS
            .iter()
            .map(|&l| {
                let lambda = T::lit(l);
                let psi = normalized.characteristic_fn(lambda);
                let target = (-(lambda * lambda) * T::lit(0.5)).exp();
                CharFnDiscrepancy {
                    lambda,
                    re: psi.re,
                    im: psi.im,
                    discrepancy: (psi - target).norm(),
                }
            })
            .collect();

        Ok(Self {
            period: dist.period(),
            count: dist.len(),
            chi_bar: params.chi_bar,
            sigma_squared: params.sigma_squared,
            sigma,
            sample_mean,
            scaled_variance,
            mean_error: (sample_mean - params.chi_bar).abs(),
            variance_error: (scaled_variance - params.sigma_squared).abs(),
            ks_distance: normalized.ks_distance(),
            interval_discrepancies,
            char_fn_discrepancies,
        })
    }

    /// Human-readable descriptions of any broken report invariant.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.ks_distance >= T::zero() && self.ks_distance <= T::one()) {
            out.push(format!("KS distance {} outside [0, 1]", self.ks_distance));
        }
        let nonneg = |v: T| v >= T::zero() && v.is_finite();
        for d in &self.interval_discrepancies {
            if !nonneg(d.discrepancy) {
                out.push(format!("interval discrepancy {} is invalid", d.discrepancy));
            }
        }
        for d in &self.char_fn_discrepancies {
            if !nonneg(d.discrepancy) {
                out.push(format!("characteristic-function discrepancy {} is invalid", d.discrepancy));
            }
        }
        if !nonneg(self.mean_error) || !nonneg(self.variance_error) {
            out.push("moment errors must be finite and non-negative".into());
        }
        out
    }
}

/// Enumerates `Fix(fⁿ)` and compares the exponent law with `N(χ̄, σ²/n)`.
pub fn clt_report<T: Real>(
    map: &CircleMap<T>,
    period: u32,
    params: &CltParameters<T>,
    cap: u64,
) -> Result<CltReport<T>> {
    check_sigma(params)?;
    let dist = exponent_multiset_capped(map, period, cap)?;
    CltReport::from_distribution(&dist, params)
}

fn check_sigma<T: Real>(params: &CltParameters<T>) -> Result<()> {
    let sigma = params.sigma_squared.max(T::zero()).sqrt();
    if !(sigma > T::lit(super::SIGMA_FLOOR)) {
        return Err(Error::DegenerateSigma {
            sigma: sigma.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Reports over several periods plus the log-log slope of `Dₙ` against `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltStudy<T> {
    pub chi_bar: T,
    pub sigma_squared: T,
    pub reports: Vec<CltReport<T>>,
    /// Least-squares slope of `ln Dₙ` against `ln n`; absent for a single period.
    pub ks_slope: Option<T>,
}

pub fn clt_study<T: Real>(
    map: &CircleMap<T>,
    periods: &[u32],
    params: &CltParameters<T>,
    cap: u64,
) -> Result<CltStudy<T>> {
    if periods.is_empty() {
        return Err(Error::InvalidArgument("no periods requested".into()));
    }
    for &n in periods {
        check_cap(map.degree(), n, cap)?;
    }
    check_sigma(params)?;
    let reports = periods
        .iter()
        .map(|&n| clt_report(map, n, params, cap))
        .collect::<Result<Vec<_>>>()?;
    let ks_slope = (reports.len() >= 2).then(|| {
        let xs: Vec<T> = reports.iter().map(|r| T::from_u32(r.period).unwrap().ln()).collect();
        let ys: Vec<T> = reports.iter().map(|r| r.ks_distance.ln()).collect();
        least_squares_slope(&xs, &ys)
    });
    Ok(CltStudy {
        chi_bar: params.chi_bar,
        sigma_squared: params.sigma_squared,
        reports,
        ks_slope,
    })
}
