//! Periodic Lyapunov exponents of smooth expanding circle maps.
//!
//! For an expanding map `f` of degree `K`, the `Kⁿ − 1` points of
//! `Fix(fⁿ)` carry exponents `χₙ(p) = (1/n) ln (fⁿ)'(p)`. This crate
//! enumerates them exactly ([`periodic_points`]), computes the limit mean
//! `χ̄` and variance `σ²` of their law from the transfer operator alone
//! ([`spectral`]), and measures how close `(χₙ − χ̄)√n/σ` is to a standard
//! normal ([`statistics`]).
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle_map;
pub mod cli;
pub mod error;
pub mod periodic_points;
mod roots;
pub mod scalar;
pub mod spectral;
pub mod statistics;

pub use circle_map::{expansivity_certificate, CircleMap, ExpansivityCertificate, MapFamily, MapId};
pub use error::{Error, Result};
pub use periodic_points::{
    birkhoff_average, enumerate_fix, enumerate_fix_capped, exponent_multiset, solve_branch,
    BranchIndex, PeriodicPointRecord, DEFAULT_ENUMERATION_CAP,
};
pub use scalar::Real;
pub use spectral::{
    asymptotic_variance, autocorrelation, mean_exponent, preimage_average, twisted_eigenvalue,
    SpectralModel, VarianceEstimate,
};
pub use statistics::{clt_report, clt_study, CltParameters, CltReport, EmpiricalDistribution, Histogram};

pub type CircleMap64 = CircleMap<f64>;
pub type PeriodicPoint64 = PeriodicPointRecord<f64>;
pub type SpectralModel64 = SpectralModel<f64>;
pub type VarianceEstimate64 = VarianceEstimate<f64>;
pub type Distribution64 = EmpiricalDistribution<f64>;
pub type CltReport64 = CltReport<f64>;
pub type CircleMap32 = CircleMap<f32>;
