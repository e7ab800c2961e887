//! Transfer-operator route to the limit parameters `χ̄` and `σ²`.
//!
//! Nothing here looks at periodic points: the measure of maximal entropy is
//! the adjoint leading eigenvector of the normalized transfer operator, `σ²`
//! is the Green–Kubo sum of its correlations, and `κ(t)` is the leading
//! eigenvalue of the twisted operator. [`preimage_average`] is a
//! brute-force check on the eigenmeasure.

mod model;
mod preimage;
mod variance;

pub use model::{SpectralModel, DEFAULT_MODES, MAX_MODES, MIN_MODES};
pub use preimage::{preimage_average, PREIMAGE_CAP};
pub use variance::{
    asymptotic_variance, autocorrelation, mean_exponent, twisted_eigenvalue, MeanExponent,
    VarianceEstimate, DEGENERATE_VARIANCE, MAX_LAG, MAX_TWIST, TAIL_TARGET,
};
