use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("map is not certifiably expanding: certified lower bound of f' is {lambda_star}")]
    NotExpanding { lambda_star: f64 },
    #[error("inconsistent map definition: {0}")]
    InconsistentMap(String),
    #[error("root finder did not converge for branch {branch} of period {period} (step {last_step:e})")]
    ConvergenceFailure {
        period: u32,
        branch: u64,
        last_step: f64,
    },
    #[error("enumeration needs {required} points but the cap is {cap}")]
    CapExceeded { required: u64, cap: u64 },
    #[error("spectral discretization under-resolved with {modes} modes: {reason}")]
    Resolution { modes: usize, reason: String },
    #[error("asymptotic variance {sigma_squared:e} is numerically zero")]
    DegenerateVariance { sigma_squared: f64 },
    #[error("normalization scale sigma = {sigma:e} is degenerate")]
    DegenerateSigma { sigma: f64 },
    #[error("distribution is empty")]
    EmptyDistribution,
    #[error("all values are equal; histogram range is degenerate")]
    DegenerateRange,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
