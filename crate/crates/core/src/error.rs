use thiserror::Error;

/// Errors raised by the analytic and Monte Carlo engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid correlation spec: {0}")]
    InvalidCorrelation(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("R0 not positive definite (min eigenvalue {min_eigenvalue:e})")]
    SignalCorrelationSingular { min_eigenvalue: f64 },

    #[error("correlation matrix {index} has trace {trace}, expected {expected}")]
    TraceMismatch {
        index: usize,
        trace: f64,
        expected: f64,
    },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Q(s) lost positive definiteness; `s` lies below the admissible domain.
    #[error("Q(s) not positive definite at s = {s}")]
    QNotPositiveDefinite { s: f64 },

    /// One of the `I - Pi Sigma` matrices has non-positive determinant.
    #[error("fluctuation matrix singular at s = {s} (det = {det:e})")]
    SingularFluctuation { s: f64, det: f64 },

    #[error("gamma = {gamma} is outside the range reachable by the saddle point ({reason})")]
    GammaOutOfRange { gamma: f64, reason: &'static str },

    #[error("interference matrix is rank deficient (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("generalized gamma fit failed: {0}")]
    FitFailure(String),

    #[error("density is not normalizable on the half line: {0}")]
    UnnormalizableOnHalfLine(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
