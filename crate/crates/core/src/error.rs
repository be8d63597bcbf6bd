use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A closed form hit a nonpositive radicand or a vanishing denominator.
    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("singular system: pivot {pivot:e} in column {column} is below the threshold")]
    Singular { column: usize, pivot: f64 },

    /// The adaptive integrator ran out of evaluations before meeting its
    /// tolerance.
    #[error(
        "integration did not converge after {evaluations} evaluations \
         (best estimate {best_estimate:e}, error estimate {error_estimate:e})"
    )]
    OracleFailure {
        best_estimate: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    /// Coefficients and multipliers passed to a norm route do not solve the
    /// stationarity system.
    #[error("inconsistent input: system residual {residual:e} exceeds {limit:e}")]
    InconsistentInput { residual: f64, limit: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
