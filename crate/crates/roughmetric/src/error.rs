use thiserror::Error;

/// Library-wide error type. Variants map onto the CLI exit codes:
/// parameter/resource problems exit 2, inconclusive verdicts exit 3,
/// diagnostic failures (internal consistency violations) exit 4.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or configuration value.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A requested computation exceeds the configured resource budget.
    #[error("resource budget exceeded: {message} (reached {reached})")]
    Resource { message: String, reached: usize },

    /// Evaluation requested at a point where the quantity is undefined
    /// (kinks, region boundaries, null sets).
    #[error("undefined at requested point: {0}")]
    UndefinedPoint(String),

    /// A point cannot be classified at the available construction depth.
    #[error("unclassifiable at available depth: {0}")]
    Unclassifiable(String),

    /// Internal consistency check failed (e.g. bracket inversion).
    #[error("diagnostic failure: {0}")]
    Diagnostic(String),

    /// A verdict could not be separated from noise.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
