use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a function (e.g. a Bessel function at t <= 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at a point where a kernel is singular.
    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver error: {message} (condition estimate {condition:.3e})")]
    Solver { message: String, condition: f64 },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
