use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    /// Both sides of a Granger ratio collapsed to zero residual variance.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    #[error("model is not stationary (spectral radius {0:.6})")]
    NonStationary(f64),

    #[error("lag polynomial is singular at frequency {frequency:.6} rad/sample")]
    SingularTransfer { frequency: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no candidate order could be fitted")]
    NoOrder,

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
}
