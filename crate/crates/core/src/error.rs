use thiserror::Error;

/// Crate-wide error type. Variants map onto the failure classes of the
/// numeric pipeline; CLI exit codes are derived from them.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed something structurally wrong (shape mismatch, bad range,
    /// non-positive count, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input is valid in shape but carries no usable signal (all-zero matrix,
    /// zero baseline, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Evaluation outside a model's validity range (Sellmeier wavelength,
    /// dispersion-curve wavelength or delay, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Numerical failure: non-finite entries, no convergence.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A 1-D curve has no measurable width (no half-maximum crossing).
    #[error("not measurable: {0}")]
    NotMeasurable(String),

    /// A HOM scan has no usable large-delay points to define its baseline.
    #[error("baseline undefined: {0}")]
    BaselineUndefined(String),

    /// Malformed data file (matrix CSV, tag stream, calibration, Sellmeier).
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
