use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("frequency {freq_hz} Hz is at or above the Nyquist limit {nyquist_hz} Hz")]
    NyquistViolation { freq_hz: f64, nyquist_hz: f64 },

    #[error("signal is empty")]
    EmptySignal,

    #[error("invalid decomposition level {0} (must be >= 1)")]
    InvalidLevel(usize),

    #[error("filter bank mismatch: decomposition used `{expected}`, got `{found}`")]
    BankMismatch { expected: String, found: String },

    #[error("no data: {0}")]
    EmptyData(String),

    #[error("need at least two snapshot columns, got {0}")]
    TooFewColumns(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("SVD did not converge")]
    SvdFailure,

    #[error("eigendecomposition did not converge")]
    EigFailure,

    #[error("matrix exponential failed: {0}")]
    ExpmFailure(String),

    #[error("resolvent is singular at omega = {omega} rad/s")]
    SingularResolvent { omega: f64 },

    #[error("reference signal has zero energy")]
    ZeroReference,

    #[error("mode vector {0} has zero norm")]
    ZeroModeVector(usize),

    #[error("input auto-spectrum below floor at omega = {omega} rad/s")]
    InsufficientExcitation { omega: f64 },
}
