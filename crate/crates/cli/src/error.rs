use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] wdmd::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("method `{0}` needs full-state samples; pass a state CSV")]
    MissingStates(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Stable machine-readable error category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                wdmd::Error::InvalidSpec(_) => "invalid_spec",
                wdmd::Error::NyquistViolation { .. } => "nyquist_violation",
                wdmd::Error::EmptySignal => "empty_signal",
                wdmd::Error::InvalidLevel(_) => "invalid_level",
                wdmd::Error::BankMismatch { .. } => "bank_mismatch",
                wdmd::Error::EmptyData(_) => "empty_data",
                wdmd::Error::TooFewColumns(_) => "too_few_columns",
                wdmd::Error::ShapeMismatch(_) => "shape_mismatch",
                wdmd::Error::DegenerateData(_) => "degenerate_data",
                wdmd::Error::InsufficientData(_) => "insufficient_data",
                wdmd::Error::SvdFailure => "svd_failure",
                wdmd::Error::EigFailure => "eig_failure",
                wdmd::Error::ExpmFailure(_) => "expm_failure",
                wdmd::Error::SingularResolvent { .. } => "singular_resolvent",
                wdmd::Error::ZeroReference => "zero_reference",
                wdmd::Error::ZeroModeVector(_) => "zero_mode_vector",
                wdmd::Error::InsufficientExcitation { .. } => "insufficient_excitation",
            },
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
            CliError::Config(_) => "config",
            CliError::MissingStates(_) => "missing_states",
            CliError::DimMismatch(_) => "dim_mismatch",
        }
    }

    /// One-line JSON document for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}
