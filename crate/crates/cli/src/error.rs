use polargrass::gensets::GensetError;
use polargrass::{FieldError, FormError, GrassmannError, LinalgError, PolarError};
use thiserror::Error;

/// Every failure that ends a run with exit code 1, grouped by cause so the
/// diagnostic names what went wrong.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("unknown descriptor: {0}")]
    Descriptor(String),
    #[error("budget exceeded: {0} (rerun with --budget large if the machine allows it)")]
    Budget(String),
    #[error("fixture mismatch: {0}")]
    Fixture(String),
    #[error("cache refused: {0}")]
    Cache(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    /// Short label printed in front of the message.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Descriptor(_) => "descriptor",
            CliError::Budget(_) => "budget",
            CliError::Fixture(_) => "fixture",
            CliError::Cache(_) => "cache",
            CliError::Io(_) => "io",
            CliError::Compute(_) => "compute",
        }
    }
}

impl From<FormError> for CliError {
    fn from(e: FormError) -> Self {
        match e {
            FormError::Descriptor(_) | FormError::Field(_) => CliError::Descriptor(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Descriptor(e.to_string())
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<PolarError> for CliError {
    fn from(e: PolarError) -> Self {
        match e {
            PolarError::TooLarge { .. } => CliError::Budget(e.to_string()),
            PolarError::Form(f) => f.into(),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<GrassmannError> for CliError {
    fn from(e: GrassmannError) -> Self {
        match e {
            GrassmannError::Polar(p) => p.into(),
            GrassmannError::BadK { .. } => CliError::Usage(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<GensetError> for CliError {
    fn from(e: GensetError) -> Self {
        match e {
            GensetError::Polar(p) => p.into(),
            GensetError::Grassmann(g) => g.into(),
            GensetError::Form(f) => f.into(),
            GensetError::Field(f) => f.into(),
            GensetError::Linalg(l) => l.into(),
            other => CliError::Compute(other.to_string()),
        }
    }
}
