//! Library side of the `epsense` command: settings, sweeps, figure data and reports.

pub mod config;
pub mod figures;
pub mod params;
pub mod report;
pub mod sweep;
pub mod table;

use std::path::PathBuf;

use epsense::model::ModelError;
use epsense::qfi::QfiError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(ModelError),
    Pole(String),
    Io { path: PathBuf, source: std::io::Error },
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Model(_) => 2,
            CliError::Pole(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Compute(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Model(e) => write!(f, "invalid model: {e}"),
            CliError::Pole(m) => write!(f, "{m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Compute(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e)
    }
}

impl From<QfiError> for CliError {
    fn from(e: QfiError) -> Self {
        if e.is_pole() {
            return CliError::Pole(e.to_string());
        }
        match e {
            QfiError::Model(m) => CliError::Model(m),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<epsense::spectral::SpectralError> for CliError {
    fn from(e: epsense::spectral::SpectralError) -> Self {
        QfiError::from(e).into()
    }
}
