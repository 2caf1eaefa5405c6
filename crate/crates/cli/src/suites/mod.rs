pub mod chaos;
pub mod diagrams;
pub mod fbm;
pub mod hermite;
pub mod renormalize;
pub mod spectral;
pub mod tails;

use spectral_chaos::io::{Check, Table};
use spectral_chaos::Error;

use crate::config::ConfigError;

pub struct Outcome {
    pub table: Table,
    pub checks: Vec<Check>,
    /// Every seed that fed a random stream.
    pub seeds: Vec<u64>,
}

#[derive(Debug)]
pub enum SuiteError {
    Config(ConfigError),
    Run(Error),
}

impl From<ConfigError> for SuiteError {
    fn from(e: ConfigError) -> Self {
        SuiteError::Config(e)
    }
}

impl From<Error> for SuiteError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(m) => SuiteError::Config(ConfigError::new("parameters", m)),
            Error::NoncentralDivergent { .. } => SuiteError::Config(ConfigError::new("k", e.to_string())),
            Error::NonSummable { .. } => SuiteError::Config(ConfigError::new("regime", e.to_string())),
            other => SuiteError::Run(other),
        }
    }
}

impl std::fmt::Display for SuiteError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SuiteError::Config(e) => write!(f, "{e}"),
            SuiteError::Run(e) => write!(f, "{e}"),
        }
    }
}

pub type SuiteResult = std::result::Result<Outcome, SuiteError>;

/// Run-time parameters shared by all suites.
pub struct Context {
    pub seed: u64,
    pub reps: Option<usize>,
}

pub(crate) fn f(x: f64) -> String {
    spectral_chaos::io::fmt_f64(x)
}
