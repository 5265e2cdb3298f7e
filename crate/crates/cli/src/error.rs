use thiserror::Error;

/// Process exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("no stationary distribution; exit exponent is 0 is NOT implied \u{2014} analysis unsupported (spectral radius {0})")]
    Unstable(f64),

    #[error(transparent)]
    Compute(#[from] arexit::Error),

    #[error("verification failed: {0} check(s) failed")]
    VerifyFailed(usize),

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Compute(e) => match e {
                arexit::Error::InvalidArgument(_)
                | arexit::Error::DimensionMismatch { .. }
                | arexit::Error::NotSquare { .. } => EXIT_CONFIG,
                _ => EXIT_COMPUTE,
            },
            CliError::Unstable(_) | CliError::VerifyFailed(_) | CliError::Output(_) => EXIT_COMPUTE,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
