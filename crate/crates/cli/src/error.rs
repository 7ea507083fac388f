//! CLI error classification; the variant decides the process exit code.

use thiserror::Error;

use cn_tdse::TdseError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad config values, inconsistent scenarios. Exit code 1.
    #[error("{0}")]
    Usage(String),

    /// Solver failures: singular systems, residual or norm-drift checks.
    /// Exit code 2.
    #[error(transparent)]
    Numerical(TdseError),

    /// Filesystem problems. Exit code 3.
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

/// Classify a propagation failure: observer errors that wrap an I/O failure
/// exit with the I/O code, everything else is a numerical failure.
pub fn from_run_error(err: TdseError) -> CliError {
    match err {
        TdseError::Observer { step, source } => match source.downcast::<std::io::Error>() {
            Ok(io) => CliError::io(format!("writing records at step {step}"), *io),
            Err(other) => CliError::Usage(format!("observer failed at step {step}: {other}")),
        },
        other => CliError::Numerical(other),
    }
}

/// Configuration-time validation failures map to usage errors.
pub fn from_config_error(err: TdseError) -> CliError {
    CliError::Usage(err.to_string())
}
