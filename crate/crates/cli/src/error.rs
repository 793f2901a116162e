use thiserror::Error;

/// Exit code when every certified bound holds.
pub const EXIT_OK: i32 = 0;
/// Exit code for a violated bound or a failed computation.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit code for unreadable or invalid input.
pub const EXIT_PARSE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("{0}")]
    Io(String),
    #[error("{check} failed: {message}")]
    Failed { check: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Io(_) => EXIT_PARSE,
            CliError::Failed { .. } => EXIT_VIOLATION,
        }
    }

    /// Wraps an error raised while computing (not while loading input).
    pub fn computation(check: &str, e: povmround::Error) -> Self {
        CliError::Failed { check: check.into(), message: e.to_string() }
    }
}
