use thiserror::Error;

/// Exit status of a command.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or unreadable configuration, trace file or output location.
    #[error("configuration error: {0}")]
    Config(String),
    /// A domain violation while computing.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    /// Attribute a core error raised while interpreting `key`.
    pub fn at(key: &str, err: tanfix_core::Error) -> Self {
        CliError::Config(format!("{key}: {}", strip(&err)))
    }

    /// Classify a core error raised while computing.
    pub fn runtime(err: tanfix_core::Error) -> Self {
        match err {
            tanfix_core::Error::Config(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn strip(err: &tanfix_core::Error) -> String {
    match err {
        tanfix_core::Error::Config(m) | tanfix_core::Error::Domain(m) => m.clone(),
        other => other.to_string(),
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}
