use thiserror::Error;

/// Errors raised by the geometric, mapping and iteration layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point is not a member of the space or set it was handed to.
    #[error("domain error: {0}")]
    Domain(String),

    /// An invalid or unsupported parameter combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// An iterate left the admissible set during a run.
    #[error("step {step}: mapping {mapping} left the domain: {detail}")]
    Escape {
        step: usize,
        mapping: usize,
        detail: String,
    },

    /// An orbit exceeded its declared bound.
    #[error("orbit left the bound at step {step}: {detail}")]
    Unbounded { step: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<S: Into<String>>(msg: S) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn domain<S: Into<String>>(msg: S) -> Error {
    Error::Domain(msg.into())
}
