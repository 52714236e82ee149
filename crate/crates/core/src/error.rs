use thiserror::Error;

/// Errors raised by the laboratory. Variants map onto CLI exit codes via
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated a documented precondition on arguments.
    #[error("usage error: {0}")]
    Usage(String),
    /// Input data is malformed (non-finite values, bad shapes).
    #[error("data error: {0}")]
    Data(String),
    /// A point outside the domain of a closed-form function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A checked precondition on the *state* failed (e.g. negativity).
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("blow-up at t = {time}: sup norm {norm:.6e} exceeds ceiling {ceiling:.6e}")]
    BlowUp { time: f64, norm: f64, ceiling: f64 },
    #[error("divergence gate failed at t = {time}: max |div b| = {value:.3e}")]
    Divergence { time: f64, value: f64 },
    #[error("non-finite particle position at t = {time} (particle {index})")]
    NonFinite { time: f64, index: usize },
    /// Configuration rejected; `path` names the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 2 for configuration errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
