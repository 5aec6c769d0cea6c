use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user input: dimensions, signs, parameter ranges.
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear solve or factorisation broke down.
    #[error("numeric breakdown: {0}")]
    Numeric(String),

    /// The boundary block `Π(Q_ΓΓ + WB)Π` is singular for the requested
    /// extension, so no eliminated generator exists at shift zero.
    #[error("singular boundary block (pivot magnitude {pivot:.3e}); {hint}")]
    SingularBoundaryBlock { pivot: f64, hint: String },

    /// A structural contract was violated (symmetry, projection identity,
    /// conservation of row sums) beyond the stated tolerance.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Configuration file / CLI argument problems.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
