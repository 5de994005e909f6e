use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad argument: wrong dimension, point outside its domain, etc.
    #[error("input error: {0}")]
    Input(String),

    /// The requested operation is not supported for these arguments.
    #[error("unsupported: {0}")]
    Capability(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// Gram matrix stayed indefinite after the full jitter ladder.
    #[error("conditioning failed ({context}): min eigenvalue {min_eigenvalue:.3e}")]
    Conditioning {
        context: String,
        min_eigenvalue: f64,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("sampler aborted: {0}")]
    Sampler(String),

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Attach experiment context to a propagated failure.
    pub fn context(self, ctx: &str) -> Self {
        match self {
            Error::Input(m) => Error::Input(format!("{ctx}: {m}")),
            Error::Numerical(m) => Error::Numerical(format!("{ctx}: {m}")),
            Error::Capability(m) => Error::Capability(format!("{ctx}: {m}")),
            Error::Sampler(m) => Error::Sampler(format!("{ctx}: {m}")),
            Error::Conditioning {
                context,
                min_eigenvalue,
            } => Error::Conditioning {
                context: format!("{ctx}: {context}"),
                min_eigenvalue,
            },
            other => other,
        }
    }
}
