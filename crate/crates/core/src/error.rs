use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// The dataset cannot be handled by the requested model.
    #[error("out of scope: {0}")]
    Scope(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("pipeline error: {0}")]
    Pipeline(String),

    /// A transform failed while executing.
    #[error("transform '{transform}' failed{}: {source}", sample.map(|s| format!(" at sample {s}")).unwrap_or_default())]
    Transform {
        transform: String,
        sample: Option<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Regex(#[from] regex::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_transform(self, transform: &str, sample: Option<usize>) -> Self {
        Error::Transform {
            transform: transform.to_string(),
            sample,
            source: Box::new(self),
        }
    }
}
