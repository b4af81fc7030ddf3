use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input; `location` is `file:line` or similar.
    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid language tag {0:?}")]
    InvalidLanguageTag(String),

    /// A record broke a data invariant; `id` names the offending record.
    #[error("{id}: {message}")]
    Invariant { id: String, message: String },

    #[error("label set unregistered for task {task:?}, language {lang}")]
    LabelSetUnregistered { task: String, lang: String },

    #[error("label sets for task {0:?} have unequal lengths across languages")]
    LabelSetLengthMismatch(String),

    #[error("no display name for language {0}")]
    UnknownLanguageName(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("vector dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("missing embedding for {0}")]
    MissingEmbedding(String),

    #[error("missing value for placeholder [{0}]")]
    MissingPlaceholder(String),

    #[error("template out of range: {kind} has no template {index}")]
    TemplateOutOfRange { kind: String, index: usize },

    #[error("client error: {0}")]
    Client(String),

    #[error("no scored queries")]
    NoScoredQueries,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invariant(id: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invariant {
            id: id.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// True for errors caused by bad input or configuration rather than a
    /// runtime failure (used for exit-code selection).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidArgument(_) | Error::InvalidLanguageTag(_)
        )
    }
}
