use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no well-formed records in {} ({skipped} malformed lines)", path.display())]
    EmptyCorpus { path: PathBuf, skipped: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("undefined input: {0}")]
    UndefinedInput(String),

    #[error("empty vocabulary: no term has document frequency >= {min_df}")]
    EmptyVocabulary { min_df: usize },

    #[error("degenerate training data: {0}")]
    DegenerateTraining(String),

    #[error("dimension mismatch: model expects {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("unknown scorer `{0}`")]
    UnknownScorer(String),

    #[error("scorer `{scorer}` failed at id `{id}`: {reason}")]
    Scoring {
        scorer: String,
        id: String,
        reason: String,
    },

    #[error("scorer `{scorer}` violated protocol: {detail}")]
    Protocol { scorer: String, detail: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid annotation data: {0}")]
    Annotation(String),

    #[error("unsupported file version `{found}` (expected `{expected}`)")]
    VersionMismatch { expected: String, found: String },

    #[error("cannot parse {context}: {detail}")]
    Parse { context: String, detail: String },

    #[error("{} evaluation rows lack a gold label: {}", .0.len(), .0.join(","))]
    Unlabeled(Vec<String>),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, detail: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            detail: detail.to_string(),
        }
    }
}
