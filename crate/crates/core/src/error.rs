use std::path::PathBuf;

/// Errors produced across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("piece id {0} is out of range for a vocabulary of {1} pieces")]
    IdOutOfRange(u32, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("sequence is empty")]
    EmptySequence,
    #[error("distribution at position {position} sums to {sum}")]
    ProbabilityNotNormalized { position: usize, sum: f64 },
    #[error("parameter `{0}` has no gradient")]
    MissingGradient(String),
    #[error("article is empty")]
    EmptyArticle,
    #[error("summary is empty")]
    EmptySummary,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset contains a single label class")]
    SingleClassDataset,
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown subcommand `{0}`")]
    UnknownSubcommand(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("vocabulary file: {0}")]
    VocabFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
