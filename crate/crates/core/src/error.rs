use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("corpus {path}: {message}")]
    Corpus { path: PathBuf, message: String },

    #[error("corpus {path}, row {row}: {message}")]
    CorpusRow {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("invalid label {0:?}: expected neutral, entailment or contradiction")]
    Label(String),

    #[error("invalid split: {0}")]
    Split(String),

    #[error("embeddings, line {line}: {message}")]
    EmbeddingRow { line: usize, message: String },

    #[error("embeddings truncated at byte offset {offset}: {message}")]
    EmbeddingTruncated { offset: u64, message: String },

    #[error("embeddings: {0}")]
    Embedding(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("model file: {0}")]
    Model(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
