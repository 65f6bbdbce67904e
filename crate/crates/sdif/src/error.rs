use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: left shape {lhs:?}, right shape {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("degenerate input in {op}: {detail}")]
    Degenerate { op: &'static str, detail: String },

    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing file: {}", path.display())]
    MissingFile { path: PathBuf },

    #[error("schema violation in {}: {detail}", path.display())]
    Schema { path: PathBuf, detail: String },

    #[error("non-finite feature value in sample '{sample_id}' ({modality})")]
    NonFiniteFeature { sample_id: String, modality: &'static str },

    #[error("unknown label {label} in sample '{sample_id}'")]
    UnknownLabel { sample_id: String, label: usize },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed corpus line {line}: {detail}")]
    CorpusLine { line: usize, detail: String },

    #[error("chat transport failed after {attempts} attempts: {detail} ({collected} utterances collected)")]
    Transport {
        attempts: u32,
        detail: String,
        collected: usize,
    },

    #[error("training diverged at epoch {epoch}: {detail}")]
    Divergence { epoch: usize, detail: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
