use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on node {node} rejected")]
    SelfLoop { line: usize, node: u64 },

    #[error("no events")]
    NoEvents,

    #[error("label conflict for node {node}: {first} vs {second}")]
    LabelConflict { node: u64, first: i64, second: i64 },

    #[error("out-of-order time: {time} precedes {last}")]
    OutOfOrder { last: f64, time: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{0}")]
    Contract(String),

    #[error("no eligible node to draw a negative sample from")]
    NoEligibleNegatives,

    #[error("class {class} has {count} labeled nodes, fewer than {folds} folds")]
    ClassTooSmall {
        class: i64,
        count: usize,
        folds: usize,
    },

    #[error("labeled nodes missing from embeddings: {}", format_ids(.0))]
    MissingEmbeddings(Vec<u64>),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn format_ids(ids: &[u64]) -> String {
    ids.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dim(what: &'static str, expected: usize, got: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            got,
        }
    }
}
