use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("{0} nodes exceeds the 32-bit node id range")]
    TooManyNodes(usize),

    #[error("node {node} out of range for a graph with {num_nodes} nodes")]
    NodeOutOfRange { node: i64, num_nodes: usize },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid CSR: {0}")]
    InvalidCsr(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{0}: no edges found")]
    EmptyInput(PathBuf),

    #[error("bad CSR cache file: {0}")]
    BadCache(String),

    #[error("invalid sampled indices: {0}")]
    InvalidIndices(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("seed batch has no labels")]
    MissingLabels,

    #[error("unknown dataset spec `{0}`")]
    UnknownDataset(String),

    #[error("incomplete config {0}: both fused and baseline rows are required")]
    IncompleteConfig(String),

    #[error("row {row}: {msg}")]
    CsvRow { row: usize, msg: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
