use std::path::PathBuf;

use thiserror::Error;

use crate::corrcoef::CoefError;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input or violated precondition.
    Validation,
    /// The computation ran but every group or iteration was undefined.
    Degenerate,
    /// Reading or writing a file failed.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: invalid manifest: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid score matrix: {0}")]
    InvalidMatrix(String),
    #[error("{context}: dimension mismatch, expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    DimensionMismatch {
        context: String,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("{context}: identifiers differ from the human matrix")]
    IdMismatch { context: String },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Coef(#[from] CoefError),
    #[error("{measure}: all {groups} groups are undefined")]
    AllGroupsUndefined { measure: String, groups: usize },
    #[error("{context}: measure undefined at permutation iteration {iteration}: {source}")]
    PermutationUndefined {
        context: String,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("pair ({first}, {second}): {source}")]
    Pair {
        first: String,
        second: String,
        #[source]
        source: Box<Error>,
    },
    #[error("ranking agreement undefined: {0}")]
    DegenerateAgreement(String),
    #[error("all {iterations} iterations were undefined")]
    AllIterationsUndefined { iterations: usize },
    #[error("truncated normal window [{lo}, {hi}] has negligible mass under N({mu}, {sigma}^2)")]
    TruncationMass { mu: f64, sigma: f64, lo: f64, hi: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Csv { source, .. } if source.is_io_error() => ErrorKind::Io,
            Error::AllGroupsUndefined { .. }
            | Error::DegenerateAgreement(_)
            | Error::AllIterationsUndefined { .. } => ErrorKind::Degenerate,
            Error::PermutationUndefined { source, .. } | Error::Pair { source, .. } => {
                match source.kind() {
                    ErrorKind::Io => ErrorKind::Io,
                    _ => ErrorKind::Degenerate,
                }
            }
            _ => ErrorKind::Validation,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
