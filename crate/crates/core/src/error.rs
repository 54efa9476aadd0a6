use std::io;

use thiserror::Error;

/// Broad failure class, used by the command-line front end to choose an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Caller supplied an out-of-range parameter.
    Parameter,
    /// Input data could not be read, parsed or validated.
    Input,
    /// The computation hit a degenerate numerical case.
    Degenerate,
    /// Writing results failed.
    Output,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("non-finite feature at row {row}")]
    NonFiniteFeature { row: usize },

    #[error("duplicate time value {time} in trajectory '{trajectory}'")]
    DuplicateTime { trajectory: String, time: f64 },

    #[error("empty trajectory: {0}")]
    EmptyTrajectory(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distance between points {i} and {j} is not finite")]
    NonFiniteDistance { i: usize, j: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unknown trajectory id {0}")]
    UnknownTrajectory(usize),

    #[error("failed to read input: {0}")]
    Read(#[source] io::Error),

    #[error("failed to write output: {0}")]
    Write(#[source] io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::UnknownTrajectory(_) => ErrorKind::Parameter,
            Error::MalformedRow { .. }
            | Error::NonFiniteFeature { .. }
            | Error::DuplicateTime { .. }
            | Error::EmptyTrajectory(_)
            | Error::InvalidDataset(_)
            | Error::Read(_) => ErrorKind::Input,
            Error::NonFiniteDistance { .. } | Error::Degenerate(_) => ErrorKind::Degenerate,
            Error::Write(_) => ErrorKind::Output,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
