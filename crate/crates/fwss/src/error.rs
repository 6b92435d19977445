use thiserror::Error;

use crate::ss4::SolveReport;

/// Errors shared by the whole toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's contract.
    #[error("input error: {0}")]
    Input(String),

    /// A configuration value is outside the supported range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An exhaustive enumeration would exceed its configured cap.
    #[error("resource error: {0}")]
    Resource(String),

    /// A solver ran out of divisions before reaching a verdict. Carries the
    /// counters gathered so far.
    #[error("division budget exhausted after {} divisions", partial.divisions_tried)]
    Budget { partial: Box<SolveReport> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status used by the CLI: 2 for bad input, 3 for exhausted
    /// resources or I/O trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Parameter(_) | Error::Json(_) => 2,
            Error::Resource(_) | Error::Budget { .. } | Error::Io(_) => 3,
        }
    }
}
