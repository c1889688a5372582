use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("duplicate post id `{0}`")]
    DuplicatePost(String),

    #[error("duplicate thread id `{0}`")]
    DuplicateThread(String),

    #[error("post `{post}` references unknown thread `{thread}`")]
    UnknownThread { post: String, thread: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input that is well-formed but violates a structural precondition
    /// (non-symmetric matrix, mismatched dimensions, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no nonzero similarities to select lambda from; pass an explicit lambda")]
    NoNonzeroSimilarities,

    /// Violation of an invariant the library itself is supposed to maintain.
    #[error("internal consistency error: {0}")]
    Inconsistent(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than a defect.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Inconsistent(_) | Error::Numerical(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
