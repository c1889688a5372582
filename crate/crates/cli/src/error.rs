use std::fmt;
use std::path::Path;

/// Failure of a subcommand, classified for the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad input, bad flags or unreadable/unwritable files.
    Validation(String),
    /// A defect or numerical breakdown inside the library.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Internal(_) => 2,
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        CliError::Validation(message.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Tags a library error with the pipeline stage it came from.
pub fn stage<T>(name: &str, r: forumsim::Result<T>) -> CliResult<T> {
    r.map_err(|e| {
        let message = format!("{name}: {e}");
        if e.is_validation() {
            CliError::Validation(message)
        } else {
            CliError::Internal(message)
        }
    })
}

pub fn io_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        let v = stage::<()>("corpus", Err(forumsim::Error::DuplicatePost("p1".into()))).unwrap_err();
        assert_eq!(v.exit_code(), 1);
        assert_eq!(v.to_string(), "corpus: duplicate post id `p1`");
        let i = stage::<()>("embed", Err(forumsim::Error::Numerical("no convergence".into()))).unwrap_err();
        assert_eq!(i.exit_code(), 2);
    }
}
