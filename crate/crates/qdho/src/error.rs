//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the function's mathematical domain.
    #[error("domain: {0}")]
    Domain(String),
    /// A stated precondition (step size, window bounds, ...) is violated.
    #[error("precondition: {0}")]
    Precondition(String),
    /// Parameters leave the regime where the model equations apply.
    #[error("model validity: {0}")]
    ModelValidity(String),
    /// A numerical procedure failed to converge or produced non-finite values.
    #[error("numerical: {0}")]
    Numerical(String),
    /// The requested computation exceeds desk-scale resource limits.
    #[error("resource: {0}")]
    Resource(String),
    /// Bad configuration file or command-line input.
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-parsable code used in CLI error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DOMAIN",
            Error::Precondition(_) => "PRECONDITION",
            Error::ModelValidity(_) => "MODEL",
            Error::Numerical(_) => "NUMERICAL",
            Error::Resource(_) => "RESOURCE",
            Error::Config(_) => "CONFIG",
            Error::Io(_) => "IO",
        }
    }

    /// Process exit status: 2 for validation errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::Resource(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_validation_from_numerics() {
        assert_eq!(Error::Domain("x".into()).exit_code(), 2);
        assert_eq!(Error::Precondition("x".into()).exit_code(), 2);
        assert_eq!(Error::Config("x".into()).exit_code(), 2);
        assert_eq!(Error::ModelValidity("x".into()).exit_code(), 2);
        assert_eq!(Error::Numerical("x".into()).exit_code(), 3);
        assert_eq!(Error::Resource("x".into()).exit_code(), 3);
        assert_eq!(Error::Numerical("x".into()).code(), "NUMERICAL");
    }
}
