//! Error taxonomy shared by every module; the CLI maps variants onto exit codes.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on the mathematical domain was violated (bad letter,
    /// exponent out of range, radius outside a gauge's valid domain, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A query reached outside the data actually held (table limit exceeded,
    /// depth past the available letters). Never silently truncated.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// An iteration failed to reach its tolerance inside its budget.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// An enumeration or refinement hit its configured cap.
    #[error("resource cap: {0}")]
    ResourceCap(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 usage, 3 numeric, 4 resource cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::OutOfRange(_) | Error::Parse(_) => 2,
            Error::Numeric(_) => 3,
            Error::ResourceCap(_) => 4,
            Error::Io(_) => 3,
        }
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn out_of_range<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::OutOfRange(msg.into()))
}
