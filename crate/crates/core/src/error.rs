use thiserror::Error;

/// Errors surfaced by the library. Anything that is the caller's fault is an
/// [`Error::Input`]; file and parse failures keep their own variants so the
/// CLI can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("enumeration guard: {programs} programs exceeds limit {limit}")]
    Guard { programs: u128, limit: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
