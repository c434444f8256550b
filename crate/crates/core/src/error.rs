use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coupling configuration: {0}")]
    InvalidConfig(String),

    #[error("{name} = {value} is out of range: {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Truncated Fock state would discard more probability than allowed.
    #[error("truncation at cutoff {cutoff} leaves tail mass {tail:.3e} above the limit {limit:.3e}")]
    TailBound { cutoff: usize, tail: f64, limit: f64 },

    #[error("undefined quantity: {0}")]
    Domain(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
