use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Argument outside the supported domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Grid or truncation too coarse for the requested accuracy.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// A hypothesis of the operation does not hold for the given input.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Height or parameter below an admissibility threshold.
    #[error("{what}: must exceed admissibility threshold {threshold:.6e}")]
    Admissibility { what: String, threshold: f64 },
    /// Iterative method stopped without meeting its tolerance.
    #[error("no convergence: {0}")]
    Convergence(String),
    /// Malformed textual specification.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
