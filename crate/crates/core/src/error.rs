use thiserror::Error;

/// Errors raised by the toolkit.
///
/// `Precondition` and `Construction` are ordinary mathematical outcomes
/// (an input outside an operation's domain, or a constructive search that
/// gave up). `Invariant` flags a broken internal consistency check and
/// always indicates a bug.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),
    #[error("no solution within bound: {0}")]
    NotFound(String),
    #[error("procedure (l,k) blocked: entry c = F[{l},{k}] vanishes")]
    ProcedureBlocked { l: usize, k: usize },
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, DspError>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($fmt:tt)+) => {
        if !$cond {
            return Err($crate::error::DspError::$variant(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
