use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid parameters or an unsupported combination of options.
    Config { field: &'static str, reason: String },
    /// Argument outside the mathematical domain of an operation.
    Domain(String),
    /// Quadrature or iteration failed to reach the requested tolerance.
    Numeric { what: &'static str, achieved: f64 },
    /// A monitored quantity drifted past its bound during propagation.
    Accuracy {
        what: &'static str,
        value: f64,
        bound: f64,
    },
    /// The dressed basis is undefined because the generalized Rabi frequency vanishes.
    DegenerateBasis,
    /// Every node of a coefficient track is singular.
    Singular,
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config { field, reason } => write!(f, "invalid `{field}`: {reason}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Numeric { what, achieved } => {
                write!(
                    f,
                    "{what} did not converge (achieved tolerance {achieved:e})"
                )
            }
            Error::Accuracy { what, value, bound } => {
                write!(f, "{what} = {value:e} exceeds bound {bound:e}")
            }
            Error::DegenerateBasis => write!(f, "degenerate dressed basis: W0 = 0"),
            Error::Singular => write!(f, "all coefficient nodes are singular"),
        }
    }
}

impl core::error::Error for Error {}
