use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The CLI maps each variant onto its documented exit code (see
/// [`Error::exit_code`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violates a domain invariant (type space, price bounds, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed configuration; `path` names the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge on cell {cell} (error estimate {estimate:e})")]
    Quadrature { cell: String, estimate: f64 },

    /// Any other numeric failure (non-convergent Newton, LP stall, broken identity).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A zero-mass equation has no sign change on its bracket.
    #[error("no root in [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    NoRoot { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Exit code used by the command-line front end.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config { .. } => 2,
            Error::Domain(_) => 2,
            Error::Quadrature { .. } | Error::Numeric(_) => 3,
            Error::NoRoot { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
