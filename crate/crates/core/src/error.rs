use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("elements belong to different fields ({0} vs {1})")]
    FieldMismatch(String, String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("division by zero")]
    DivisionByZero,

    #[error("{0} is not a rational prime")]
    NotPrime(u64),

    #[error("the singular series is undefined at the zero shift")]
    ZeroShift,

    #[error("budget exceeded: {what} needs {requested}, limit is {limit}")]
    Budget {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("query box [{lo}, {hi}] leaves the grid extent [-{extent}, {extent}]")]
    OutOfExtent { lo: i64, hi: i64, extent: i64 },

    #[error("quadrature did not converge: estimated error {estimate:.3e} > {tolerance:.3e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed grid file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn budget(what: &'static str, requested: u128, limit: u128) -> Self {
        Error::Budget {
            what,
            requested,
            limit,
        }
    }

    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidField(_) => "invalid-field",
            Error::FieldMismatch(..) => "field-mismatch",
            Error::Overflow(_) => "overflow",
            Error::DivisionByZero => "division-by-zero",
            Error::NotPrime(_) => "not-prime",
            Error::ZeroShift => "zero-shift",
            Error::Budget { .. } => "budget",
            Error::OutOfExtent { .. } => "out-of-extent",
            Error::Quadrature { .. } => "quadrature",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}
