use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical conditioning failure: {0}")]
    Conditioning(String),

    #[error("insufficient series depth: requested tolerance {tol:e} needs at least {required} terms, got {available}")]
    InsufficientDepth {
        tol: f64,
        required: usize,
        available: usize,
    },

    #[error("enumeration budget exceeded: {required} items required, limit is {limit}")]
    Budget { required: u128, limit: u128 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("tolerance {tol:e} not reached; achieved error estimate {achieved:e}")]
    Tolerance { tol: f64, achieved: f64 },

    #[error("too few samples: {got} given, at least {need} required")]
    TooFewSamples { got: usize, need: usize },

    #[error("missing decay certificate for coefficient tail truncation")]
    MissingCertificate,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
