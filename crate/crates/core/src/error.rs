use thiserror::Error;

/// Errors raised by the analytic, numeric and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("tolerance must be positive, got {0:e}")]
    Tolerance(f64),

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("variance evaluated to {value:e}, below the truncation bound -{bound:e}")]
    NegativeVariance { value: f64, bound: f64 },

    #[error("argument {s} lies within {distance:e} of a pole")]
    NearPole { s: String, distance: f64 },

    #[error("a network needs a finite depth")]
    InfiniteDepth,

    #[error("k_max = {0} exceeds the network memory guard of {max}", max = crate::sim::network::MAX_NETWORK_DEPTH)]
    NetworkTooDeep(u32),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
