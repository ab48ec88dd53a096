use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input outside the supported domain (non-prime q, reducible modulus, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// The Drinfeld module does not have good reduction at the requested place.
    #[error("bad reduction at {0}")]
    BadReduction(String),
    /// A search hit its configured bound before finishing.
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    /// Too few usable samples for a statistical estimate.
    #[error("under-sample: {0}")]
    UnderSample(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not supported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
