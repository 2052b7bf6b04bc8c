use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value {value} outside domain: {domain}")]
    OutOfDomain { value: String, domain: String },

    #[error(
        "precision {have} bits is insufficient for the request (need at least {need} bits)"
    )]
    InsufficientPrecision { have: u32, need: u32 },

    #[error("quadrature did not converge: level {max_level} reached with agreement {achieved}")]
    QuadratureDidNotConverge { max_level: u32, achieved: String },

    #[error("asymptotic series failed to reach target before the term cap at {cap} terms")]
    AsymptoticCap { cap: u32 },
}
