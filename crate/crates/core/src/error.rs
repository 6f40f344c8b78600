use thiserror::Error;

/// Errors raised by the chain, cogwheel and hybrid operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("site {site} out of range 1..={num_spins}")]
    SiteOutOfRange { site: usize, num_spins: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("size mismatch: expected {expected} spins, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("degenerate size: {0}")]
    Degenerate(String),

    #[error("system too large: {0}")]
    TooLarge(String),

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
