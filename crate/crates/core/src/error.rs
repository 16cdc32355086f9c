use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("mismatched grids: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Bessel domain error: {0}")]
    BesselDomain(String),

    #[error("zero finder failed for (m={m}, n={n}) in [{lo}, {hi}]")]
    ZeroBracket { m: u32, n: u32, lo: f64, hi: f64 },

    #[error("linear solve failed: {0}")]
    SingularSystem(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
