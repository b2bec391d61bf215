use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("particles {i} and {j} coincide")]
    Coincident { i: usize, j: usize },

    #[error("non-finite coordinate at particle {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("numerical blow-up at t = {time}: {detail}")]
    BlowUp { time: f64, detail: String },

    #[error("ill-conditioned result: {0}")]
    Conditioning(String),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
