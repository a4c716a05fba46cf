use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("integration failed at t = {t:e} s: {reason}")]
    Integration { t: f64, reason: String },

    #[error("oscillation condition violated: {0}")]
    NoOscillation(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("oscillator {0} stopped oscillating")]
    Death(usize),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
