use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the formula or operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid driving function: {0}")]
    Driver(String),

    /// A statistical guard (effective sample size, clipping rate, ...) failed.
    #[error("statistical guard failed: {0}")]
    Guard(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
