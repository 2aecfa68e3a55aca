use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("resource budget exceeded: {what} needs {needed}, budget is {budget}")]
    Resource {
        what: String,
        needed: u64,
        budget: u64,
    },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("divergent quantity: {0}")]
    Divergence(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
