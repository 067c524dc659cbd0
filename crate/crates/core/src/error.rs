use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the domain ({domain})")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("n = {n} exceeds the {mode} cap of {cap} (estimated {estimate})")]
    SizeCap {
        n: usize,
        cap: usize,
        mode: &'static str,
        estimate: String,
    },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("did not converge: {0}")]
    Convergence(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain { what, value, domain }
}
