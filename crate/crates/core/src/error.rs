use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("argument outside the accuracy domain: {0}")]
    OutOfDomain(String),

    #[error("matrix is not positive definite: pivot {pivot} has value {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is ill-conditioned: condition estimate {estimate:e}")]
    IllConditioned { estimate: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("numerical quality check failed: {0}")]
    Quality(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for rejections caused by the numerics (under-resolution,
    /// conditioning, convergence) rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::IllConditioned { .. }
                | Error::NoConvergence(_)
                | Error::Quality(_)
        )
    }
}
