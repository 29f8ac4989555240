use thiserror::Error;

use crate::certify::Certificate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported field order {0}: expected a prime or 2^k with 1 <= k <= 16")]
    UnsupportedOrder(u64),

    #[error("division by zero in GF({0})")]
    DivisionByZero(u32),

    #[error("certificate failed: {0}")]
    CertificateFailure(Box<Certificate>),

    #[error("clique cover violation: {0}")]
    CoverViolation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("dense eigensolver limited to n <= {limit}, got n = {n}")]
    SizeLimit { n: usize, limit: usize },

    #[error("lanczos did not converge after {iterations} iterations (worst residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("expander mixing bound violated: {0}")]
    TheoremViolation(String),

    #[error("exact identity violated: {0}")]
    IdentityViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
