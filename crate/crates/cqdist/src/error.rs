use thiserror::Error;

/// Errors produced by parsing, trajectory validation, and numerics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("evaluation error at t = {t}: {message}")]
    Eval { t: f64, message: String },

    #[error("unbound parameter `{0}`")]
    UnboundParam(String),

    #[error("invalid trajectory spec: {0}")]
    Validation(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(
        "quadrature did not converge within depth {max_depth}; \
         worst subinterval [{t0}, {t1}]"
    )]
    Quadrature { t0: f64, t1: f64, max_depth: u32 },

    #[error("non-finite integrand value at t = {t}")]
    NonFinite { t: f64 },

    #[error("spec file error: {0}")]
    SpecFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
