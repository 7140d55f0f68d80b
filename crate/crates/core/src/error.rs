use thiserror::Error;

/// Errors raised by tail construction, evaluation and the derived operators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("position {x} is outside the representable range [0, {cap}]")]
    Range { x: f64, cap: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("invalid construction: {0}")]
    Construction(String),

    #[error("quadrature did not converge: achieved relative error {achieved:e}, target {target:e}")]
    Numeric { achieved: f64, target: f64 },

    #[error("underflow: {0}")]
    Underflow(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("infeasible simulation: acceptance rate {rate:e} below {min:e}; {hint}")]
    Infeasible { rate: f64, min: f64, hint: String },
}

pub type Result<T> = std::result::Result<T, Error>;
