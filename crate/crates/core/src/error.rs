use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("empty {0} node in min-plus expression")]
    EmptyExpression(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inequality {index} references undeclared variable {var}")]
    UndeclaredVariable { index: usize, var: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular system matrix (pivot column {column})")]
    SingularSystem { column: usize },

    #[error("linear solve broke down at step {step}")]
    SolverBreakdown { step: usize },

    #[error("non-finite {quantity} at step {step}")]
    NonFinite { step: usize, quantity: &'static str },

    #[error("decay fit undefined: {0}")]
    UndefinedFit(String),

    #[error("trace constraint not monotone in the new value (lambda = {lambda}, delta = {delta})")]
    NonMonotone { lambda: String, delta: String },

    #[error("no admissible lambda down to 2^-{max_exponent}")]
    NoAdmissibleLambda { max_exponent: u32 },

    #[error("internal check failed: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
