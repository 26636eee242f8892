use thiserror::Error;

/// Errors raised by evaluation, sampling and configuration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("precision of {0} bits is below the 64-bit floor; verification at lower precision is meaningless")]
    PrecisionTooLow(u32),

    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),

    #[error("division by zero (divisor has magnitude 0)")]
    DivisionByZero,

    #[error("negative power of zero")]
    ZeroToNegativePower,

    #[error("theta function is undefined at x = 0")]
    ThetaAtZero,

    #[error("nome modulus {0} is outside the convergent range (need |p| <= 0.99)")]
    NomeOutOfRange(f64),

    #[error("base q must be nonzero")]
    ZeroBase,

    #[error("cofactor expansion limited to order <= 7, got {0}")]
    CofactorOrderTooLarge(usize),

    #[error("matrix order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("degenerate parameters: {factor} is numerically at a pole")]
    DegenerateParameters { factor: String },

    #[error("parameter constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("summation grid of {terms} terms exceeds the cost guard of {limit}")]
    CostGuardExceeded { terms: u64, limit: u64 },

    #[error("could not find generic parameters after {0} rejections")]
    SamplerExhausted(u32),

    #[error("invalid campaign spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
