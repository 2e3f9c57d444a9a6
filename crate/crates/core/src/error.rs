use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("product of two U-dependent fields is not defined in a linear problem")]
    IllPosedProduct,

    #[error("solvability violated: integrand has nonzero mean {0}")]
    Solvability(String),

    #[error("evolution contains nonconstant harmonic content")]
    NonConstantEvolution,

    #[error("division by the vanishing combination {0}")]
    ZeroDivisor(String),

    #[error("mixed divisor {m}·k1 + {n}·k2 cannot arise with k1 fixed to 1")]
    MixedDivisorUnsupported { m: i64, n: i64 },

    #[error("iteration failed after {iterations} iterations; residual still has {residual_terms} terms")]
    IterationFailure { iterations: usize, residual_terms: usize },

    #[error("invalid truncation orders: {0}")]
    InvalidOrder(String),

    #[error("unsupported request: {0}")]
    Unsupported(String),

    #[error("regularization inapplicable: K4 = {0} is negative")]
    RegularizationInapplicable(f64),

    #[error("parameters outside the physical range: {0}")]
    PhysicalRange(String),

    #[error("series estimator {estimator} rejected the coefficients: {reason}")]
    ModeMismatch { estimator: &'static str, reason: String },

    #[error("need at least {needed} usable coefficients, have {have}")]
    InsufficientCoefficients { needed: usize, have: usize },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unregularized truncation is unstable: {0}")]
    Unstable(String),

    #[error("malformed document: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
