use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid group spec `{0}` (expected factors u1, su2, r1 joined by `*`)")]
    InvalidGroup(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("irrep label does not match the group factors: {0}")]
    LabelMismatch(String),
    #[error("heat kernel truncation insufficient: tail bound {tail:e} exceeds {limit:e}")]
    TruncationInsufficient { tail: f64, limit: f64 },
    #[error(
        "quadrature under-resolved at order {order}: doubling the order changed the result by {delta:e} (relative), limit {limit:e}"
    )]
    QuadratureUnderResolved {
        order: usize,
        delta: f64,
        limit: f64,
    },
    #[error("gauge-transformed link {link} lies outside the principal log branch")]
    LogBranchViolation { link: usize },
    #[error("operation needs a compact group, but the spec has a Euclidean factor")]
    NonCompact,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
