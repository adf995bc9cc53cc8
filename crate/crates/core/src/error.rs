use thiserror::Error;

use crate::sal::HypothesisReport;

/// Errors raised by the engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot differentiate step(..) with respect to `{0}`")]
    StepDifferentiation(String),

    #[error("pole at exponent {re}{im:+}i (order {order})")]
    Pole { re: f64, im: f64, order: usize },

    #[error("z = {re}{im:+}i lies outside the strip {lo} < Re z < {hi}")]
    StripViolation { re: f64, im: f64, lo: f64, hi: f64 },

    #[error("log power {0} exceeds the supported depth of 20")]
    LogPowerTooLarge(usize),

    #[error("index set needs at least one generator")]
    EmptyGenerators,

    #[error("truncation bounds differ: {0} vs {1}")]
    TruncationMismatch(f64, f64),

    #[error("face label mismatch: {0}")]
    FaceMismatch(String),

    #[error("exponent matrix is not b-normal: row `{0}` has several nonzero entries")]
    NotBNormal(String),

    #[error("quadrature failed to reach tolerance (estimate {estimate:e}, value {value})")]
    Quadrature { value: f64, estimate: f64 },

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("invalid expansion data: {0}")]
    InvalidExpansion(String),

    #[error("missing expansion data: {0}")]
    MissingExpansion(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("least-squares design is rank deficient (rank {rank} of {cols})")]
    RankDeficient { rank: usize, cols: usize },

    #[error("hypothesis diagnostics failed: {}", .0.summary())]
    Hypothesis(Box<HypothesisReport>),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
