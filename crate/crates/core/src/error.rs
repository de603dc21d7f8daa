use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("{p} does not split in the field of discriminant {d}")]
    NotSplit { d: i64, p: u64 },

    #[error("{0} is a perfect square; the field is degenerate")]
    PerfectSquare(i64),

    #[error("{0} is not a negative fundamental discriminant")]
    InvalidDiscriminant(i64),

    #[error("discriminant mismatch: {0} vs {1}")]
    DiscriminantMismatch(i64, i64),

    #[error("no representation 4p^s = x^2 + |D|y^2 for D={d}, p={p}, s={s}")]
    NoRepresentation { d: i64, p: u64, s: u64 },

    #[error("analytic bound needs |D| > 4, got {0}")]
    DomainTooSmall(i64),

    #[error("criterion inapplicable: {0}")]
    Inapplicable(String),

    #[error("integrality violated: {0}")]
    IntegralityViolation(String),

    #[error("criteria disagree for D={d}, p={p}: lvalue={lvalue}, sands={sands}")]
    CriterionDisagreement {
        d: i64,
        p: u64,
        lvalue: String,
        sands: String,
    },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("coefficient at N={0} is not integral at the modulus")]
    NonIntegralCoefficient(u64),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("no discriminant found with |D| <= {0}")]
    NotFoundWithinBudget(u64),

    #[error("member lies outside the theorem's hypotheses (order s = {s}): {reason}")]
    ExcludedField { s: u64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn budget(what: impl Into<String>) -> Self {
        Error::BudgetExceeded(what.into())
    }

    pub fn precondition(what: impl Into<String>) -> Self {
        Error::PreconditionViolated(what.into())
    }
}
