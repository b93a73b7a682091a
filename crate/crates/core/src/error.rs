use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("jet context mismatch: ({0}, {1}) vs ({2}, {3})")]
    ContextMismatch(usize, usize, usize, usize),
    #[error("variable index {index} out of range (have {len})")]
    VarIndex { index: usize, len: usize },
    #[error("division by a jet with zero constant term")]
    ZeroDivisor,
    #[error("degenerate gradient at base point in solve coordinate {0}")]
    DegenerateGradient(usize),
    #[error("Newton iteration did not converge after {0} steps (residual {1:e})")]
    NonConvergence(usize, f64),
    #[error("singular or ill-conditioned constant-term matrix (condition {0:e})")]
    Singular(f64),
    #[error("jet order budget exhausted: {0}")]
    OrderBudget(String),
    #[error("base point not on the zero set: |rho(p)| = {0:e}")]
    BaseOffZeroSet(f64),
    #[error("Levi form not positive definite at base")]
    LeviNotPositive,
    #[error("rank deficiency: rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("symmetry precondition violated (deviation {0:e})")]
    Symmetry(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
