use thiserror::Error;

/// A parameter condition rejected by [`crate::solver::validate_config`].
///
/// Each variant names exactly one violated condition so callers can report
/// (and tests can match) the specific failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error("tau1 must lie in (0, 1], got {0}")]
    Tau1OutOfRange(f64),
    #[error("tau2/tau1 must lie in (0, 2), got {0}")]
    TauRatioOutOfRange(f64),
    #[error("|tau1 - tau2| must be < 1, got {0}")]
    TauGapTooLarge(f64),
    #[error("B1 must lie in (0, 1), got {0}")]
    B1OutOfRange(f64),
    #[error("B2 must lie in (0, 1), got {0}")]
    B2OutOfRange(f64),
    #[error("nu for block {block} must lie in (0, 1), got {value}")]
    NuOutOfRange { block: usize, value: f64 },
    #[error("inflated kappa factor for block {block} must exceed 1, got {value}")]
    KappaFactorTooSmall { block: usize, value: f64 },
    #[error("block {block}: kappa = l is only admissible when the constraint is affine and the block surrogate is convex in that block")]
    ExactKappaNotAdmissible { block: usize },
    #[error("configuration lists {configured} blocks but the problem has {expected}")]
    BlockCountMismatch { configured: usize, expected: usize },
    #[error("sigma_B = lambda_min(B B^T) must be positive, got {0}")]
    NonPositiveSigmaB(f64),
    #[error("the Lipschitz constant of grad G must be nonnegative, got {0}")]
    NegativeLipschitzG(f64),
    #[error("beta B^T B + L_G I is singular (L_G = 0 and lambda_min(B^T B) = 0)")]
    SingularYSystem,
    #[error("C3 = delta/2 - 2 C2 L_G^2 must be positive, got {0}")]
    NonPositiveC3(f64),
    #[error("8 C2 L_G^2 = {lhs} exceeds B2 C3 = {rhs}")]
    DualCouplingCondition { lhs: f64, rhs: f64 },
    #[error("a budget needs max_iters or max_seconds")]
    EmptyBudget,
    #[error("tolerance must be nonnegative, got {0}")]
    NegativeTolerance(f64),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected:?}, got {actual:?}")]
    Dimension {
        context: String,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid configuration: {0}")]
    Validation(#[from] ValidationError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_shape(context: &str, expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension {
            context: context.to_string(),
            expected,
            actual,
        });
    }
    Ok(())
}
