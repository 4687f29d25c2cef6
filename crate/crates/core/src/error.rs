use thiserror::Error;

/// Errors raised by the workbench. Validation findings are reported as data
/// (see [`crate::theory::ValidationReport`]), not through this type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: expected {expected}")]
    Parse {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("sort mismatch at path {path:?}: expected {expected}, found {found}")]
    SortMismatch {
        path: Vec<usize>,
        expected: String,
        found: String,
    },
    #[error("arity mismatch for `{op}` at path {path:?}: expected {expected} arguments, found {found}")]
    ArityMismatch {
        path: Vec<usize>,
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("inclusion violation on `{symbol}`: {reason}")]
    InclusionViolation { symbol: String, reason: String },
    #[error("class budget exceeded (limit {0})")]
    BudgetExceeded(usize),
    #[error("bounded construction not saturated: {0}")]
    Unsaturated(String),
    #[error("models are over different theories")]
    TheoryMismatch,
    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("section laws fail: {0}")]
    SectionMismatch(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("level error: {0}")]
    LevelError(String),
    #[error("incomplete fragment, sorts lacking their delta apparatus: {0:?}")]
    IncompleteFragment(Vec<String>),
    #[error("term `{0}` has no gamma step in this fragment")]
    MissingTheta(String),
    #[error("relation is not closed under the operations: {0}")]
    NotClosed(String),
    #[error("{0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
