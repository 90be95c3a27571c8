use std::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed expression text; `offset` is a byte offset into the input.
    Syntax { offset: usize, message: String },
    /// Identifier that is not the variable or a known function.
    UnknownIdentifier { offset: usize, name: String },
    /// Evaluation outside a node's domain (log of a nonpositive value,
    /// division by zero, pole, negative base with fractional exponent, ...).
    Domain(String),
    /// A value became non-finite during propagation.
    Overflow(String),
    /// Node has no complex extension in the evaluation path used.
    UnsupportedNode(String),
    /// Principal-branch evaluation hit the cut (nonpositive real axis).
    BranchCut(String),
    /// An integral or series was detected to diverge.
    Divergence(String),
    /// Adaptive quadrature could not reach the tolerance within its budget.
    QuadratureBudget(String),
    /// An iteration failed to converge within its term budget.
    NoConvergence(String),
    /// Measure violates its invariants or cannot be represented as requested.
    InvalidMeasure(String),
    /// Catalog or operation parameters violate their constraints.
    Constraint(String),
    /// Vectors not comparable under the majorization preorder.
    NotComparable(String),
    /// No catalog pair with the given name.
    UnknownPair(String),
    /// A one-sided limit could not be determined numerically.
    UndeterminedLimit(String),
    /// JSON (de)serialization failure.
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Syntax { offset, message } => {
                write!(f, "syntax error at offset {offset}: {message}")
            }
            Error::UnknownIdentifier { offset, name } => {
                write!(f, "unknown identifier '{name}' at offset {offset}")
            }
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Overflow(m) => write!(f, "overflow to non-finite value: {m}"),
            Error::UnsupportedNode(m) => write!(f, "unsupported node: {m}"),
            Error::BranchCut(m) => write!(f, "branch cut: {m}"),
            Error::Divergence(m) => write!(f, "divergence detected: {m}"),
            Error::QuadratureBudget(m) => write!(f, "quadrature budget exhausted: {m}"),
            Error::NoConvergence(m) => write!(f, "no convergence: {m}"),
            Error::InvalidMeasure(m) => write!(f, "invalid measure: {m}"),
            Error::Constraint(m) => write!(f, "constraint violation: {m}"),
            Error::NotComparable(m) => write!(f, "not comparable: {m}"),
            Error::UnknownPair(m) => write!(f, "unknown pair: {m}"),
            Error::UndeterminedLimit(m) => write!(f, "undetermined limit: {m}"),
            Error::Json(m) => write!(f, "json error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
