use thiserror::Error;

/// Errors raised by the dynamic programs, the spec parsers and the drivers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("node {node} outside domain of size {n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("cannot delete absent edge {sym}:{u}->{v}")]
    DeleteAbsentEdge { sym: String, u: usize, v: usize },

    #[error("inserting {u}->{v} would close a cycle")]
    CycleWouldForm { u: usize, v: usize },

    #[error("unsupported modification: {0}")]
    UnsupportedModification(String),

    #[error("duplicate transition from state {state} on `{sym}`")]
    NondeterministicSpec { state: usize, sym: String },

    #[error("padding violation on tape {} at state {state}", tape + 1)]
    PaddingViolation { tape: usize, state: usize },

    #[error("derived relations are only available for 1 to 3 holes, got {0}")]
    ArityUnsupported(usize),

    #[error("length {requested} exceeds the maintained bound {bound}")]
    BoundExceeded { requested: usize, bound: usize },

    #[error("enumeration budget of {0} exceeded")]
    BudgetExceeded(usize),

    #[error("configuration rejected: {0}")]
    ComplexityGuard(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
