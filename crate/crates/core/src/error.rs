use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("empty symbol list")]
    EmptySymbols,
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("root symbol `{0}` is not declared")]
    MissingRoot(String),
    #[error("terminal symbol `{0}` has children")]
    TerminalWithChildren(String),
    #[error("symbol `{0}` has no children but is not listed as terminal")]
    UnmarkedLeaf(String),
    #[error("symbol `{0}` has {1} children; at most 36 are supported")]
    TooManyChildren(String, usize),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid ball address `{0}`")]
    InvalidAddress(String),
    #[error("the whole space is not a proper ball")]
    RootBall,
    #[error("the root symbol is terminal; the space is a single point")]
    TerminalRoot,
    #[error("invalid automaton: {0}")]
    Automaton(String),
    #[error("no valid similarity label from `{src}` to `{dst}`")]
    LabelMismatch { src: String, dst: String },
    #[error("sources do not partition the space: {0}")]
    SourcesNotPartition(String),
    #[error("targets do not partition the space: {0}")]
    TargetsNotPartition(String),
    #[error("address `{0}` spans more than one region")]
    InsufficientDepth(String),
    #[error("operation needs a non-identity element")]
    IdentityElement,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("invalid transition matrix: {0}")]
    Matrix(String),
}

pub type Result<T> = std::result::Result<T, Error>;
