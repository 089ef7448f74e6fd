use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    ArityMismatch {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("relation `{0}` is not declared in the signature")]
    UnknownRelation(String),
    #[error("relation `{name}` used with arity {used}, declared arity {declared}")]
    AtomArity {
        name: String,
        used: usize,
        declared: usize,
    },
    #[error("bad manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("key position {position} out of range for arity {arity}")]
    BadPositions { position: usize, arity: usize },

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable `{0}` is quantified twice")]
    DuplicateQuantifier(String),
    #[error("quantified variable `{0}` does not occur in any atom")]
    QuantifiedVarUnused(String),
    #[error("variable set is not contained in the query's variables")]
    Scope,
    #[error("variable family is not closed under subsets")]
    NotSubsetClosed,
    #[error("query must be quantifier-free here")]
    NotQuantifierFree,

    #[error("tree decomposition is invalid: {0}")]
    InvalidTd(String),
    #[error("query has {found} variables, the configured cap is {cap}")]
    TooManyVariables { found: usize, cap: usize },
    #[error("query is not acyclic")]
    NotAcyclic,
    #[error("query is not free-connex")]
    NotFreeConnex,
    #[error("tree decomposition text, line {line}: {reason}")]
    TdFormat { line: usize, reason: String },

    #[error("bound M = {m_bound} is smaller than the largest relation ({m})")]
    BadM { m_bound: u64, m: usize },
    #[error("refinement has an empty table")]
    TrivialRefinement,
    #[error("variable sets are not nested")]
    NotNested,
    #[error("pair does not violate uniformity")]
    NotViolating,
    #[error("splitting recursion exceeded depth {0}")]
    DepthExceeded(u64),
    #[error("logarithm base must be at least 2, got {0}")]
    BadBase(usize),
    #[error("no tree decompositions supplied")]
    EmptyTdList,
    #[error(
        "refinement {refinement} admits no free-connex decomposition of cost <= {w}; best min-max cost is {best}"
    )]
    WidthExceeded {
        refinement: usize,
        w: f64,
        best: f64,
    },
    #[error("invalid parameter: {0}")]
    BadParams(String),

    #[error("mapping domain does not match the free variables")]
    DomainMismatch,
    #[error("indexes do not share one free-variable schema")]
    SchemaMismatch,
    #[error("brute-force search space {0} exceeds the limit")]
    TooLarge(f64),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
