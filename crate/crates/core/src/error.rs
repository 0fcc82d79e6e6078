use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("transition relation is not total: no `{action}` successor for state `{state}`")]
    NotTotal { state: String, action: String },

    #[error("observations do not partition the state set: {0}")]
    NotPartition(String),

    #[error("initial observation not singleton")]
    InitialNotSingleton,

    #[error("duplicate identifier `{0}`")]
    Duplicate(String),

    #[error("parallel transitions {0}: the weight function must be single-valued")]
    ParallelEdge(String),

    #[error("unknown identifier `{0}`")]
    Unknown(String),

    #[error("weight arithmetic out of range: {0}")]
    Range(String),

    #[error("undecidable objective `{0}`: bounded window objectives have no solver")]
    Undecidable(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("illegal abstract path: {0}")]
    IllegalPath(String),

    #[error("index {index} out of range (length {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("resource limit exceeded: more than {limit} {what}")]
    ResourceLimit { what: &'static str, limit: usize },
}
