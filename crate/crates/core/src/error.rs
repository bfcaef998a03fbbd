use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {what} needs {needed} cells, limit is {limit}")]
    Capacity {
        what: String,
        needed: u64,
        limit: u64,
    },

    #[error("unknown cell: {0}")]
    Lookup(String),

    #[error("non-generic projection: {0}")]
    NonGenericProjection(String),

    #[error("invariant `{invariant}` is undefined on cell {cell}")]
    Undefined { invariant: String, cell: String },

    #[error("cycle check failed: boundary has coefficient {coefficient} on face {face}")]
    NotACycle { face: String, coefficient: String },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
