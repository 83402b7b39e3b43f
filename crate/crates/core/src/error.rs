use thiserror::Error;

/// Errors raised by parsing, validation and the hypothesis checks of rewrites.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("invalid label {0:?}")]
    InvalidLabel(String),
    #[error("node {node} out of range for a document with {len} nodes")]
    InvalidNode { node: usize, len: usize },
    #[error("ancestor_at({offset}) exceeds depth {depth} of node {node}")]
    AncestorOutOfRange { node: usize, offset: usize, depth: usize },
    #[error("unknown fragment {0:?}")]
    UnknownFragment(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("pair ({0},{1}) violates the fragment's path shape")]
    Shape(usize, usize),
    #[error("relation is not closed: ({0},{1}) ~> ({2},{3})")]
    NotClosed(usize, usize, usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
