use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("xml parse error at line {line}, column {column}: {message}")]
    Xml {
        line: u32,
        column: u32,
        message: String,
    },

    #[error("graphml: {message} (line {line})")]
    GraphMl { line: u32, message: String },

    #[error("edge at line {line} references undeclared node `{node}`")]
    UnknownNode { line: u32, node: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("program error at node {node}, round {round}: {message}")]
    Program {
        node: usize,
        round: usize,
        message: String,
    },

    #[error("conflicting copies of the message on arc {from}->{to} in round {round}")]
    Disagreement { from: usize, to: usize, round: usize },

    #[error("build uses the {actual} model, expected {expected}")]
    ModelMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
