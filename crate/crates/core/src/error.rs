use thiserror::Error;

/// Errors raised while building graphs, chains and target sets, or while
/// running the numerical routines on them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected ({reached} of {n} vertices reachable from 0)")]
    Disconnected { reached: usize, n: usize },

    #[error("graph has {n} vertices, above the limit of {limit}")]
    TooLarge { n: u128, limit: usize },

    #[error("cannot parse {what} `{input}`: {reason}")]
    Spec {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("edge list line {line}: {reason}")]
    EdgeList { line: usize, reason: String },

    #[error("instance list line {line}: {reason}")]
    InstanceList { line: usize, reason: String },

    #[error("vertex {vertex} out of range for a chain on {n} states")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("target set A is empty")]
    EmptyTarget,

    #[error("target set A = S (the whole state space)")]
    FullTarget,

    #[error("transition matrix is not valid: {0}")]
    InvalidChain(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("leading eigenvector of component {component} has a negative entry {value:e}")]
    NonPositivePerron { component: usize, value: f64 },

    #[error("component {component} does not attain the maximal quasi-stationary hitting time")]
    NotMaximal { component: usize },

    #[error("{censored} samples censored before t = {t}; empirical tail undefined there")]
    Censored { censored: usize, t: f64 },

    #[error("invalid simulation config: {0}")]
    SimConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
