use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("node set must be nonempty")]
    EmptySet,

    #[error("exact clique search refused: {n} nodes exceeds the limit of {limit}")]
    CliqueSearchRefused { n: usize, limit: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph with {n} nodes exceeds the limit of {limit} for {what}")]
    SizeLimit {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("known mean required but not supplied")]
    MissingKnownMean,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("indefinite HAC estimate: variance {0} is negative")]
    IndefiniteVariance(f64),

    #[error("coefficient vector for node {node} has norm {norm} > 1")]
    CoefficientNorm { node: usize, norm: f64 },

    #[error("zero variance: normalised sum is undefined")]
    ZeroVariance,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
