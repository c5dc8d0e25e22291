use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("vertex {0} has no neighbors")]
    DegenerateVertex(usize),

    #[error("chain is not irreducible")]
    NotIrreducible,

    #[error("target set is not reached almost surely: state {0} can escape it")]
    EscapingMass(usize),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("degenerate lambda: transition {from} -> {to} has probability {prob}")]
    DegenerateLambda { from: usize, to: usize, prob: f64 },

    #[error("degenerate horizon: {0}")]
    DegenerateHorizon(String),

    #[error("graph is not a tree")]
    NotATree,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("scale selection failed: {0}")]
    ScaleSelection(String),

    #[error("internal verification failure: {0}")]
    Verification(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
