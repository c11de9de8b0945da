use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("malformed matroid spec: {0}")]
    MalformedMatroid(String),
    #[error("cannot contract loop element {0}")]
    ContractLoop(usize),
    #[error("exhaustive separation over {support} elements exceeds cap {cap}")]
    SeparationCap { support: usize, cap: usize },
    #[error("no integral point in LP-B")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("strategy {strategy} is not applicable: {reason}")]
    StrategyInapplicable { strategy: String, reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("guarantee audit failed: {0}")]
    Audit(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn audit(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Audit(msg()))
    }
}
