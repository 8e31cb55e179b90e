use thiserror::Error;

/// Errors surfaced by the protocol library.
///
/// Infeasibility is deliberately *not* an error: `feasibility` returns a
/// verdict value. The `Infeasible` variant exists for operations that cannot
/// produce a meaningful result without a feasible resource (synthesis, the
/// protocol runner) and carries the Schmidt spectrum so callers can report it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("index out of range: {0}")]
    IndexRange(String),

    #[error("state too large: {0} amplitudes exceeds the limit of {1}")]
    SizeLimit(usize, usize),

    #[error("resource cannot carry a dimension-{n1} input (schmidt spectrum {spectrum:?})")]
    Infeasible { n1: usize, spectrum: Vec<f64> },

    #[error("all outcome probabilities vanish")]
    DegenerateState,

    #[error("frame protocol violation: {0}")]
    Protocol(String),

    #[error("frame corrupted: {0}")]
    Corruption(String),

    #[error("incomplete frame: got {got} bytes, need {need}")]
    IncompleteFrame { got: usize, need: usize },

    #[error("session failed: {0}")]
    Session(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
