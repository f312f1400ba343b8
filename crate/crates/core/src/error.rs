use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{what} needs {modes} modes, above the cap of {cap}")]
    Size {
        what: &'static str,
        modes: usize,
        cap: usize,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not a co-isometry (max |u·uᵀ - I| = {deviation:.3e})")]
    NotCoIsometry { deviation: f64 },

    #[error("division by zero: {0}")]
    ZeroNorm(&'static str),

    #[error("non-finite loss at round {round}: {loss}")]
    NonFinite { round: usize, loss: f64 },

    #[error(
        "no positive repair exists in the near-null space (best minimum entry {best_min:.3e})"
    )]
    Infeasible { best_min: f64 },

    #[error("state has weight {weight:.3e} outside the ancilla vacuum")]
    AncillaOccupied { weight: f64 },

    #[error(
        "state violates parity superselection (coherence {magnitude:.3e} between parity sectors)"
    )]
    ParityMix { magnitude: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
