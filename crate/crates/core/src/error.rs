use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register of {0} qubits is outside the supported range 1..={1}")]
    QubitCount(usize, usize),

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("CNOT control and target must differ (both {0})")]
    SameControlTarget(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("replay buffer holds {size} transitions, cannot sample a batch of {batch}")]
    Underfilled { size: usize, batch: usize },

    #[error("need at least {needed} episodes, have {have}")]
    TooFewEpisodes { needed: usize, have: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("runs disagree: {0}")]
    Mismatch(String),

    #[error("malformed file {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dim(expected: usize, got: usize) -> Self {
        Error::Dimension { expected, got }
    }
}
