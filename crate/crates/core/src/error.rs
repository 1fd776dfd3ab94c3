use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph generation failed: {0}")]
    Generation(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("corpus member {index} failed: {source}")]
    CorpusMember {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("corpus already exists at {0}")]
    CorpusExists(PathBuf),

    #[error("degenerate degree distribution: mean degree is zero")]
    DegenerateDistribution,

    #[error("no percolation: mean excess degree {mean_excess} does not exceed 1")]
    NoPercolation { mean_excess: f64 },

    #[error("no crossing of the phase transition for alpha in [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("simulation integrity fault: {0}")]
    Integrity(String),

    #[error("overhead passed the cap of {limit} at step {step} ({sends} sends)")]
    OverheadExceeded { limit: f64, sends: u64, step: u32 },

    #[error("metric undefined: {0}")]
    Undefined(&'static str),

    #[error("run failed on graph {graph} with seed {seed}: {source}")]
    RunFailed {
        graph: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed {what} at line {line}: {detail}")]
    Parse {
        what: &'static str,
        line: usize,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
