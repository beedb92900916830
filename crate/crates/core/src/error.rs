use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    /// A configuration value is out of range or inconsistent. `key` names the offending field.
    #[error("invalid configuration at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("degenerate Markov chain: p_on and p_off are both zero")]
    DegenerateChain,

    #[error("insufficient history: observation window is empty")]
    InsufficientHistory,

    #[error("empty topology: node count must be at least 1")]
    EmptyTopology,

    #[error("neighbor {neighbor} has no available channel and cannot be covered")]
    UncoverableNeighbor { neighbor: usize },

    #[error("delivery ratio undefined: no messages were originated")]
    UndefinedRatio,

    #[error("cannot aggregate heterogeneous runs: {0}")]
    Aggregation(String),

    #[error("malformed input at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("sweep aborted at cell {cell} (seed {seed}): {reason}; completed cells: {completed:?}")]
    SweepAborted {
        cell: usize,
        seed: u64,
        reason: String,
        completed: Vec<usize>,
    },

    #[error("i/o error on `{path}`: {reason}")]
    Io { path: String, reason: String },
}

impl SimError {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        SimError::Parse {
            line,
            reason: reason.into(),
        }
    }
}

impl SimError {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        SimError::Io {
            path: path.display().to_string(),
            reason: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
